#include <doctest.h>

#include <cmath>

#include "mmwall/link_scenario.hpp"

using namespace mmwall;

namespace {

SceneGeometry bare(Vec2 ap, std::vector<Vec2> users) {
    SceneGeometry s;
    s.ap = ap;
    s.surface_center = {0.0, 0.0};
    s.surface_normal = {1.0, 0.0};
    s.users = std::move(users);
    s.blockers.clear();
    return s;
}

// Angle of v from the +x normal, positive toward +y, by atan2.
double heading(Vec2 v) { return std::atan2(v.y, v.x); }

}  // namespace

TEST_CASE("geometry angles") {
    SUBCASE("on-axis lens") {
        const auto a = compute_geometry_angles(bare({-3, 0}, {{3, 0}}), 0);
        CHECK(a.incident_rad == 0.0);
        CHECK(a.departure_rad == 0.0);
        CHECK(a.mode == RelayMode::lens);
    }
    SUBCASE("specular mirror") {
        const auto a = compute_geometry_angles(bare({-3, 1}, {{-3, -1}}), 0);
        CHECK(a.mode == RelayMode::mirror);
        CHECK(a.departure_rad == doctest::Approx(a.incident_rad).epsilon(1e-15));
    }
    SUBCASE("off-axis against atan2") {
        const Vec2 ap{-3.0, 1.0}, user{2.0, -1.5};
        const auto a = compute_geometry_angles(bare(ap, {user}), 0);
        CHECK(a.incident_rad == doctest::Approx(heading(Vec2{0, 0} - ap)).epsilon(1e-12));
        CHECK(a.departure_rad == doctest::Approx(heading(user)).epsilon(1e-12));
        CHECK(a.mode == RelayMode::lens);
    }
    SUBCASE("rotated wall") {
        SceneGeometry s = bare({0, -2}, {{1, 3}});
        s.surface_normal = {0.0, 1.0};
        const auto a = compute_geometry_angles(s, 0);
        // tangent is (-1, 0); the user sits at atan(1/3) toward +x, i.e. negative tangent.
        CHECK(a.departure_rad == doctest::Approx(-std::atan(1.0 / 3.0)).epsilon(1e-12));
        CHECK(a.incident_rad == doctest::Approx(0.0));
    }
    CHECK_THROWS_AS(compute_geometry_angles(bare({-3, 0}, {{0, 2}}), 0), GeometryError);
}

TEST_CASE("mode follows the side of the plane") {
    for (double x : {-4.0, -0.5, 0.5, 4.0})
        for (double y : {-2.0, 0.0, 2.0}) {
            const auto s = bare({-3, 0.5}, {{x, y}});
            const auto a = compute_geometry_angles(s, 0);
            CHECK((a.mode == RelayMode::lens) == (x > 0));
        }
}

TEST_CASE("blockage") {
    auto s = bare({-3, 0}, {{3, 0}});
    CHECK_FALSE(blockage_check(s, s.ap, s.users[0]).blocked);
    s.blockers.push_back({{-1, -1}, {-1, 1}});
    const auto b = blockage_check(s, s.ap, s.surface_center);
    CHECK(b.blocked);
    CHECK(b.blocker == std::optional<std::size_t>{0});
    s.blockers = {{{-2, 0}, {-2, 3}}};
    CHECK(blockage_check(s, s.ap, s.surface_center).blocked);
    s.blockers = {{{-2, 0.001}, {-2, 3}}};
    CHECK_FALSE(blockage_check(s, s.ap, s.surface_center).blocked);
}

TEST_CASE("link budget arithmetic") {
    const LinkParameters p;
    const auto scene = bare({-3, 0}, {{3, 0}});
    const double fs = 20 * std::log10(4 * constants::pi * 6.0 * (24e9 - 30e6) / constants::c_light);
    const auto relay = link_budget(scene, 0, {-1, 0.8, 1.0}, p);
    CHECK(relay.path_loss_db == doctest::Approx(fs - 10 * std::log10(0.8)).epsilon(1e-12));
    CHECK(relay.path == PathType::lens);

    const auto direct = direct_link(scene, 0, p);
    const double fd = 20 * std::log10(4 * constants::pi * 6.0 * 24e9 / constants::c_light);
    CHECK(direct.path_loss_db == doctest::Approx(fd + 15.0).epsilon(1e-12));
    CHECK(direct.received_dbm - relay.received_dbm < -10.0);

    double prev = 1e9;
    for (double x = 1.0; x < 20.0; x += 1.0) {
        const auto e = link_budget(bare({-3, 0}, {{x, 0.3}}), 0, {-1, 0.8, 1.0}, p);
        CHECK(e.received_dbm <= prev);
        prev = e.received_dbm;
    }

    auto blocked = scene;
    blocked.blockers = {{{1, -1}, {1, 1}}};
    const auto b = link_budget(blocked, 0, {-1, 0.8, 1.0}, p);
    CHECK(b.path == PathType::blocked);
    CHECK(b.blocker.has_value());
    CHECK(b.path_loss_db == doctest::Approx(relay.path_loss_db + 20.0));
}

TEST_CASE("uplink reciprocity") {
    const LinkParameters p;
    const Vec2 ap{-2.5, 0.7}, user{3.1, -1.9};
    const auto down = link_budget(bare(ap, {user}), 0, {-1, 0.7, 1.0}, p);
    const auto up = link_budget(bare(user, {ap}), 0, {-1, 0.7, 1.0}, p);
    CHECK(std::abs(down.path_loss_db - up.path_loss_db) < 1e-9);
}

TEST_CASE("default two-room scene") {
    const auto scene = SceneGeometry::default_two_room();
    const LinkParameters p;
    const auto report = evaluate_links(scene, {-1, 0.8, 1.0}, {-1, 0.8, 1.0}, p);
    REQUIRE(report.entries.size() == scene.users.size());
    const auto direct = direct_link(scene, 0, p);
    CHECK(report.entries[0].received_dbm - direct.received_dbm >= 10.0);
    CHECK(report.entries[2].path == PathType::mirror);
    CHECK(direct_link(scene, 2, p).path == PathType::blocked);
}

TEST_CASE("beam search") {
    const auto layout = ArrayLayout::half_wave(20, 24e9);
    const LinkParameters p;

    SUBCASE("single user locks its departure angle") {
        const auto scene = bare({-3, 0}, {{3, 1.2}});
        const SearchConfig cfg{1, 2.0, 120.0, {{-1, 0.8, 0.8}}};
        const auto r = beam_search(scene, cfg, layout, p);
        CHECK(r.evaluations == 60);
        const double dep = rad2deg(compute_geometry_angles(scene, 0).departure_rad);
        CHECK(std::abs(r.users[0].departure_deg - dep) <= 2.0);
    }
    SUBCASE("split arms lock symmetric users") {
        const auto scene = bare({-3, 0}, {{3, 1.5}, {3, -1.5}});
        const SearchConfig one{1, 2.0, 120.0, {{-1, 0.8, 0.8}}};
        const SearchConfig two{2, 2.0, 120.0, {{-1, 0.5, 0.5}, {1, 0.25, 0.25}}};
        const auto r1 = beam_search(scene, one, layout, p);
        const auto r2 = beam_search(scene, two, layout, p);
        CHECK(2 * r2.evaluations == r1.evaluations);
        CHECK(r2.users[0].found);
        CHECK(r2.users[1].found);
        CHECK(r2.users[0].harmonic != r2.users[1].harmonic);
        CHECK(two.sweep_count() == static_cast<int>(std::ceil(120.0 / 2.0 / 2.0)));
    }
    SUBCASE("everything blocked") {
        auto scene = bare({-3, 0}, {{3, 1.0}});
        scene.blockers = {{{-1, -1}, {-1, 1}}};
        const SearchConfig cfg{1, 2.0, 120.0, {{-1, 0.8, 0.8}}};
        CHECK_THROWS_AS(beam_search(scene, cfg, layout, p), SearchFailed);
    }
}
