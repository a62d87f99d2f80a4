#include "mmwall/link_scenario.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace mmwall {

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
    const double v = cross(b - a, c - a);
    const double scale = norm(b - a) * norm(c - a);
    if (std::abs(v) <= 1e-12 * scale) return 0;
    return v > 0.0 ? 1 : -1;
}

bool segments_touch(Vec2 p, Vec2 q, Vec2 a, Vec2 b) {
    const int o1 = orientation(p, q, a);
    const int o2 = orientation(p, q, b);
    const int o3 = orientation(a, b, p);
    const int o4 = orientation(a, b, q);
    if (o1 == 0 && o2 == 0) {
        // Collinear: overlap of the projections on p->q.
        const Vec2 dir = q - p;
        const double len2 = dot(dir, dir);
        if (len2 == 0.0) return norm(a - p) == 0.0 || norm(b - p) == 0.0;
        double ta = dot(a - p, dir) / len2;
        double tb = dot(b - p, dir) / len2;
        if (ta > tb) std::swap(ta, tb);
        return tb >= 0.0 && ta <= 1.0;
    }
    return o1 * o2 <= 0 && o3 * o4 <= 0;
}

double clamp_distance(double d, const LinkParameters& params, bool& clamped) {
    if (d < params.min_distance_m) {
        clamped = true;
        return params.min_distance_m;
    }
    return d;
}

double safe_db(double linear) { return 10.0 * std::log10(std::max(linear, 1e-30)); }

double asin_clamped(double u) { return std::asin(std::clamp(u, -1.0, 1.0)); }

}  // namespace

SceneGeometry SceneGeometry::default_two_room() {
    SceneGeometry s;
    s.users = {{3.0, 0.0}, {2.6, 1.5}, {-2.5, -2.5}};
    s.blockers = {{{-2.9, -1.6}, {-2.4, -1.6}}};
    return s;
}

void SceneGeometry::validate() const {
    if (std::abs(norm(surface_normal) - 1.0) > 1e-9)
        throw GeometryError("surface normal must have unit length");
    if (!(wall_attenuation_db >= 0.0)) throw GeometryError("wall attenuation must be >= 0 dB");
    auto distinct = [](Vec2 a, Vec2 b, const std::string& what) {
        if (norm(a - b) <= 1e-12) throw GeometryError("coincident points: " + what);
    };
    distinct(ap, surface_center, "AP and surface center");
    for (std::size_t i = 0; i < users.size(); ++i) {
        distinct(users[i], ap, fmt::format("user {} and AP", i));
        distinct(users[i], surface_center, fmt::format("user {} and surface center", i));
    }
}

GeometryAngles compute_geometry_angles(const SceneGeometry& scene, std::size_t user) {
    scene.validate();
    if (user >= scene.users.size()) throw RangeError(fmt::format("no user {}", user));
    const Vec2 u = scene.users[user];
    const double eps = 1e-9;
    if (std::abs(scene.side_of(scene.ap)) < eps)
        throw GeometryError("AP lies on the surface plane");
    if (std::abs(scene.side_of(u)) < eps)
        throw GeometryError(fmt::format("user {} lies on the surface plane", user));

    const Vec2 t = scene.tangent();
    const Vec2 to_ap = scene.ap - scene.surface_center;
    const Vec2 to_user = u - scene.surface_center;
    GeometryAngles g;
    g.incident_rad = std::asin(std::clamp(-dot(to_ap, t) / norm(to_ap), -1.0, 1.0));
    g.departure_rad = std::asin(std::clamp(dot(to_user, t) / norm(to_user), -1.0, 1.0));
    g.mode = scene.side_of(scene.ap) * scene.side_of(u) < 0.0 ? RelayMode::lens
                                                              : RelayMode::mirror;
    return g;
}

Blockage blockage_check(const SceneGeometry& scene, Vec2 from, Vec2 to) {
    for (std::size_t i = 0; i < scene.blockers.size(); ++i)
        if (segments_touch(from, to, scene.blockers[i].a, scene.blockers[i].b))
            return {true, i};
    return {};
}

double friis_loss_db(double distance_m, double f_hz) {
    if (!(distance_m > 0.0) || !(f_hz > 0.0))
        throw DomainError("Friis loss needs positive distance and frequency");
    return 20.0 * std::log10(4.0 * constants::pi * distance_m * f_hz / constants::c_light);
}

const char* to_string(PathType p) {
    switch (p) {
        case PathType::direct: return "direct";
        case PathType::lens: return "lens";
        case PathType::mirror: return "mirror";
        case PathType::blocked: return "blocked";
    }
    return "?";
}

LinkEntry direct_link(const SceneGeometry& scene, std::size_t user,
                      const LinkParameters& params) {
    const auto angles = compute_geometry_angles(scene, user);
    const Vec2 u = scene.users[user];
    LinkEntry e;
    e.user = user;
    e.path = PathType::direct;
    e.harmonic = 0;
    e.incident_deg = rad2deg(angles.incident_rad);
    e.departure_deg = rad2deg(angles.departure_rad);
    const double d = clamp_distance(norm(u - scene.ap), params, e.distance_clamped);
    e.path_loss_db = friis_loss_db(d, params.carrier_hz);
    if (scene.side_of(scene.ap) * scene.side_of(u) < 0.0) e.path_loss_db += scene.wall_attenuation_db;
    const auto b = blockage_check(scene, scene.ap, u);
    if (b.blocked) {
        e.path_loss_db += params.blockage_db;
        e.path = PathType::blocked;
        e.blocker = b.blocker;
    }
    e.received_dbm = params.tx_power_dbm + params.ap_gain_dbi + params.user_gain_dbi -
                     e.path_loss_db;
    return e;
}

LinkEntry link_budget(const SceneGeometry& scene, std::size_t user, const SurfaceLink& surface,
                      const LinkParameters& params) {
    if (!(surface.efficiency > 0.0) || surface.efficiency > 1.0 + 1e-9)
        throw DomainError("surface efficiency must lie in (0, 1]");
    const auto angles = compute_geometry_angles(scene, user);
    const Vec2 u = scene.users[user];
    LinkEntry e;
    e.user = user;
    e.path = angles.mode == RelayMode::lens ? PathType::lens : PathType::mirror;
    e.harmonic = surface.harmonic;
    e.incident_deg = rad2deg(angles.incident_rad);
    e.departure_deg = rad2deg(angles.departure_rad);
    e.steering_deg = rad2deg(asin_clamped(angles.steering_sine()));

    const double d1 = clamp_distance(norm(scene.surface_center - scene.ap), params,
                                     e.distance_clamped);
    const double d2 = clamp_distance(norm(u - scene.surface_center), params, e.distance_clamped);
    const double f = params.carrier_hz + surface.harmonic * params.modulation_hz;
    e.path_loss_db = friis_loss_db(d1 + d2, f) - safe_db(surface.efficiency) -
                     safe_db(surface.pattern_gain);
    for (const auto& hop : {blockage_check(scene, scene.ap, scene.surface_center),
                            blockage_check(scene, scene.surface_center, u)}) {
        if (!hop.blocked) continue;
        e.path_loss_db += params.blockage_db;
        e.path = PathType::blocked;
        if (!e.blocker) e.blocker = hop.blocker;
    }
    e.received_dbm = params.tx_power_dbm + params.ap_gain_dbi + params.user_gain_dbi -
                     e.path_loss_db;
    return e;
}

LinkReport evaluate_links(const SceneGeometry& scene, const SurfaceLink& lens,
                          const SurfaceLink& mirror, const LinkParameters& params) {
    LinkReport report;
    for (std::size_t i = 0; i < scene.users.size(); ++i) {
        LinkEntry best = direct_link(scene, i, params);
        const auto mode = compute_geometry_angles(scene, i).mode;
        const SurfaceLink& s = mode == RelayMode::lens ? lens : mirror;
        if (s.efficiency > 0.0) {
            LinkEntry relay = link_budget(scene, i, s, params);
            if (relay.received_dbm > best.received_dbm) best = relay;
        }
        report.entries.push_back(best);
    }
    return report;
}

void write_link_report_csv(std::ostream& os, const LinkReport& report) {
    os << "user,mode,path_db,angle_deg,harmonic,received_dbm\n";
    auto z = [](double v) { return v == 0.0 ? 0.0 : v; };
    for (const auto& e : report.entries)
        os << fmt::format("{},{},{:.6f},{:.6f},{},{:.6f}\n", e.user, to_string(e.path),
                          z(e.path_loss_db), z(e.departure_deg), e.harmonic, z(e.received_dbm));
}

// ---------------------------------------------------------------------------

int SearchConfig::sweep_count() const {
    const double span = split == 2 ? 0.5 * range_deg : range_deg;
    return static_cast<int>(std::ceil(span / step_deg - 1e-9));
}

void SearchConfig::validate() const {
    if (split != 1 && split != 2) throw ConfigurationError("beam split must be 1 or 2");
    if (!(step_deg > 0.0)) throw ConfigurationError("sweep step must be positive");
    if (!(range_deg > 0.0 && range_deg <= 180.0))
        throw ConfigurationError("sweep range must lie in (0, 180] degrees");
    if (arms.size() < static_cast<std::size_t>(split))
        throw ConfigurationError(fmt::format("split {} needs {} arm efficiencies", split, split));
}

SearchResult beam_search(const SceneGeometry& scene, const SearchConfig& config,
                         const ArrayLayout& layout, const LinkParameters& params) {
    config.validate();
    layout.validate();
    scene.validate();

    struct UserGeometry {
        GeometryAngles angles;
        bool outage = false;
    };
    std::vector<UserGeometry> geo;
    for (std::size_t i = 0; i < scene.users.size(); ++i) {
        UserGeometry g{compute_geometry_angles(scene, i), false};
        g.outage = blockage_check(scene, scene.ap, scene.surface_center).blocked ||
                   blockage_check(scene, scene.surface_center, scene.users[i]).blocked;
        geo.push_back(g);
    }

    SearchResult result;
    for (std::size_t i = 0; i < scene.users.size(); ++i) result.users.push_back(UserBest{i});

    const int count = config.sweep_count();
    const double half = 0.5 * config.range_deg;
    for (int k = 0; k < count; ++k) {
        struct Arm {
            const ArmEfficiency* eff;
            double sine;
        };
        std::vector<Arm> arms;
        if (config.split == 1) {
            const double theta = -half + (k + 0.5) * config.range_deg / count;
            arms.push_back({&config.arms[0], std::sin(deg2rad(theta))});
        } else {
            const double theta = (k + 0.5) * half / count;
            arms.push_back({&config.arms[0], std::sin(deg2rad(theta))});
            arms.push_back({&config.arms[1], -std::sin(deg2rad(theta))});
        }
        ++result.evaluations;

        for (const auto& arm : arms) {
            const auto exc = phased_excitation(progressive_phases(layout, arm.sine));
            for (std::size_t i = 0; i < geo.size(); ++i) {
                if (geo[i].outage) continue;
                const auto& a = geo[i].angles;
                const double eff = a.mode == RelayMode::lens ? arm.eff->lens : arm.eff->mirror;
                if (!(eff > 0.0)) continue;
                const double offset = std::sin(a.departure_rad) - std::sin(a.incident_rad);
                const double gain = std::norm(array_factor_at_sine(layout, exc, offset));
                const auto entry =
                    link_budget(scene, i, {arm.eff->harmonic, eff, gain}, params);
                auto& best = result.users[i];
                if (entry.received_dbm > best.received_dbm) {
                    best.received_dbm = entry.received_dbm;
                    best.steering_deg = rad2deg(asin_clamped(arm.sine));
                    best.departure_deg =
                        rad2deg(asin_clamped(std::sin(a.incident_rad) + arm.sine));
                    best.harmonic = arm.eff->harmonic;
                }
            }
        }
    }

    bool any = false;
    for (auto& u : result.users) {
        u.found = u.received_dbm >= params.sensitivity_dbm;
        any = any || u.found;
    }
    if (!any)
        throw SearchFailed(fmt::format("no user above the {} dBm sensitivity threshold",
                                       params.sensitivity_dbm),
                           result);
    return result;
}

}  // namespace mmwall
