#include <doctest.h>

#include <limits>
#include <random>

#include "mmwall/sheet_response.hpp"
#include "oracles.hpp"

using namespace mmwall;

namespace {

const ElementModel& model() {
    static const ElementModel m = ElementModel::calibrated(24e9);
    return m;
}

}  // namespace

TEST_CASE("sheet admittance limits") {
    const auto cv = model().electric.values();
    const double c_var = varactor_capacitance(model().electric.varactor, 6.0);
    CHECK(std::abs(sheet_admittance(cv, c_var, 1e9)) < 0.05);

    const double f0 = 24e9;
    const Complex y0 = sheet_admittance(cv, c_var, f0);
    CHECK(y0.real() == doctest::Approx(constants::eta0 / cv.r_loss_ohm).epsilon(1e-6));
    CHECK(std::abs(y0.imag()) < 1e-6 * std::abs(y0));

    CircuitValues lossless = cv;
    lossless.r_loss_ohm = 0.0;
    const double c_tot = total_capacitance(cv.gap_capacitance_f, c_var);
    const double f_exact = resonant_frequency(cv.inductance_h, c_tot);
    CHECK_THROWS_AS(sheet_admittance(lossless, c_var, f_exact), DivergenceError);
}

TEST_CASE("admittance matches RLC oracle and Im y changes sign at f0") {
    const auto cv = model().electric.values();
    const double c_var = varactor_capacitance(model().electric.varactor, 6.0);
    const double c_tot = total_capacitance(cv.gap_capacitance_f, c_var);
    double prev_im = 0.0;
    double crossing = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double f = 20e9 + i * 2e7;
        const auto y = sheet_admittance(cv, c_var, f);
        const auto ref = oracle::rlc_admittance(constants::eta0, cv.r_loss_ohm, cv.inductance_h, c_tot, f);
        CHECK(std::abs(y - ref) <= 1e-12 * std::abs(ref));
        if (i > 0 && prev_im * y.imag() < 0.0) crossing = f;
        prev_im = y.imag();
    }
    CHECK(crossing > 24e9 - 1e6);
    CHECK(crossing < 24e9 + 2e7 + 1e6);
}

TEST_CASE("sheet transition limits and oracle") {
    auto none = sheet_transition(0.0, 0.0, 1.0);
    CHECK(std::abs(none.t - 1.0) < 1e-15);
    CHECK(std::abs(none.r) < 1e-15);

    const Complex b{0.7, -2.3};
    CHECK(std::abs(sheet_transition(b, b, 1.0).r) == 0.0);

    auto pec = sheet_transition(1e12, 0.0, 1.0);
    CHECK(std::abs(pec.t) < 1e-10);
    CHECK(std::abs(pec.r + 1.0) < 1e-10);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const Complex y{std::abs(n(rng)), n(rng)}, z{std::abs(n(rng)), n(rng)};
        oracle::cd t, r;
        oracle::sheet(y, z, t, r);
        const auto s = sheet_transition(y, z, 1.0);
        CHECK(std::abs(s.t - t) < 1e-12 * (1 + std::abs(t)));
        CHECK(std::abs(s.r - r) < 1e-12 * (1 + std::abs(r)));
        const auto swapped = sheet_transition(z, y, 1.0);
        CHECK(std::abs(swapped.t - s.t) < 1e-14);
        CHECK(std::abs(swapped.r + s.r) < 1e-14);
    }
}

TEST_CASE("shorted branches take the limiting form") {
    const double inf = std::numeric_limits<double>::infinity();
    const Complex z{0.0, 1.7};
    const auto lim = sheet_transition({inf, 0.0}, z, 1.0);
    const auto near = sheet_transition({1e14, 0.0}, z, 1.0);
    CHECK(std::abs(lim.t - near.t) < 1e-10);
    CHECK(std::abs(lim.r - near.r) < 1e-10);
    CHECK(lim.power() == doctest::Approx(1.0).epsilon(1e-14));
    const auto mirrored = sheet_transition(z, {inf, 0.0}, 1.0);
    CHECK(mirrored.t == lim.t);
    CHECK(mirrored.r == -lim.r);
    const auto both = sheet_transition({inf, 0.0}, {inf, 0.0}, 1.0);
    CHECK(both.t == Complex{-1.0, 0.0});
    CHECK(both.r == Complex{0.0, 0.0});
}

TEST_CASE("passivity and lossless unitarity over the default grid") {
    const auto table = build_pattern_table(model(), 24e9, 0.1);
    CHECK(table.axis_size() == 121);
    for (const auto& r : table.responses()) CHECK(r.power() <= 1.0 + 1e-9);

    AtomCircuit lossless_atom;
    lossless_atom.r_loss_ohm = 0.0;
    const auto lossless = ElementModel::calibrated(24e9, lossless_atom);
    for (double f : {23e9, 24.1e9, 25.3e9}) {
        const auto t = build_pattern_table(lossless, f, 0.25);
        for (const auto& r : t.responses()) CHECK(std::abs(r.power() - 1.0) < 1e-9);
    }
}

TEST_CASE("pattern table structure") {
    const auto table = build_pattern_table(model(), 24e9, 0.2);
    const int n = table.axis_size();
    CHECK(table.voltage(0) == 0.0);
    CHECK(table.voltage(n - 1) == doctest::Approx(12.0));
    for (int i = 0; i < n; ++i) {
        CHECK(std::abs(table.at(i, i).r) < 1e-12);
        for (int j = 0; j < n; ++j) {
            CHECK(std::abs(table.at(i, j).t - table.at(j, i).t) < 1e-14);
            CHECK(std::abs(table.at(i, j).r + table.at(j, i).r) < 1e-14);
            if (j + 1 < n) CHECK(std::abs(table.at(i, j + 1).t - table.at(i, j).t) < 0.5);
        }
    }
    const auto single = build_pattern_table(model(), 24e9, 5.0, 5.0, 0.1);
    CHECK(single.size() == 1);
    CHECK(std::abs(single.at(0, 0).t - element_response(model(), {5.0, 5.0}, 24e9).t) < 1e-15);
}

TEST_CASE("serial and parallel tables agree bitwise") {
    const auto s = build_pattern_table(model(), 24e9, 0.1, Execution::serial);
    const auto p = build_pattern_table(model(), 24e9, 0.1, Execution::parallel);
    REQUIRE(s.size() == p.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        CHECK(s.responses()[i].t == p.responses()[i].t);
        CHECK(s.responses()[i].r == p.responses()[i].r);
    }
}

TEST_CASE("phase to voltages") {
    const auto table = build_pattern_table(model(), 24e9, 0.1);

    int best_i = 0, best_j = 0;
    for (int i = 0; i < table.axis_size(); ++i)
        for (int j = 0; j < table.axis_size(); ++j)
            if (std::abs(table.at(i, j).t) > std::abs(table.at(best_i, best_j).t)) {
                best_i = i;
                best_j = j;
            }
    const auto self = phase_to_voltages(table, std::arg(table.at(best_i, best_j).t), RelayMode::lens);
    CHECK(self.u_e == table.voltage(best_i));
    CHECK(self.u_m == table.voltage(best_j));

    double lo = 1e9, hi = -1e9;
    for (const auto& r : table.responses()) {
        lo = std::min(lo, std::arg(r.t));
        hi = std::max(hi, std::arg(r.t));
    }
    CHECK(rad2deg(hi - lo) >= 300.0);

    for (int k = 0; k < 64; ++k) {
        const double target = -constants::pi + 2 * constants::pi * k / 64;
        const auto v = phase_to_voltages(table, target, RelayMode::lens);
        const auto r = element_response(model(), v, 24e9);
        CHECK(std::abs(r.t) >= 0.5);
        CHECK(std::abs(wrap_phase(std::arg(r.t) - target)) <= kDefaultPhaseToleranceRad + 1e-12);
    }

    const auto narrow = build_pattern_table(model(), 24e9, 0.0, 0.3, 0.1);
    try {
        phase_to_voltages(narrow, 0.0, RelayMode::lens);
        FAIL("expected a coverage gap");
    } catch (const CoverageGapError& e) {
        CHECK(std::isfinite(e.best_phase_rad));
    }
}
