// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "mmwall/runner.hpp"

using namespace mmwall;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

struct Outcome {
    bool pass;
    std::string detail;
};

void criterion(int id, const std::string& name, double budget_s, const std::function<Outcome()>& fn,
               double prior_s = 0.0) {
    const auto t0 = Clock::now() - std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(prior_s));
    Outcome o{false, ""};
    try {
        o = fn();
    } catch (const std::exception& e) {
        o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    std::string timing = fmt::format("{:.2f} s", secs);
    if (budget_s > 0.0 && secs > budget_s) {
        o.pass = false;
        timing += fmt::format(" > {:.0f} s budget", budget_s);
    }
    if (!o.pass) ++failures;
    std::printf("%s criterion %2d: %s | %s | %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(),
                o.detail.c_str(), timing.c_str());
    std::fflush(stdout);
}

double cd_bessel(int h, double beta) {
    const double j = std::cyl_bessel_j(static_cast<double>(std::abs(h)), beta);
    return (h < 0 && std::abs(h) % 2 == 1) ? -j : j;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    const auto model = ElementModel::calibrated(24e9);
    const OptimizerContext ctx{model, 24e9, 30e6, {}};
    const auto layout = ArrayLayout::half_wave(20, 24e9);
    const auto grid = angle_grid(deg2rad(0.1));

    // Criteria 5, 7, 9 and 10 share the default single-beam optimization.
    const auto ga_t0 = Clock::now();
    const OptimizationResult single = optimize(BeamObjective::single(-1, Side::forward), GAConfig{}, ctx);
    const double single_s = std::chrono::duration<double>(Clock::now() - ga_t0).count();

    criterion(1, "L*C_gap = A w / (g c^2) for 100 random rectangular atoms", 1.0, [] {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(1e-5, 3e-3);
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
            MetaAtomGeometry g;
            g.shape = AtomShape::rectangular;
            g.radius_m = 0.0;
            g.l1_m = u(rng);
            g.l2_m = u(rng);
            g.width_m = u(rng);
            g.gap_m = u(rng);
            g.thickness_m = u(rng);
            const double c = 2.99792458e8;
            const double expected = g.l1_m * g.l2_m * g.width_m / g.gap_m / (c * c);
            worst = std::max(worst, std::abs(loop_inductance(g) * gap_capacitance(g) / expected - 1.0));
        }
        return Outcome{worst <= 1e-9, fmt::format("max relative error {:.2e} (tol 1e-9)", worst)};
    });

    criterion(2, "passivity and lossless unitarity over the 0.1 V grid", 10.0, [&] {
        const auto table = build_pattern_table(model, 24e9, 0.1);
        double max_power = 0.0;
        for (const auto& r : table.responses()) max_power = std::max(max_power, r.power());
        AtomCircuit lossless_atom;
        lossless_atom.r_loss_ohm = 0.0;
        const auto lossless = build_pattern_table(ElementModel::calibrated(24e9, lossless_atom), 24e9, 0.1);
        double worst_unit = 0.0;
        for (const auto& r : lossless.responses()) worst_unit = std::max(worst_unit, std::abs(r.power() - 1.0));
        return Outcome{max_power <= 1.0 + 1e-9 && worst_unit <= 1e-9,
                       fmt::format("{} points, max |T|^2+|R|^2 = {:.12f}, lossless deviation {:.2e}",
                                   table.size(), max_power, worst_unit)};
    });

    criterion(3, "transmission phase coverage of the calibrated table", 0.0, [&] {
        const auto table = build_pattern_table(model, 24e9, 0.1);
        double lo = 1e9, hi = -1e9;
        for (const auto& r : table.responses()) {
            lo = std::min(lo, std::arg(r.t));
            hi = std::max(hi, std::arg(r.t));
        }
        const double span = rad2deg(hi - lo);
        int ok = 0;
        double min_mag = 1.0;
        for (int k = 0; k < 64; ++k) {
            const double target = -constants::pi + 2 * constants::pi * k / 64;
            try {
                const auto v = phase_to_voltages(table, target, RelayMode::lens, deg2rad(5.0));
                const auto t = table.at(static_cast<int>(std::lround(v.u_e / 0.1)),
                                        static_cast<int>(std::lround(v.u_m / 0.1))).t;
                if (std::abs(t) >= 0.5 && std::abs(wrap_phase(std::arg(t) - target)) <= deg2rad(5.0)) ++ok;
                min_mag = std::min(min_mag, std::abs(t));
            } catch (const CoverageGapError&) {
            }
        }
        return Outcome{span >= 300.0 && ok == 64,
                       fmt::format("phase span {:.1f} deg, {}/64 targets, min |T| {:.3f}", span, ok, min_mag)};
    });

    criterion(4, "array factor equals brute-force summation", 5.0, [] {
        std::mt19937_64 rng(4);
        std::uniform_int_distribution<int> count(1, 64);
        std::uniform_real_distribution<double> unit(0.0, 1.0), ph(-constants::pi, constants::pi);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            ArrayLayout l = ArrayLayout::half_wave(count(rng), 24e9);
            l.pitch_m *= 0.5 + unit(rng);
            ExcitationVector e;
            for (int n = 0; n < l.count; ++n) e.coefficients.push_back(std::polar(unit(rng), ph(rng)));
            const double th = ph(rng) / 2;
            Complex ref = 0.0;
            for (int n = 0; n < l.count; ++n)
                ref += e.coefficients[static_cast<std::size_t>(n)] *
                       std::exp(Complex(0.0, l.wavenumber() * n * l.pitch_m * std::sin(th)));
            ref /= static_cast<double>(l.count);
            worst = std::max(worst, std::abs(array_factor(l, e, th) - ref) / std::abs(ref));
        }
        return Outcome{worst <= 1e-12, fmt::format("max relative error {:.2e} (tol 1e-12)", worst)};
    });

    criterion(5, "steering accuracy within 1 deg for |theta| <= 45", 0.0, [&] {
        double inner = 0.0, outer = 0.0;
        for (int deg = -80; deg <= 80; deg += 1) {
            const SteeringRequest req{-1, deg2rad(deg), std::nullopt, 0.0};
            const auto spectra = per_element_spectra(synthesize_surface(single.best, req, layout, ctx), model, 24e9);
            const double peak = rad2deg(find_peak(evaluate_pattern(layout, spectra.at(-1, Side::forward), grid, -1)).angle_rad);
            double& worst = std::abs(deg) <= 45 ? inner : outer;
            worst = std::max(worst, std::abs(peak - deg));
        }
        return Outcome{inner <= 1.0, fmt::format("max error {:.4f} deg within 45, {:.4f} deg out to 80", inner, outer)};
    });

    criterion(6, "Bessel and serrodyne harmonic oracles", 5.0, [] {
        double worst = 0.0;
        for (double beta : {0.5, 1.0, 2.4}) {
            std::vector<Complex> x(256);
            for (int s = 0; s < 256; ++s) x[static_cast<std::size_t>(s)] = std::exp(Complex(0.0, beta * std::sin(2 * constants::pi * s / 256.0)));
            const auto c = harmonic_coefficients(x, 8);
            for (int h = -6; h <= 6; ++h)
                worst = std::max(worst, std::abs(c[static_cast<std::size_t>(h + 8)] - cd_bessel(h, beta)));
        }
        std::vector<Complex> saw(256);
        for (int s = 0; s < 256; ++s) saw[static_cast<std::size_t>(s)] = std::exp(Complex(0.0, -2 * constants::pi * s / 256.0));
        const double p = std::norm(harmonic_coefficients(saw, 8)[7]);
        return Outcome{worst < 1e-9 && p >= 0.999,
                       fmt::format("max |c_h - J_h| {:.2e}, serrodyne |c_-1|^2 = {:.6f}", worst, p)};
    });

    criterion(7, "single-beam GA efficiency >= 0.75 with monotone trace", 60.0, [&] {
        bool monotone = true;
        for (std::size_t i = 1; i < single.history.size(); ++i) monotone &= single.history[i] >= single.history[i - 1];
        const double eff = evaluate_objective(single.best, BeamObjective::single(-1, Side::forward), ctx).fitness;
        return Outcome{eff >= 0.75 && monotone && single.history.size() == 201,
                       fmt::format("h=-1 forward efficiency {:.4f}, {} generations, monotone {}", eff,
                                   single.history.size() - 1, monotone ? "yes" : "no")};
    }, single_s);

    auto split = [](Side side) {
        auto o = BeamObjective::double_beam(side, 2.0, 1.0);
        o.aggregation = Aggregation::proportional_split;
        return o;
    };
    OptimizationResult lens_double;
    criterion(8, "double-beam GA: lens >= 0.60, mirror >= 0.55, (2,1) split favours -1", 120.0, [&] {
        lens_double = optimize(split(Side::forward), GAConfig{}, ctx);
        const auto mirror = optimize(split(Side::backward), GAConfig{}, ctx);
        const auto sl = evaluate_objective(lens_double.best, split(Side::forward), ctx).spectrum;
        const auto sm = evaluate_objective(mirror.best, split(Side::backward), ctx).spectrum;
        const double lm = sl.power(-1, Side::forward), lp = sl.power(1, Side::forward);
        const double mm = sm.power(-1, Side::backward), mp = sm.power(1, Side::backward);
        const bool pass = lm + lp >= 0.60 && mm + mp >= 0.55 && lm > lp && mm > mp;
        return Outcome{pass, fmt::format("lens {:.4f}+{:.4f}={:.4f}, mirror {:.4f}+{:.4f}={:.4f}", lm, lp,
                                         lm + lp, mm, mp, mm + mp)};
    });

    criterion(9, "multi-armed steering: -1 at +20 deg, +1 at its consequence angle", 0.0, [&] {
        const SteeringRequest req{-1, deg2rad(20.0), std::nullopt, 0.0};
        const auto spectra = per_element_spectra(synthesize_surface(lens_double.best, req, layout, ctx), model, 24e9);
        const double minus = rad2deg(find_peak(evaluate_pattern(layout, spectra.at(-1, Side::forward), grid, -1)).angle_rad);
        const double plus = rad2deg(find_peak(evaluate_pattern(layout, spectra.at(1, Side::forward), grid, 1)).angle_rad);
        const double predicted = rad2deg(consequence_angle(req, 1, layout));
        const bool pass = std::abs(minus - 20.0) <= 1.0 && std::abs(plus - predicted) <= 1.0 &&
                          std::abs(predicted + 20.0) <= 1.0;
        return Outcome{pass, fmt::format("h=-1 peak {:.3f} deg, h=+1 peak {:.3f} deg (predicted {:.3f})", minus,
                                         plus, predicted)};
    });

    criterion(10, "link gain, split-2 sweep count, run determinism", 0.0, [&] {
        const auto scene = SceneGeometry::default_two_room();
        const LinkParameters params;
        const double eff = evaluate_objective(single.best, BeamObjective::single(-1, Side::forward), ctx).fitness;
        const auto relay = link_budget(scene, 0, {-1, eff, 1.0}, params);
        const auto direct = direct_link(scene, 0, params);
        const double gain = relay.received_dbm - direct.received_dbm;

        const SearchConfig one{1, 2.0, 120.0, {{-1, eff, eff}}};
        const SearchConfig two{2, 2.0, 120.0, {{-1, 0.5, 0.5}, {1, 0.25, 0.25}}};
        const auto r1 = beam_search(scene, one, layout, params);
        const auto r2 = beam_search(scene, two, layout, params);

        const auto root = std::filesystem::temp_directory_path() / "mmwall_acceptance";
        std::filesystem::remove_all(root);
        bool identical = true;
        std::string kinds;
        for (const char* kind : {"pattern-table", "single-beam", "double-beam-mirror"}) {
            auto cfg = parse_config(fmt::format("[scenario]\nkind = {}\nseed = 20220301\n[optimizer]\n", kind), kind);
            for (const char* run : {"a", "b"}) {
                cfg.output_dir = root / kind / run;
                run_scenario(cfg);
            }
            const bool same = slurp(root / kind / "a" / "results.csv") == slurp(root / kind / "b" / "results.csv");
            identical &= same;
            kinds += fmt::format(" {}={}", kind, same ? "same" : "DIFF");
        }
        std::filesystem::remove_all(root);

        const bool pass = gain >= 10.0 && 2 * r2.evaluations == r1.evaluations && identical;
        return Outcome{pass, fmt::format("relay beats wall by {:.2f} dB, sweeps {} vs {}, reruns:{}", gain,
                                         r1.evaluations, r2.evaluations, kinds)};
    });

    std::printf("%s: %d criteria failed\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
