// Serial reference vs OpenMP kernels: wall time per call and a bitwise check
// that both paths agree.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>

#include <fmt/format.h>
#include <omp.h>

#include "mmwall/waveform_optimizer.hpp"

using namespace mmwall;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn();  // warm-up
    const auto t0 = Clock::now();
    for (int i = 0; i < reps; ++i) fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count() / reps;
}

template <typename T>
bool same_bits(const std::vector<T>& a, const std::vector<T>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
    fmt::print("{:<28} {:>10.3f} {:>10.3f} {:>8.2f}x  {}\n", name, serial_ms, parallel_ms,
               serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::stoi(argv[1]) : 5;
    const auto model = ElementModel::calibrated(24e9);
    fmt::print("threads: {}\n", omp_get_max_threads());
    fmt::print("{:<28} {:>10} {:>10} {:>9}\n", "kernel", "serial ms", "omp ms", "speedup");
    bool ok = true;

    {
        HuygensPatternTable s(24e9, 0, 0, 1), p(24e9, 0, 0, 1);
        const double ts = time_ms([&] { s = build_pattern_table(model, 24e9, 0.05, Execution::serial); }, reps);
        const double tp = time_ms([&] { p = build_pattern_table(model, 24e9, 0.05, Execution::parallel); }, reps);
        const bool same = same_bits(s.responses(), p.responses());
        ok &= same;
        report("pattern table (0.05 V)", ts, tp, same);
    }

    const auto layout = ArrayLayout::half_wave(64, 24e9);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> phase(-constants::pi, constants::pi);
    std::vector<double> phases(64);
    for (double& x : phases) x = phase(rng);
    const auto exc = phased_excitation(phases);
    const auto grid = angle_grid(deg2rad(0.01));
    {
        BeamPattern s, p;
        const double ts = time_ms([&] { s = evaluate_pattern(layout, exc, grid, 0, Execution::serial); }, reps);
        const double tp = time_ms([&] { p = evaluate_pattern(layout, exc, grid, 0, Execution::parallel); }, reps);
        const bool same = same_bits(s.field, p.field);
        ok &= same;
        report("array factor (N=64, 0.01 deg)", ts, tp, same);
    }

    const OptimizerContext ctx{model, 24e9, 30e6, {}};
    VoltageWaveform w;
    w.cos_coeffs = {1.0, 0.3, 0.0, 0.0};
    w.sin_coeffs = {0.0, 0.2, 0.1, 0.0};
    w.offset_v = 6.0;
    w.amplitude_v = 5.0;
    const auto genome = WaveformGenome::from_waveforms(w, w);
    const auto drives = synthesize_surface(genome, {-1, deg2rad(20.0), std::nullopt, 0.0},
                                           ArrayLayout::half_wave(64, 24e9), ctx);
    {
        HarmonicExcitations s, p;
        const double ts = time_ms([&] { s = per_element_spectra(drives, model, 24e9, {}, Execution::serial); }, reps);
        const double tp = time_ms([&] { p = per_element_spectra(drives, model, 24e9, {}, Execution::parallel); }, reps);
        bool same = true;
        for (std::size_t i = 0; i < s.forward.size(); ++i)
            same &= same_bits(s.forward[i].coefficients, p.forward[i].coefficients) &&
                    same_bits(s.backward[i].coefficients, p.backward[i].coefficients);
        ok &= same;
        report("element spectra (N=64)", ts, tp, same);
    }

    {
        GAConfig cfg;
        cfg.generations = 10;
        const auto objective = BeamObjective::single(-1, Side::forward);
        OptimizationResult s, p;
        const int ga_reps = std::max(1, reps / 2);
        const double ts = time_ms([&] { s = optimize(objective, cfg, ctx, {}, Execution::serial); }, ga_reps);
        const double tp = time_ms([&] { p = optimize(objective, cfg, ctx, {}, Execution::parallel); }, ga_reps);
        const bool same = s.best == p.best && same_bits(s.history, p.history);
        ok &= same;
        report("GA (64 x 10 generations)", ts, tp, same);
    }
    return ok ? 0 : 1;
}
