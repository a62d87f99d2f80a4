#include "mmwall/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "mmwall/plot.hpp"

namespace mmwall {

std::string manifest_header(const ScenarioConfig& cfg) {
    return fmt::format("# mmwall {} kind={} config_hash=fnv1a64:{:016x} seed={}", kToolVersion,
                       to_string(cfg.kind), cfg.hash(), cfg.ga.seed);
}

std::filesystem::path resolve_output_dir(const ScenarioConfig& cfg) {
    if (const char* env = std::getenv("MMWALL_OUTPUT_DIR"); env && *env) return env;
    return cfg.output_dir;
}

ElementModel scenario_model(const ScenarioConfig& cfg) {
    if (cfg.calibrate) return ElementModel::calibrated(cfg.carrier_hz, cfg.atom, cfg.coupling);
    return {cfg.atom, cfg.atom, cfg.coupling};
}

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (v == 0.0) v = 0.0;
    return fmt::format("{:.10g}", v);
}

double to_db(double p) { return p > 0.0 ? 10.0 * std::log10(p) : -300.0; }

class Outputs {
public:
    Outputs(const ScenarioConfig& cfg, RunSummary& summary)
        : header_(manifest_header(cfg)), summary_(summary) {
        summary_.output_dir = resolve_output_dir(cfg);
        std::error_code ec;
        std::filesystem::create_directories(summary_.output_dir, ec);
        if (ec)
            throw ConfigurationError(fmt::format("cannot create output directory '{}': {}",
                                                 summary_.output_dir.string(), ec.message()));
    }

    const std::string& header() const { return header_; }

    // Opens a file for writing; CSV-style outputs get the manifest line first.
    std::ofstream open(const std::string& name, bool with_header = true) {
        const auto path = summary_.output_dir / name;
        std::ofstream os(path, std::ios::binary);
        if (!os) throw ConfigurationError(fmt::format("cannot write '{}'", path.string()));
        if (with_header) os << header_ << '\n';
        summary_.files.push_back(name);
        return os;
    }

    void svg(const Plot& plot) {
        auto os = open("pattern.svg", false);
        write_svg(os, plot, header_.substr(2));
    }

private:
    std::string header_;
    RunSummary& summary_;
};

OptimizerContext make_context(const ScenarioConfig& cfg) {
    return {scenario_model(cfg), cfg.carrier_hz, cfg.modulation_hz, cfg.modulation};
}

GAConfig ga_config(const ScenarioConfig& cfg) { return cfg.ga; }

// Sinusoidal electric drive across the full bias window, magnetic line a half
// period behind it.
WaveformGenome mirror_start(const ScenarioConfig& cfg, const OptimizerContext& ctx) {
    VoltageWaveform w;
    const int order = cfg.ga.fourier_order;
    w.cos_coeffs.assign(static_cast<std::size_t>(order), 0.0);
    w.sin_coeffs.assign(static_cast<std::size_t>(order), 0.0);
    w.cos_coeffs[0] = 1.0;
    w.offset_v = 0.5 * (ctx.model.v_min() + ctx.model.v_max());
    w.amplitude_v = 0.5 * (ctx.model.v_max() - ctx.model.v_min());
    w.modulation_hz = ctx.modulation_hz;
    return mirror_seed(WaveformGenome::from_waveforms(w, w));
}

struct Optimized {
    BeamObjective objective;
    WaveformGenome genome;
    double fitness = 0.0;
    std::vector<double> history;
};

Optimized obtain_genome(const ScenarioConfig& cfg, const BeamObjective& objective,
                        const OptimizerContext& ctx, const std::vector<WaveformGenome>& seeds,
                        Execution exec) {
    Optimized out;
    out.objective = objective;
    if (cfg.genome_file) {
        std::ifstream in(*cfg.genome_file, std::ios::binary);
        if (!in)
            throw ConfigurationError(
                fmt::format("cannot open genome file '{}'", cfg.genome_file->string()));
        out.genome = load_genome(in);
        out.fitness = evaluate_objective(out.genome, objective, ctx).fitness;
        return out;
    }
    auto result = optimize(objective, ga_config(cfg), ctx, seeds, exec);
    out.genome = std::move(result.best);
    out.fitness = result.best_fitness;
    out.history = std::move(result.history);
    return out;
}

void write_genome_outputs(Outputs& files, const ScenarioConfig& cfg, const Optimized& opt,
                          const std::string& stem) {
    {
        auto os = files.open(stem + ".json", false);
        save_genome(os, opt.genome, cfg.ga, opt.objective, opt.fitness, files.header().substr(2));
    }
    if (!opt.history.empty()) {
        auto os = files.open(stem + "_history.csv");
        os << "generation,best_fitness\n";
        for (std::size_t g = 0; g < opt.history.size(); ++g)
            os << g << ',' << num(opt.history[g]) << '\n';
    }
}

BeamObjective objective_for(const ScenarioConfig& cfg, ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::double_beam_lens: {
            auto o = BeamObjective::double_beam(Side::forward, cfg.weight_minus, cfg.weight_plus);
            o.aggregation = Aggregation::proportional_split;
            return o;
        }
        case ScenarioKind::double_beam_mirror: {
            auto o = BeamObjective::double_beam(Side::backward, cfg.weight_minus, cfg.weight_plus);
            o.aggregation = Aggregation::proportional_split;
            return o;
        }
        default:
            return BeamObjective::single(-1, Side::forward);
    }
}

// ---------------------------------------------------------------------------

void run_pattern_table(const ScenarioConfig& cfg, Outputs& files, RunSummary& summary,
                       Execution exec) {
    const auto model = scenario_model(cfg);
    const auto table = build_pattern_table(model, cfg.carrier_hz, cfg.resolution_v, exec);
    {
        auto os = files.open("results.csv");
        write_pattern_table_csv(os, table);
    }

    const double tol = deg2rad(cfg.phase_tolerance_deg);
    int covered_lens = 0;
    int covered_mirror = 0;
    constexpr int kTargets = 72;
    {
        auto os = files.open("coverage.csv");
        os << "target_deg,mode,covered,u_e,u_m,magnitude,phase_deg\n";
        for (RelayMode mode : {RelayMode::lens, RelayMode::mirror}) {
            for (int k = 0; k < kTargets; ++k) {
                const double target = -constants::pi + 2.0 * constants::pi * k / kTargets;
                try {
                    const auto v = phase_to_voltages(table, target, mode, tol);
                    const auto r = element_response(model, v, cfg.carrier_hz).coefficient(mode);
                    os << fmt::format("{},{},1,{},{},{},{}\n", num(rad2deg(target)), to_string(mode),
                                      num(v.u_e), num(v.u_m), num(std::abs(r)),
                                      num(rad2deg(std::arg(r))));
                    (mode == RelayMode::lens ? covered_lens : covered_mirror)++;
                } catch (const CoverageGapError& gap) {
                    os << fmt::format("{},{},0,nan,nan,nan,{}\n", num(rad2deg(target)),
                                      to_string(mode), num(rad2deg(gap.best_phase_rad)));
                }
            }
        }
    }

    PlotSeries phase_t{"arg T (deg)", {}, {}};
    PlotSeries phase_r{"arg R (deg)", {}, {}};
    PlotSeries mag_t{"|T| x 100", {}, {}};
    for (int i = 0; i < table.axis_size(); ++i) {
        const auto& r = table.at(i, i);
        const double v = table.voltage(i);
        phase_t.x.push_back(v);
        phase_t.y.push_back(rad2deg(std::arg(r.t)));
        phase_r.x.push_back(v);
        phase_r.y.push_back(rad2deg(std::arg(r.r)));
        mag_t.x.push_back(v);
        mag_t.y.push_back(100.0 * std::abs(r.t));
    }
    files.svg({"Balanced bias (U_E = U_M)", "bias voltage (V)", "degrees / percent",
               {phase_t, phase_r, mag_t}, std::nullopt, std::pair{-180.0, 180.0}});

    summary.metrics.push_back({"grid_points", static_cast<double>(table.size())});
    summary.metrics.push_back({"lens_coverage", static_cast<double>(covered_lens) / kTargets});
    summary.metrics.push_back({"mirror_coverage", static_cast<double>(covered_mirror) / kTargets});
}

// Per-harmonic efficiency and measured beam direction of a steered surface.
struct HarmonicRow {
    int harmonic;
    Side side;
    double efficiency;
    double requested_deg;
    double peak_deg;
    BeamPattern pattern;
};

std::vector<HarmonicRow> analyse_surface(const ScenarioConfig& cfg, const HarmonicExcitations& spectra,
                                         const SteeringRequest& steering, Execution exec) {
    const auto layout = cfg.layout();
    const auto grid = angle_grid(deg2rad(cfg.angle_step_deg));
    std::vector<HarmonicRow> rows;
    for (Side side : {Side::forward, Side::backward}) {
        for (int h = -spectra.max_harmonic; h <= spectra.max_harmonic; ++h) {
            HarmonicRow row{h, side, beam_efficiency(spectra, h, side),
                            rad2deg(consequence_angle(steering, h, layout)),
                            std::nan(""), {}};
            if (row.efficiency > 1e-4) {
                row.pattern = evaluate_pattern(layout, spectra.at(h, side), grid, h, exec);
                row.peak_deg = rad2deg(find_peak(row.pattern).angle_rad);
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

void run_beam(const ScenarioConfig& cfg, Outputs& files, RunSummary& summary, Execution exec) {
    const auto ctx = make_context(cfg);
    std::vector<WaveformGenome> seeds;
    if (cfg.kind == ScenarioKind::double_beam_mirror) seeds.push_back(mirror_start(cfg, ctx));
    const auto opt = obtain_genome(cfg, objective_for(cfg, cfg.kind), ctx, seeds, exec);
    write_genome_outputs(files, cfg, opt, "genome");

    const SteeringRequest steering{-1, deg2rad(cfg.steer_deg), std::nullopt, 0.0};
    const auto drives = synthesize_surface(opt.genome, steering, cfg.layout(), ctx);
    const auto spectra = per_element_spectra(drives, ctx.model, cfg.carrier_hz, cfg.modulation, exec);
    const auto rows = analyse_surface(cfg, spectra, steering, exec);

    {
        auto os = files.open("results.csv");
        os << "harmonic,side,frequency_hz,efficiency,efficiency_db,requested_deg,peak_deg\n";
        for (const auto& r : rows)
            os << fmt::format("{},{},{},{},{},{},{}\n", r.harmonic, to_string(r.side),
                              num(cfg.carrier_hz + r.harmonic * cfg.modulation_hz), num(r.efficiency),
                              num(to_db(r.efficiency)), num(r.requested_deg), num(r.peak_deg));
    }
    {
        auto os = files.open("spectrum.csv");
        os << "element,harmonic,side,re,im\n";
        for (Side side : {Side::forward, Side::backward})
            for (int h = -spectra.max_harmonic; h <= spectra.max_harmonic; ++h) {
                const auto& exc = spectra.at(h, side);
                for (std::size_t n = 0; n < exc.size(); ++n)
                    os << fmt::format("{},{},{},{},{}\n", n, h, to_string(side),
                                      num(exc.coefficients[n].real()),
                                      num(exc.coefficients[n].imag()));
            }
    }

    const Side target_side = opt.objective.targets.front().side;
    std::vector<const HarmonicRow*> shown;
    for (const auto& r : rows)
        if (r.side == target_side && r.efficiency > 1e-3) shown.push_back(&r);
    std::stable_sort(shown.begin(), shown.end(),
                     [](auto* a, auto* b) { return a->efficiency > b->efficiency; });
    if (shown.size() > 4) shown.resize(4);
    std::sort(shown.begin(), shown.end(), [](auto* a, auto* b) { return a->harmonic < b->harmonic; });
    Plot plot{fmt::format("{} ({} side)", to_string(cfg.kind), to_string(target_side)),
              "angle (deg)", "|AF|^2 (dB)", {}, std::pair{-90.0, 90.0}, std::pair{-40.0, 0.0}};
    for (const auto* r : shown) {
        PlotSeries s{fmt::format("h = {:+d}", r->harmonic), {}, {}};
        for (std::size_t i = 0; i < r->pattern.size(); ++i) {
            s.x.push_back(rad2deg(r->pattern.angles_rad[i]));
            s.y.push_back(to_db(r->pattern.power(i)));
        }
        plot.series.push_back(std::move(s));
    }
    files.svg(plot);

    summary.metrics.push_back({"fitness", opt.fitness});
    for (const auto& t : opt.objective.targets) {
        const auto it = std::find_if(rows.begin(), rows.end(), [&](const HarmonicRow& r) {
            return r.harmonic == t.harmonic && r.side == t.side;
        });
        summary.metrics.push_back(
            {fmt::format("efficiency_h{:+d}_{}", t.harmonic, to_string(t.side)), it->efficiency});
        summary.metrics.push_back(
            {fmt::format("peak_deg_h{:+d}_{}", t.harmonic, to_string(t.side)), it->peak_deg});
    }
}

// Angle error with direction sines compared modulo lambda/d, so the two
// endfire views of one grating lobe count as the same beam.
double folded_error_deg(double requested_deg, double measured_deg, const ArrayLayout& layout) {
    const double r = std::sin(deg2rad(requested_deg));
    double du = std::sin(deg2rad(measured_deg)) - r;
    const double period = layout.wavelength_m / layout.pitch_m;
    du -= period * std::round(du / period);
    return rad2deg(std::asin(std::clamp(r + du, -1.0, 1.0))) - requested_deg;
}

void run_steer_sweep(const ScenarioConfig& cfg, Outputs& files, RunSummary& summary,
                     Execution exec) {
    const auto ctx = make_context(cfg);
    const auto layout = cfg.layout();
    const auto grid = angle_grid(deg2rad(cfg.angle_step_deg));

    struct Family {
        ScenarioKind kind;
        Side side;
        const char* stem;
    };
    const Family families[] = {{ScenarioKind::single_beam, Side::forward, "genome_single"},
                               {ScenarioKind::double_beam_lens, Side::forward, "genome_double_lens"},
                               {ScenarioKind::double_beam_mirror, Side::backward,
                                "genome_double_mirror"}};

    Plot plot{"Steering accuracy", "requested angle (deg)", "measured angle (deg)", {},
              std::pair{-90.0, 90.0}, std::pair{-90.0, 90.0}};
    PlotSeries ideal{"requested", {-90.0, 90.0}, {-90.0, 90.0}};
    plot.series.push_back(ideal);
    double worst_inner = 0.0;
    double worst_outer = 0.0;

    auto os = files.open("results.csv");
    os << "family,phase_step_rad,harmonic,side,requested_deg,measured_deg,error_deg,efficiency\n";
    for (const auto& fam : families) {
        std::vector<WaveformGenome> seeds;
        if (fam.kind == ScenarioKind::double_beam_mirror) seeds.push_back(mirror_start(cfg, ctx));
        const auto opt = obtain_genome(cfg, objective_for(cfg, fam.kind), ctx, seeds, exec);
        write_genome_outputs(files, cfg, opt, fam.stem);
        summary.metrics.push_back({fmt::format("fitness_{}", to_string(fam.kind)), opt.fitness});

        const std::vector<int> harmonics =
            fam.kind == ScenarioKind::single_beam ? std::vector<int>{-1} : std::vector<int>{-1, 1};
        std::map<int, PlotSeries> series;
        for (int h : harmonics)
            series[h].label = fmt::format("{} h = {:+d}", to_string(fam.kind), h);

        for (int k = 0; k < cfg.sweep_points; ++k) {
            const double step = -constants::pi + 2.0 * constants::pi * k / (cfg.sweep_points - 1);
            const auto drives = phase_gradient_surface(opt.genome, step, layout.count, ctx);
            const auto spectra =
                per_element_spectra(drives, ctx.model, cfg.carrier_hz, cfg.modulation, exec);
            for (int h : harmonics) {
                const double requested = rad2deg(gradient_beam_angle(h, step, layout));
                const double eff = beam_efficiency(spectra, h, fam.side);
                double measured = std::nan("");
                if (eff > 1e-4) {
                    const auto pattern =
                        evaluate_pattern(layout, spectra.at(h, fam.side), grid, h, exec);
                    measured = rad2deg(find_peak(pattern).angle_rad);
                }
                const double err = folded_error_deg(requested, measured, layout);
                if (std::isfinite(err)) {
                    double& worst = std::abs(requested) <= 45.0 ? worst_inner : worst_outer;
                    worst = std::max(worst, std::abs(err));
                }
                os << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(fam.kind), num(step), h,
                                  to_string(fam.side), num(requested), num(measured), num(err),
                                  num(eff));
                series[h].x.push_back(requested);
                series[h].y.push_back(measured);
            }
        }
        for (auto& [h, s] : series) plot.series.push_back(std::move(s));
    }
    files.svg(plot);
    summary.metrics.push_back({"max_abs_error_deg_within_45", worst_inner});
    summary.metrics.push_back({"max_abs_error_deg_beyond_45", worst_outer});
}

void run_link_sim(const ScenarioConfig& cfg, Outputs& files, RunSummary& summary, Execution exec) {
    const auto ctx = make_context(cfg);
    const auto mirror_seeds = std::vector<WaveformGenome>{mirror_start(cfg, ctx)};

    auto lens_single = obtain_genome(cfg, BeamObjective::single(-1, Side::forward), ctx, {}, exec);
    auto mirror_single =
        obtain_genome(cfg, BeamObjective::single(-1, Side::backward), ctx, mirror_seeds, exec);
    write_genome_outputs(files, cfg, lens_single, "genome_lens");
    write_genome_outputs(files, cfg, mirror_single, "genome_mirror");

    auto efficiency = [&](const WaveformGenome& g, int h, Side side) {
        return evaluate_objective(g, BeamObjective::single(h, side), ctx).fitness;
    };
    const SurfaceLink lens{-1, efficiency(lens_single.genome, -1, Side::forward), 1.0};
    const SurfaceLink mirror{-1, efficiency(mirror_single.genome, -1, Side::backward), 1.0};

    const auto report = evaluate_links(cfg.scene, lens, mirror, cfg.link);
    {
        auto os = files.open("results.csv");
        write_link_report_csv(os, report);
    }
    {
        auto os = files.open("paths.csv");
        os << "user,path,received_dbm,path_loss_db,harmonic,incident_deg,departure_deg,"
              "steering_deg,blocker\n";
        for (std::size_t u = 0; u < cfg.scene.users.size(); ++u) {
            std::vector<LinkEntry> entries{direct_link(cfg.scene, u, cfg.link)};
            const auto angles = compute_geometry_angles(cfg.scene, u);
            entries.push_back(link_budget(cfg.scene, u, angles.mode == RelayMode::lens ? lens : mirror,
                                          cfg.link));
            for (const auto& e : entries)
                os << fmt::format("{},{},{},{},{},{},{},{},{}\n", e.user, to_string(e.path),
                                  num(e.received_dbm), num(e.path_loss_db), e.harmonic,
                                  num(e.incident_deg), num(e.departure_deg), num(e.steering_deg),
                                  e.blocker ? fmt::format("{}", *e.blocker) : std::string("none"));
        }
    }

    // Beam search with one arm, then with the -1/+1 pair of a double beam.
    auto lens_double =
        obtain_genome(cfg, objective_for(cfg, ScenarioKind::double_beam_lens), ctx, {}, exec);
    auto mirror_double = obtain_genome(cfg, objective_for(cfg, ScenarioKind::double_beam_mirror),
                                       ctx, mirror_seeds, exec);
    write_genome_outputs(files, cfg, lens_double, "genome_lens_double");
    write_genome_outputs(files, cfg, mirror_double, "genome_mirror_double");

    SearchConfig one{1, cfg.sweep_step_deg, cfg.sweep_range_deg, {{-1, lens.efficiency, mirror.efficiency}}};
    SearchConfig two{2, cfg.sweep_step_deg, cfg.sweep_range_deg,
                     {{-1, efficiency(lens_double.genome, -1, Side::forward),
                       efficiency(mirror_double.genome, -1, Side::backward)},
                      {1, efficiency(lens_double.genome, 1, Side::forward),
                       efficiency(mirror_double.genome, 1, Side::backward)}}};
    const auto layout = cfg.layout();
    {
        auto os = files.open("search.csv");
        os << "split,evaluations,user,found,steering_deg,departure_deg,harmonic,received_dbm\n";
        for (const auto* sc : {&one, &two}) {
            SearchResult res;
            try {
                res = beam_search(cfg.scene, *sc, layout, cfg.link);
            } catch (const SearchFailed& failed) {
                res = failed.best_attempt;
            }
            for (const auto& u : res.users)
                os << fmt::format("{},{},{},{},{},{},{},{}\n", sc->split, res.evaluations, u.user,
                                  u.found ? 1 : 0, num(u.steering_deg), num(u.departure_deg),
                                  u.harmonic, num(u.received_dbm));
            summary.metrics.push_back(
                {fmt::format("search_evaluations_split{}", sc->split), res.evaluations});
        }
    }

    // Relay pattern toward each user, seen from the user's side of the wall.
    const auto grid = angle_grid(deg2rad(cfg.angle_step_deg));
    Plot plot{"Relay beams toward each user", "departure angle (deg)", "|AF|^2 (dB)", {},
              std::pair{-90.0, 90.0}, std::pair{-40.0, 0.0}};
    for (std::size_t u = 0; u < cfg.scene.users.size(); ++u) {
        const auto angles = compute_geometry_angles(cfg.scene, u);
        const auto exc = phased_excitation(progressive_phases(layout, angles.steering_sine()));
        PlotSeries s{fmt::format("user {} ({})", u, to_string(angles.mode)), {}, {}};
        for (double th : grid) {
            s.x.push_back(rad2deg(th));
            s.y.push_back(to_db(std::norm(
                array_factor_at_sine(layout, exc, std::sin(th) - std::sin(angles.incident_rad)))));
        }
        plot.series.push_back(std::move(s));
    }
    files.svg(plot);

    summary.metrics.push_back({"lens_efficiency", lens.efficiency});
    summary.metrics.push_back({"mirror_efficiency", mirror.efficiency});
    for (const auto& e : report.entries)
        summary.metrics.push_back({fmt::format("user{}_received_dbm", e.user), e.received_dbm});
}

void write_manifest(const ScenarioConfig& cfg, Outputs& files, const RunSummary& summary) {
    auto os = files.open("manifest.txt");
    os << "tool_version = " << kToolVersion << '\n';
    os << "kind = " << to_string(cfg.kind) << '\n';
    os << "config = " << cfg.source_name << '\n';
    os << fmt::format("config_hash = fnv1a64:{:016x}\n", cfg.hash());
    os << "seed = " << cfg.ga.seed << '\n';
#ifdef __VERSION__
    os << "compiler = " << __VERSION__ << '\n';
#endif
    os << "files =";
    for (const auto& f : summary.files) os << ' ' << f;
    os << '\n';
    os << "\n[metrics]\n";
    for (const auto& [k, v] : summary.metrics) os << k << " = " << num(v) << '\n';
    os << "\n[config]\n" << cfg.source_text;
    if (!cfg.source_text.empty() && cfg.source_text.back() != '\n') os << '\n';
}

}  // namespace

RunSummary run_scenario(const ScenarioConfig& cfg, Execution exec) {
    RunSummary summary;
    Outputs files(cfg, summary);
    switch (cfg.kind) {
        case ScenarioKind::pattern_table: run_pattern_table(cfg, files, summary, exec); break;
        case ScenarioKind::steer_sweep: run_steer_sweep(cfg, files, summary, exec); break;
        case ScenarioKind::single_beam:
        case ScenarioKind::double_beam_lens:
        case ScenarioKind::double_beam_mirror: run_beam(cfg, files, summary, exec); break;
        case ScenarioKind::link_sim: run_link_sim(cfg, files, summary, exec); break;
    }
    write_manifest(cfg, files, summary);
    return summary;
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<std::string>> read_rows(std::istream& is) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.emplace_back();
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

}  // namespace

CompareReport compare_csv(std::istream& a, std::istream& b, double tolerance) {
    CompareReport rep;
    if (!(tolerance >= 0.0)) throw ConfigurationError("tolerance must be non-negative");
    const auto ra = read_rows(a);
    const auto rb = read_rows(b);
    if (ra.empty() || rb.empty()) {
        rep.exit_code = 2;
        rep.messages.push_back("missing header row");
        return rep;
    }
    if (ra.front() != rb.front()) {
        rep.exit_code = 2;
        rep.messages.push_back("headers differ");
        return rep;
    }
    if (ra.size() != rb.size()) {
        rep.exit_code = 2;
        rep.messages.push_back(
            fmt::format("row counts differ: {} vs {}", ra.size() - 1, rb.size() - 1));
        return rep;
    }
    const auto& header = ra.front();
    rep.rows = ra.size() - 1;
    for (std::size_t r = 1; r < ra.size(); ++r) {
        if (ra[r].size() != rb[r].size() || ra[r].size() != header.size()) {
            rep.exit_code = 2;
            rep.messages.push_back(fmt::format("row {}: column count differs", r));
            return rep;
        }
        for (std::size_t c = 0; c < header.size(); ++c) {
            const auto& x = ra[r][c];
            const auto& y = rb[r][c];
            ++rep.cells_compared;
            const auto nx = parse_number(x);
            const auto ny = parse_number(y);
            if (nx && ny) {
                const double u = *nx, v = *ny;
                if (std::isnan(u) && std::isnan(v)) continue;
                if (u == v) continue;
                const double scale = std::max(std::abs(u), std::abs(v));
                const double rel = std::isfinite(scale) && scale > 0.0
                                       ? std::abs(u - v) / scale
                                       : std::numeric_limits<double>::infinity();
                rep.max_relative_diff = std::max(rep.max_relative_diff, rel);
                if (!(rel <= tolerance)) {
                    rep.exit_code = 1;
                    rep.messages.push_back(fmt::format("row {} {}: {} vs {} (relative {:.3g})", r,
                                                       header[c], x, y, rel));
                }
            } else if (x != y) {
                rep.exit_code = 1;
                rep.max_relative_diff = std::numeric_limits<double>::infinity();
                rep.messages.push_back(fmt::format("row {} {}: '{}' vs '{}'", r, header[c], x, y));
            }
        }
    }
    return rep;
}

CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b,
                           double tolerance) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa) throw ConfigurationError(fmt::format("cannot open '{}'", a.string()));
    if (!fb) throw ConfigurationError(fmt::format("cannot open '{}'", b.string()));
    return compare_csv(fa, fb, tolerance);
}

// ---------------------------------------------------------------------------

CalibrationReport calibrate(const ScenarioConfig& cfg) {
    const auto model = scenario_model(cfg);
    const auto& atom = model.electric;
    CalibrationReport rep;
    rep.geometry = atom.geometry;
    rep.circuit = atom.values();
    rep.f0_at_min_hz = atom.loaded_resonance(atom.varactor.v_min);
    rep.f0_at_mid_hz = atom.loaded_resonance(atom.varactor.mid_bias());
    rep.f0_at_max_hz = atom.loaded_resonance(atom.varactor.v_max);
    return rep;
}

void print_calibration(std::ostream& os, const CalibrationReport& r) {
    os << fmt::format("gap_m = {:.6e}\n", r.geometry.gap_m);
    os << fmt::format("inductance_h = {:.6e}\n", r.circuit.inductance_h);
    os << fmt::format("gap_capacitance_f = {:.6e}\n", r.circuit.gap_capacitance_f);
    os << fmt::format("f0_min_bias_hz = {:.6e}\n", r.f0_at_min_hz);
    os << fmt::format("f0_mid_bias_hz = {:.6e}\n", r.f0_at_mid_hz);
    os << fmt::format("f0_max_bias_hz = {:.6e}\n", r.f0_at_max_hz);
}

}  // namespace mmwall
