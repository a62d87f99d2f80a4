#include "mmwall/waveform_optimizer.hpp"

#include <algorithm>
#include <exception>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "json.hpp"

namespace mmwall {

namespace {

struct WaveformSlice {
    std::size_t base;
    int order;
    std::size_t amp() const { return base; }
    std::size_t off() const { return base + 1; }
    std::size_t cos(int n) const { return base + 2 + static_cast<std::size_t>(n); }
    std::size_t sin(int n) const { return base + 2 + static_cast<std::size_t>(order + n); }
    std::size_t phase() const { return base + 2 + 2 * static_cast<std::size_t>(order); }
};

WaveformSlice slice(int order, int which) {
    return {static_cast<std::size_t>(which * WaveformGenome::genes_per_waveform(order)), order};
}

void write_waveform(std::vector<double>& genes, WaveformSlice s, const VoltageWaveform& w) {
    genes[s.amp()] = w.amplitude_v;
    genes[s.off()] = w.offset_v;
    for (int n = 0; n < s.order; ++n) {
        genes[s.cos(n)] = w.cos_coeffs[static_cast<std::size_t>(n)];
        genes[s.sin(n)] = w.sin_coeffs[static_cast<std::size_t>(n)];
    }
    genes[s.phase()] = w.phase_rad;
}

VoltageWaveform read_waveform(const std::vector<double>& genes, WaveformSlice s,
                              double modulation_hz) {
    VoltageWaveform w;
    w.amplitude_v = genes[s.amp()];
    w.offset_v = genes[s.off()];
    w.cos_coeffs.resize(static_cast<std::size_t>(s.order));
    w.sin_coeffs.resize(static_cast<std::size_t>(s.order));
    for (int n = 0; n < s.order; ++n) {
        w.cos_coeffs[static_cast<std::size_t>(n)] = genes[s.cos(n)];
        w.sin_coeffs[static_cast<std::size_t>(n)] = genes[s.sin(n)];
    }
    w.phase_rad = genes[s.phase()];
    w.modulation_hz = modulation_hz;
    return w;
}

double aggregate(const BeamObjective& objective, const HarmonicSpectrum& spectrum) {
    if (objective.aggregation == Aggregation::weighted_sum) {
        double sum = 0.0;
        for (const auto& t : objective.targets) sum += t.weight * spectrum.power(t.harmonic, t.side);
        return sum;
    }
    double total_weight = 0.0;
    for (const auto& t : objective.targets) total_weight += t.weight;
    double log_mean = 0.0;
    for (const auto& t : objective.targets) {
        if (t.weight == 0.0) continue;
        const double p = spectrum.power(t.harmonic, t.side);
        if (!(p > 0.0)) return 0.0;
        log_mean += t.weight / total_weight * std::log(p);
    }
    return std::exp(log_mean);
}

bool is_phase_gene(int order, std::size_t i) {
    const auto per = static_cast<std::size_t>(WaveformGenome::genes_per_waveform(order));
    return i % per == per - 1;
}

}  // namespace

// ---------------------------------------------------------------------------

BeamObjective BeamObjective::single(int harmonic, Side side) {
    return {{BeamTarget{harmonic, side, 1.0, std::nullopt}}};
}

BeamObjective BeamObjective::double_beam(Side side, double weight_minus, double weight_plus) {
    return {{BeamTarget{-1, side, weight_minus, std::nullopt},
             BeamTarget{+1, side, weight_plus, std::nullopt}}};
}

void BeamObjective::validate(int max_harmonic) const {
    if (targets.empty()) throw ConfigurationError("objective needs at least one target");
    bool any_positive = false;
    for (const auto& t : targets) {
        if (!(t.weight >= 0.0)) throw ConfigurationError("target weights must be non-negative");
        if (std::abs(t.harmonic) > max_harmonic)
            throw RangeError(fmt::format("target harmonic {} beyond retained order {}",
                                         t.harmonic, max_harmonic));
        any_positive = any_positive || t.weight > 0.0;
    }
    if (!any_positive) throw ConfigurationError("objective weights are all zero");
}

void GAConfig::validate() const {
    if (population < 2) throw ConfigurationError("population must be at least 2");
    if (generations < 0) throw ConfigurationError("generations must be non-negative");
    if (elites < 0 || elites >= population)
        throw ConfigurationError("elite count must lie in [0, population)");
    if (tournament_size < 1) throw ConfigurationError("tournament size must be positive");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        throw ConfigurationError("crossover rate must lie in [0, 1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
        throw ConfigurationError("mutation rate must lie in [0, 1]");
    if (!(mutation_scale >= 0.0)) throw ConfigurationError("mutation scale must be >= 0");
    if (fourier_order < 1) throw ConfigurationError("fourier order must be >= 1");
}

// ---------------------------------------------------------------------------

WaveformGenome::WaveformGenome(int fourier_order, std::vector<double> genes)
    : order_(fourier_order), genes_(std::move(genes)) {
    if (fourier_order < 1) throw DomainError("fourier order must be >= 1");
    if (genes_.size() != static_cast<std::size_t>(2 * genes_per_waveform(fourier_order)))
        throw DomainError(fmt::format("genome of order {} needs {} genes, got {}", fourier_order,
                                      2 * genes_per_waveform(fourier_order), genes_.size()));
}

WaveformGenome WaveformGenome::from_waveforms(const VoltageWaveform& electric,
                                              const VoltageWaveform& magnetic) {
    if (electric.order() != magnetic.order())
        throw DomainError("electric and magnetic waveforms must share the Fourier order");
    const int order = electric.order();
    std::vector<double> genes(static_cast<std::size_t>(2 * genes_per_waveform(order)));
    write_waveform(genes, slice(order, 0), electric);
    write_waveform(genes, slice(order, 1), magnetic);
    return {order, std::move(genes)};
}

WaveformGenome::Bounds WaveformGenome::bounds(int fourier_order, double v_min, double v_max) {
    Bounds b;
    const auto n = static_cast<std::size_t>(2 * genes_per_waveform(fourier_order));
    b.lo.assign(n, -1.0);
    b.hi.assign(n, 1.0);
    for (int which = 0; which < 2; ++which) {
        const auto s = slice(fourier_order, which);
        b.lo[s.amp()] = 0.0;
        b.hi[s.amp()] = 0.5 * (v_max - v_min);
        b.lo[s.off()] = v_min;
        b.hi[s.off()] = v_max;
        b.lo[s.phase()] = -constants::pi;
        b.hi[s.phase()] = constants::pi;
    }
    return b;
}

WaveformGenome::Decoded WaveformGenome::decode(double v_min, double v_max,
                                               double modulation_hz) const {
    Decoded d;
    for (double g : genes_)
        if (!std::isfinite(g)) {
            d.feasible = false;
            return d;
        }
    auto one = [&](int which, VoltageWaveform& out) {
        out = read_waveform(genes_, slice(order_, which), modulation_hz).normalized();
        if (!(out.offset_v >= v_min && out.offset_v <= v_max) || out.amplitude_v < 0.0) {
            d.feasible = false;
            return;
        }
        const double limit = std::min(out.offset_v - v_min, v_max - out.offset_v);
        if (out.amplitude_v > limit) {
            out.amplitude_v = limit;
            d.repaired = true;
        }
    };
    one(0, d.electric);
    one(1, d.magnetic);
    return d;
}

WaveformGenome mirror_seed(const WaveformGenome& genome) {
    const int order = genome.fourier_order();
    std::vector<double> genes = genome.genes();
    const auto e = slice(order, 0);
    const auto m = slice(order, 1);
    for (std::size_t i = 0; i < static_cast<std::size_t>(WaveformGenome::genes_per_waveform(order));
         ++i)
        genes[m.base + i] = genes[e.base + i];
    genes[m.phase()] = wrap_phase(genes[e.phase()] + constants::pi);
    return {order, std::move(genes)};
}

// ---------------------------------------------------------------------------

ObjectiveValue evaluate_objective(const WaveformGenome& genome, const BeamObjective& objective,
                                  const OptimizerContext& ctx) {
    return evaluate_objective(genome, objective, ctx, ElementEvaluator(ctx.model));
}

ObjectiveValue evaluate_objective(const WaveformGenome& genome, const BeamObjective& objective,
                                  const OptimizerContext& ctx, const ElementEvaluator& element) {
    ObjectiveValue value;
    const auto decoded = genome.decode(ctx.model.v_min(), ctx.model.v_max(), ctx.modulation_hz);
    if (!decoded.feasible) {
        value.infeasible = true;
        return value;
    }
    try {
        value.spectrum = element_spectrum({decoded.electric, decoded.magnetic, 0.0}, element,
                                          ctx.carrier_hz, ctx.modulation);
    } catch (const ClippingError&) {
        value.infeasible = true;
        return value;
    }
    value.fitness = aggregate(objective, value.spectrum);
    return value;
}

OptimizationResult optimize(const BeamObjective& objective, const GAConfig& config,
                            const OptimizerContext& ctx, const std::vector<WaveformGenome>& seeds,
                            Execution exec) {
    config.validate();
    ctx.modulation.validate(ctx.carrier_hz, ctx.modulation_hz);
    objective.validate(ctx.modulation.max_harmonic);

    const ElementEvaluator element(ctx.model);
    const int order = config.fourier_order;
    const auto bounds = WaveformGenome::bounds(order, ctx.model.v_min(), ctx.model.v_max());
    const std::size_t n_genes = bounds.lo.size();
    const auto pop_size = static_cast<std::size_t>(config.population);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<WaveformGenome> population;
    population.reserve(pop_size);
    for (const auto& s : seeds) {
        if (population.size() == pop_size) break;
        if (s.fourier_order() != order)
            throw ConfigurationError("seed genome order differs from the configured order");
        population.push_back(s);
    }
    while (population.size() < pop_size) {
        std::vector<double> genes(n_genes);
        for (std::size_t i = 0; i < n_genes; ++i)
            genes[i] = bounds.lo[i] + unit(rng) * (bounds.hi[i] - bounds.lo[i]);
        population.emplace_back(order, std::move(genes));
    }

    std::vector<double> fitness(pop_size, 0.0);
    auto evaluate = [&](std::size_t first) {
        const auto n = static_cast<long>(pop_size);
        if (exec == Execution::parallel) {
            std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
            for (long i = static_cast<long>(first); i < n; ++i) {
                try {
                    fitness[i] = evaluate_objective(population[i], objective, ctx, element).fitness;
                } catch (...) {
#pragma omp critical
                    if (!failure) failure = std::current_exception();
                }
            }
            if (failure) std::rethrow_exception(failure);
        } else {
            for (long i = static_cast<long>(first); i < n; ++i)
                fitness[i] = evaluate_objective(population[i], objective, ctx, element).fitness;
        }
    };

    OptimizationResult result;
    result.seed = config.seed;
    auto track_best = [&] {
        for (std::size_t i = 0; i < pop_size; ++i) {
            if (fitness[i] > result.best_fitness || result.best.genes().empty()) {
                result.best_fitness = fitness[i];
                result.best = population[i];
            }
        }
        result.history.push_back(result.best_fitness);
    };

    evaluate(0);
    track_best();

    auto tournament = [&]() -> const WaveformGenome& {
        std::size_t winner = static_cast<std::size_t>(unit(rng) * static_cast<double>(pop_size));
        winner = std::min(winner, pop_size - 1);
        for (int k = 1; k < config.tournament_size; ++k) {
            auto c = std::min(static_cast<std::size_t>(unit(rng) * static_cast<double>(pop_size)),
                              pop_size - 1);
            if (fitness[c] > fitness[winner]) winner = c;
        }
        return population[winner];
    };

    const auto n_elites = static_cast<std::size_t>(config.elites);
    for (int gen = 0; gen < config.generations; ++gen) {
        std::vector<std::size_t> order_idx(pop_size);
        std::iota(order_idx.begin(), order_idx.end(), 0);
        std::stable_sort(order_idx.begin(), order_idx.end(),
                         [&](std::size_t a, std::size_t b) { return fitness[a] > fitness[b]; });

        std::vector<WaveformGenome> next;
        std::vector<double> next_fitness;
        next.reserve(pop_size);
        for (std::size_t e = 0; e < n_elites; ++e) {
            next.push_back(population[order_idx[e]]);
            next_fitness.push_back(fitness[order_idx[e]]);
        }
        while (next.size() < pop_size) {
            const auto& p1 = tournament();
            const auto& p2 = tournament();
            std::vector<double> child = p1.genes();
            if (unit(rng) < config.crossover_rate) {
                for (std::size_t i = 0; i < n_genes; ++i) {
                    const double u = -config.blend_alpha + unit(rng) * (1.0 + 2.0 * config.blend_alpha);
                    child[i] = p1.genes()[i] + u * (p2.genes()[i] - p1.genes()[i]);
                }
            }
            for (std::size_t i = 0; i < n_genes; ++i) {
                if (unit(rng) < config.mutation_rate)
                    child[i] += gauss(rng) * config.mutation_scale * (bounds.hi[i] - bounds.lo[i]);
                if (is_phase_gene(order, i))
                    child[i] = wrap_phase(child[i]);
                else
                    child[i] = std::clamp(child[i], bounds.lo[i], bounds.hi[i]);
            }
            next.emplace_back(order, std::move(child));
        }
        population = std::move(next);
        std::copy(next_fitness.begin(), next_fitness.end(), fitness.begin());
        evaluate(n_elites);
        track_best();
    }

    if (std::all_of(fitness.begin(), fitness.end(), [](double f) { return f <= 0.0; }))
        throw OptimizationFailed("entire final population has zero fitness", result.history);
    return result;
}

// ---------------------------------------------------------------------------

std::vector<ElementDrive> synthesize_surface(const WaveformGenome& genome,
                                             const SteeringRequest& steering,
                                             const ArrayLayout& layout,
                                             const OptimizerContext& ctx) {
    layout.validate();
    if (steering.harmonic == 0)
        throw ConfigurationError("a waveform time shift cannot steer the 0th harmonic");
    if (std::abs(steering.angle_rad) > 0.5 * constants::pi + 1e-12)
        throw RangeError("steering angle must lie within [-pi/2, pi/2]");
    const auto decoded = genome.decode(ctx.model.v_min(), ctx.model.v_max(), ctx.modulation_hz);
    if (!decoded.feasible) throw DomainError("genome does not decode to feasible waveforms");

    const auto primary = steer_phases(layout, steering.angle_rad);
    std::vector<double> secondary;
    const bool dual = steering.secondary_harmonic.has_value();
    if (dual) {
        if (*steering.secondary_harmonic == steering.harmonic)
            throw ConfigurationError("dual-gradient steering needs two distinct harmonics");
        secondary = steer_phases(layout, steering.secondary_angle_rad);
    }

    const double h = steering.harmonic;
    std::vector<ElementDrive> drives;
    drives.reserve(static_cast<std::size_t>(layout.count));
    for (std::size_t n = 0; n < primary.size(); ++n) {
        double shift = -primary[n] / h;
        double carrier = 0.0;
        if (dual) {
            const double h2 = *steering.secondary_harmonic;
            shift = (secondary[n] - primary[n]) / (h - h2);
            carrier = primary[n] + h * shift;
        }
        ElementDrive d{decoded.electric, decoded.magnetic, carrier};
        d.electric.phase_rad += shift;
        d.magnetic.phase_rad += shift;
        drives.push_back(std::move(d));
    }
    return drives;
}

double consequence_angle(const SteeringRequest& steering, int harmonic,
                         const ArrayLayout& layout) {
    if (steering.harmonic == 0) throw ConfigurationError("primary harmonic must be non-zero");
    if (steering.secondary_harmonic && harmonic == *steering.secondary_harmonic)
        return steering.secondary_angle_rad;
    double u = static_cast<double>(harmonic) / steering.harmonic * std::sin(steering.angle_rad);
    const double period = layout.wavelength_m / layout.pitch_m;
    u -= period * std::round(u / period);
    if (std::abs(u) > 1.0) return std::numeric_limits<double>::quiet_NaN();
    return std::asin(u);
}

std::vector<ElementDrive> phase_gradient_surface(const WaveformGenome& genome,
                                                 double phase_step_rad, int count,
                                                 const OptimizerContext& ctx) {
    if (count < 1) throw DomainError("element count must be >= 1");
    if (!std::isfinite(phase_step_rad)) throw DomainError("phase step must be finite");
    const auto decoded = genome.decode(ctx.model.v_min(), ctx.model.v_max(), ctx.modulation_hz);
    if (!decoded.feasible) throw DomainError("genome does not decode to feasible waveforms");
    std::vector<ElementDrive> drives;
    drives.reserve(static_cast<std::size_t>(count));
    for (int n = 0; n < count; ++n) {
        ElementDrive d{decoded.electric, decoded.magnetic, 0.0};
        d.electric.phase_rad += n * phase_step_rad;
        d.magnetic.phase_rad += n * phase_step_rad;
        drives.push_back(std::move(d));
    }
    return drives;
}

double gradient_beam_angle(int harmonic, double phase_step_rad, const ArrayLayout& layout) {
    double u = harmonic * phase_step_rad / (layout.wavenumber() * layout.pitch_m);
    const double period = layout.wavelength_m / layout.pitch_m;
    u -= period * std::round(u / period);
    if (std::abs(u) > 1.0) return std::numeric_limits<double>::quiet_NaN();
    return std::asin(u);
}

// ---------------------------------------------------------------------------

void save_genome(std::ostream& os, const WaveformGenome& genome, const GAConfig& config,
                 const BeamObjective& objective, double fitness, const std::string& manifest) {
    using json = nlohmann::ordered_json;
    const int order = genome.fourier_order();
    auto waveform = [&](int which) {
        const auto s = slice(order, which);
        const auto& g = genome.genes();
        json w;
        w["amplitude_v"] = g[s.amp()];
        w["offset_v"] = g[s.off()];
        std::vector<double> a, b;
        for (int n = 0; n < order; ++n) {
            a.push_back(g[s.cos(n)]);
            b.push_back(g[s.sin(n)]);
        }
        w["cos_coeffs"] = a;
        w["sin_coeffs"] = b;
        w["phase_rad"] = g[s.phase()];
        return w;
    };
    json targets = json::array();
    for (const auto& t : objective.targets)
        targets.push_back({{"harmonic", t.harmonic}, {"side", to_string(t.side)},
                           {"weight", t.weight}});
    json doc;
    if (!manifest.empty()) doc["manifest"] = manifest;
    doc.update(json{
        {"format", "mmwall-genome"},
        {"version", 1},
        {"fourier_order", order},
        {"genes", genome.genes()},
        {"electric", waveform(0)},
        {"magnetic", waveform(1)},
        {"objective", targets},
        {"fitness", fitness},
        {"seed", config.seed},
        {"ga",
         {{"population", config.population},
          {"generations", config.generations},
          {"crossover_rate", config.crossover_rate},
          {"mutation_rate", config.mutation_rate},
          {"mutation_scale", config.mutation_scale},
          {"elites", config.elites},
          {"tournament_size", config.tournament_size},
          {"blend_alpha", config.blend_alpha}}},
    });
    os << doc.dump(2) << '\n';
}

WaveformGenome load_genome(std::istream& is) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigurationError(fmt::format("genome file is not valid JSON: {}", e.what()));
    }
    if (doc.value("format", std::string{}) != "mmwall-genome")
        throw ConfigurationError("not an mmwall genome file");
    try {
        return {doc.at("fourier_order").get<int>(), doc.at("genes").get<std::vector<double>>()};
    } catch (const json::exception& e) {
        throw ConfigurationError(fmt::format("malformed genome file: {}", e.what()));
    }
}

}  // namespace mmwall
