#pragma once

// Elitist genetic search over bias-waveform coefficients.
//
// A genome holds two waveform parameter sets (electric, magnetic), each laid
// out as [U_amp, U_off, a_1..a_K, b_1..b_K, phi]. The objective is evaluated on
// a single element; steering is added afterwards by time-shifting each
// element's copy of the optimized waveform.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mmwall/time_modulation.hpp"

namespace mmwall {

struct BeamTarget {
    int harmonic = -1;
    Side side = Side::forward;
    double weight = 1.0;
    std::optional<double> steering_rad;
};

// weighted_sum:       sum_t w_t p_t, where p_t = |c_h(side)|^2.
// proportional_split: prod_t p_t^(w_t / sum w), a weighted geometric mean whose
//                     maximizer shares power between targets in the ratio of
//                     their weights. Used for multi-armed beams, where a plain
//                     sum is maximized by collapsing into the heaviest target.
enum class Aggregation { weighted_sum, proportional_split };

struct BeamObjective {
    std::vector<BeamTarget> targets;
    Aggregation aggregation = Aggregation::weighted_sum;

    static BeamObjective single(int harmonic, Side side);
    /// Weighted pair of harmonics -1 (weight_minus) and +1 (weight_plus) on one side.
    static BeamObjective double_beam(Side side, double weight_minus, double weight_plus);

    void validate(int max_harmonic) const;
};

struct GAConfig {
    int population = 64;
    int generations = 200;
    double crossover_rate = 0.9;
    double mutation_rate = 0.15;
    double mutation_scale = 0.05;  // fraction of each gene's range
    int elites = 2;
    int tournament_size = 3;
    double blend_alpha = 0.5;
    int fourier_order = 4;
    std::uint64_t seed = 20220301;

    void validate() const;
};

/// Everything needed to turn a genome into a spectrum.
struct OptimizerContext {
    ElementModel model;
    double carrier_hz = 24e9;
    double modulation_hz = 30e6;
    ModulationSettings modulation;
};

class WaveformGenome {
public:
    WaveformGenome() = default;
    WaveformGenome(int fourier_order, std::vector<double> genes);

    static int genes_per_waveform(int fourier_order) { return 2 * fourier_order + 3; }
    static WaveformGenome from_waveforms(const VoltageWaveform& electric,
                                         const VoltageWaveform& magnetic);

    int fourier_order() const { return order_; }
    const std::vector<double>& genes() const { return genes_; }
    std::vector<double>& genes() { return genes_; }

    struct Bounds {
        std::vector<double> lo, hi;
    };
    static Bounds bounds(int fourier_order, double v_min, double v_max);

    // Decodes both waveforms: coefficients are max-normalized, then U_amp is
    // scaled down to the bias boundary if the excursion would clip.
    struct Decoded {
        VoltageWaveform electric;
        VoltageWaveform magnetic;
        bool repaired = false;
        bool feasible = true;
    };
    Decoded decode(double v_min, double v_max, double modulation_hz) const;

    friend bool operator==(const WaveformGenome&, const WaveformGenome&) = default;

private:
    int order_ = 0;
    std::vector<double> genes_;
};

/// Electric waveform of `genome` copied to the magnetic line with a pi phase lag.
WaveformGenome mirror_seed(const WaveformGenome& genome);

struct ObjectiveValue {
    double fitness = 0.0;
    bool infeasible = false;
    HarmonicSpectrum spectrum;
};

// Fitness of a single element's spectrum under the objective's aggregation
// (plain weighted sum of |c_h(side)|^2 by default). An infeasible
// genome (after repair) scores 0 with the flag set.
ObjectiveValue evaluate_objective(const WaveformGenome& genome, const BeamObjective& objective,
                                  const OptimizerContext& ctx);
ObjectiveValue evaluate_objective(const WaveformGenome& genome, const BeamObjective& objective,
                                  const OptimizerContext& ctx, const ElementEvaluator& element);

struct OptimizationResult {
    WaveformGenome best;
    double best_fitness = 0.0;
    std::vector<double> history;  // best-so-far after the initial population and each generation
    std::uint64_t seed = 0;
};

class OptimizationFailed : public Error {
public:
    OptimizationFailed(const std::string& what, std::vector<double> trace)
        : Error(what), history(std::move(trace)) {}
    std::vector<double> history;
};

// Tournament selection, blend crossover, Gaussian mutation and elites copied
// unchanged. Fitness evaluations within a generation may run in parallel; the
// random stream is consumed only by the sequential loop, so results are
// identical for either execution policy.
OptimizationResult optimize(const BeamObjective& objective, const GAConfig& config,
                            const OptimizerContext& ctx,
                            const std::vector<WaveformGenome>& seeds = {},
                            Execution exec = Execution::parallel);

struct SteeringRequest {
    int harmonic = -1;
    double angle_rad = 0.0;
    // Experimental: independently steer a second harmonic by adding a per-element
    // carrier phase on top of the time shift. Not a physical bias control.
    std::optional<int> secondary_harmonic;
    double secondary_angle_rad = 0.0;
};

// Replicates the optimized waveform across the array. Element n is time-shifted
// by phi_n so that harmonic h acquires the progressive phase -h phi_n equal to
// steer_phases(layout, angle)[n]. Throws ConfigurationError for h = 0.
std::vector<ElementDrive> synthesize_surface(const WaveformGenome& genome,
                                             const SteeringRequest& steering,
                                             const ArrayLayout& layout,
                                             const OptimizerContext& ctx);

// Angle harmonic `harmonic` points to under the primary time-shift gradient:
// sin(theta') = (h'/h) sin(theta), folded into the visible region modulo
// lambda/d. NaN when the folded sine still falls outside [-1, 1].
double consequence_angle(const SteeringRequest& steering, int harmonic,
                         const ArrayLayout& layout);

// Element n is time-shifted by n * phase_step, so harmonic h carries the
// progressive phase -h n phase_step.
std::vector<ElementDrive> phase_gradient_surface(const WaveformGenome& genome,
                                                 double phase_step_rad, int count,
                                                 const OptimizerContext& ctx);

/// Beam direction of harmonic h under that gradient: k d sin(theta) = h phase_step, folded.
double gradient_beam_angle(int harmonic, double phase_step_rad, const ArrayLayout& layout);

// JSON record of a genome with its config, seed and achieved fitness. A
// non-empty `manifest` becomes the first key of the document.
void save_genome(std::ostream& os, const WaveformGenome& genome, const GAConfig& config,
                 const BeamObjective& objective, double fitness,
                 const std::string& manifest = {});
WaveformGenome load_genome(std::istream& is);

}  // namespace mmwall
