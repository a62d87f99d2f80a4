#pragma once

// Bias-voltage pair -> complex transmission/reflection of one Huygens element.
//
// Electric and magnetic meta-atoms are modeled as series R-L-C branches. The
// electric branch yields a normalized sheet admittance y, the magnetic branch a
// normalized sheet impedance z, and the average-field sheet transition gives
//
//   T = (1 - y z / 4) / ((1 + y/2)(1 + z/2))
//   R = (z/2 - y/2)  / ((1 + y/2)(1 + z/2))
//
// Equivalently T = (a + b)/2 and R = (a - b)/2 with a = (1 - y/2)/(1 + y/2),
// b = (1 - z/2)/(1 + z/2), which makes passivity evident.

#include <iosfwd>
#include <vector>

#include "mmwall/atom_circuit.hpp"

namespace mmwall {

struct VoltagePair {
    double u_e = 0.0;
    double u_m = 0.0;
    friend bool operator==(const VoltagePair&, const VoltagePair&) = default;
};

struct SheetResponse {
    Complex t{1.0, 0.0};
    Complex r{0.0, 0.0};
    double f_hz = 0.0;

    double power() const { return std::norm(t) + std::norm(r); }
    Complex coefficient(RelayMode mode) const { return mode == RelayMode::lens ? t : r; }
};

/// Calibrated electric/magnetic atom pair plus the sheet coupling constant.
struct ElementModel {
    AtomCircuit electric;
    AtomCircuit magnetic;
    double coupling = 1.0;

    /// Both atoms share `atom`, with the gap calibrated to carrier_hz at mid-bias.
    static ElementModel calibrated(double carrier_hz, const AtomCircuit& atom = {},
                                   double coupling = 1.0);

    const VaractorModel& electric_varactor() const { return electric.varactor; }
    const VaractorModel& magnetic_varactor() const { return magnetic.varactor; }
    /// Bias square common to both varactors.
    double v_min() const;
    double v_max() const;
};

// Normalized admittance eta0 * coupling / (R + j w L + 1/(j w C_total)).
// Throws DivergenceError at exact resonance of a lossless branch.
Complex sheet_admittance(const CircuitValues& circuit, double c_var_f, double f_hz,
                         double coupling = 1.0);

/// Sheet-transition formulas for given normalized y (electric) and z (magnetic).
/// An infinite y or z (lossless branch at resonance) is taken as the short limit.
SheetResponse sheet_transition(Complex y, Complex z, double f_hz);

SheetResponse element_response(const ElementModel& model, VoltagePair pair, double f_hz);

/// element_response with the circuit values resolved once; used in hot loops.
class ElementEvaluator {
public:
    explicit ElementEvaluator(const ElementModel& model);
    SheetResponse operator()(VoltagePair pair, double f_hz) const;
    const ElementModel& model() const { return model_; }

private:
    ElementModel model_;
    CircuitValues electric_;
    CircuitValues magnetic_;
};

/// Dense (U_E, U_M) grid of element responses at a fixed carrier.
class HuygensPatternTable {
public:
    HuygensPatternTable(double carrier_hz, double v_lo, double v_hi, double resolution_v);

    double carrier_hz() const { return carrier_hz_; }
    double resolution_v() const { return resolution_v_; }
    int axis_size() const { return static_cast<int>(axis_.size()); }
    double voltage(int i) const { return axis_[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return responses_.size(); }

    // Row-major: i indexes U_E, j indexes U_M.
    const SheetResponse& at(int i, int j) const { return responses_[index(i, j)]; }
    SheetResponse& at(int i, int j) { return responses_[index(i, j)]; }
    VoltagePair pair(int i, int j) const { return {voltage(i), voltage(j)}; }

    const std::vector<SheetResponse>& responses() const { return responses_; }

private:
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * axis_.size() + static_cast<std::size_t>(j);
    }

    double carrier_hz_;
    double resolution_v_;
    std::vector<double> axis_;
    std::vector<SheetResponse> responses_;
};

/// Grid over the model's full bias square. OpenMP over rows when parallel.
HuygensPatternTable build_pattern_table(const ElementModel& model, double carrier_hz,
                                        double resolution_v,
                                        Execution exec = Execution::parallel);
/// Grid over an explicit bias window [v_lo, v_hi] (which may collapse to a point).
HuygensPatternTable build_pattern_table(const ElementModel& model, double carrier_hz,
                                        double v_lo, double v_hi, double resolution_v,
                                        Execution exec = Execution::parallel);

inline constexpr double kDefaultPhaseToleranceRad = 5.0 * constants::pi / 180.0;

// Grid point with the largest |coefficient| whose phase lies within tolerance
// of target_phase. Ties go to larger magnitude, then lexicographically smaller
// (U_E, U_M). Throws CoverageGapError carrying the closest achievable phase.
VoltagePair phase_to_voltages(const HuygensPatternTable& table, double target_phase_rad,
                              RelayMode mode,
                              double tolerance_rad = kDefaultPhaseToleranceRad);

/// Columns: U_E, U_M, re_T, im_T, re_R, im_R.
void write_pattern_table_csv(std::ostream& os, const HuygensPatternTable& table);

}  // namespace mmwall
