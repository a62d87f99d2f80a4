#pragma once

// Lumped-circuit model of a single varactor-loaded meta-atom.
//
// The gap of the metallic ring is a parallel-plate capacitor, the ring itself a
// single-turn inductor, and the varactor sits in series with the gap. All
// quantities are SI; frequencies are always Hz.

#include "mmwall/common.hpp"

namespace mmwall {

enum class AtomShape { rectangular, circular };

struct MetaAtomGeometry {
    double l1_m = 1.4e-3;
    double l2_m = 1.4e-3;
    double width_m = 0.2e-3;
    double gap_m = 0.1e-3;
    double thickness_m = 35e-6;
    AtomShape shape = AtomShape::circular;
    double radius_m = 0.7e-3;  // only meaningful for circular atoms

    /// Circular atom inscribed in a square of side `diameter_m`.
    static MetaAtomGeometry circular(double diameter_m, double width_m, double gap_m,
                                     double thickness_m);
    static MetaAtomGeometry rectangular(double l1_m, double l2_m, double width_m, double gap_m,
                                        double thickness_m);

    /// Effective loop area: l1*l2, or pi*R^2 for the circular ring.
    double area_m2() const;

    /// Throws DomainError when any dimension is non-positive or inconsistent.
    void validate() const;
};

struct VaractorModel {
    double c_j0_f = 24e-15;
    double junction_v = 1.7;
    double grading = 1.2;
    double v_min = 0.0;
    double v_max = 12.0;

    double mid_bias() const { return 0.5 * (v_min + v_max); }
    bool contains(double volts) const { return volts >= v_min && volts <= v_max; }
    void validate() const;
};

struct CircuitValues {
    double inductance_h = 0.0;
    double gap_capacitance_f = 0.0;
    double r_loss_ohm = 0.0;
    double f0_hz = 0.0;  // unloaded resonance 1/(2 pi sqrt(L C_gap))
};

/// One meta-atom: geometry, its varactor and the series loss resistance.
struct AtomCircuit {
    MetaAtomGeometry geometry;
    VaractorModel varactor;
    double r_loss_ohm = 0.5;

    CircuitValues values() const;
    /// Resonance with the varactor biased at `volts`.
    double loaded_resonance(double volts) const;
};

double gap_capacitance(const MetaAtomGeometry& geom);
double loop_inductance(const MetaAtomGeometry& geom);
double varactor_capacitance(const VaractorModel& model, double volts);
double total_capacitance(double c_gap_f, double c_var_f);
double resonant_frequency(double inductance_h, double capacitance_f);

// Secant search on the gap length so that the resonance with the varactor at
// mid-bias lands on target_hz. Throws CalibrationError if the admissible gap
// range (0, min(l1, l2)) cannot bracket the target.
MetaAtomGeometry calibrate_geometry(double target_hz, const MetaAtomGeometry& seed,
                                    const VaractorModel& varactor);

}  // namespace mmwall
