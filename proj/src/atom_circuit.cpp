#include "mmwall/atom_circuit.hpp"

#include <algorithm>
#include <fmt/format.h>
#include <limits>

namespace mmwall {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw DomainError(std::string(name) + " must be strictly positive and finite");
}

double loaded_f0(const MetaAtomGeometry& g, double c_var) {
    return resonant_frequency(loop_inductance(g), total_capacitance(gap_capacitance(g), c_var));
}

}  // namespace

MetaAtomGeometry MetaAtomGeometry::circular(double diameter_m, double width_m, double gap_m,
                                            double thickness_m) {
    return {diameter_m, diameter_m, width_m, gap_m, thickness_m, AtomShape::circular,
            0.5 * diameter_m};
}

MetaAtomGeometry MetaAtomGeometry::rectangular(double l1_m, double l2_m, double width_m,
                                               double gap_m, double thickness_m) {
    return {l1_m, l2_m, width_m, gap_m, thickness_m, AtomShape::rectangular, 0.0};
}

double MetaAtomGeometry::area_m2() const {
    if (shape == AtomShape::circular) return constants::pi * radius_m * radius_m;
    return l1_m * l2_m;
}

void MetaAtomGeometry::validate() const {
    require_positive(l1_m, "l1");
    require_positive(l2_m, "l2");
    require_positive(width_m, "trace width");
    require_positive(gap_m, "gap");
    require_positive(thickness_m, "thickness");
    const double side = std::min(l1_m, l2_m);
    if (!(gap_m < side)) throw DomainError("gap must be smaller than min(l1, l2)");
    if (!(width_m < side)) throw DomainError("trace width must be smaller than min(l1, l2)");
    if (shape == AtomShape::circular) {
        require_positive(radius_m, "radius");
        const double tol = 1e-12 * side;
        if (std::abs(2.0 * radius_m - l1_m) > tol || std::abs(2.0 * radius_m - l2_m) > tol)
            throw DomainError("circular atom requires R = l1/2 = l2/2");
    }
}

void VaractorModel::validate() const {
    require_positive(c_j0_f, "C_j0");
    require_positive(junction_v, "junction potential");
    require_positive(grading, "grading exponent");
    if (!(v_min < v_max)) throw DomainError("varactor bias range must satisfy v_min < v_max");
    // 1 + V/V_j must stay positive for the junction law to be defined.
    if (!(v_min > -junction_v)) throw DomainError("v_min must exceed -V_j");
}

CircuitValues AtomCircuit::values() const {
    geometry.validate();
    if (!(r_loss_ohm >= 0.0)) throw DomainError("R_loss must be non-negative");
    CircuitValues cv;
    cv.inductance_h = loop_inductance(geometry);
    cv.gap_capacitance_f = gap_capacitance(geometry);
    cv.r_loss_ohm = r_loss_ohm;
    cv.f0_hz = resonant_frequency(cv.inductance_h, cv.gap_capacitance_f);
    return cv;
}

double AtomCircuit::loaded_resonance(double volts) const {
    return loaded_f0(geometry, varactor_capacitance(varactor, volts));
}

double gap_capacitance(const MetaAtomGeometry& geom) {
    require_positive(geom.width_m, "trace width");
    require_positive(geom.thickness_m, "thickness");
    require_positive(geom.gap_m, "gap");
    return constants::epsilon0 * geom.width_m * geom.thickness_m / geom.gap_m;
}

double loop_inductance(const MetaAtomGeometry& geom) {
    require_positive(geom.l1_m, "l1");
    require_positive(geom.l2_m, "l2");
    require_positive(geom.thickness_m, "thickness");
    const double area = geom.shape == AtomShape::circular
                            ? 0.25 * constants::pi * geom.l1_m * geom.l2_m
                            : geom.l1_m * geom.l2_m;
    return constants::mu0 * area / geom.thickness_m;
}

double varactor_capacitance(const VaractorModel& model, double volts) {
    if (!model.contains(volts))
        throw RangeError(fmt::format("varactor bias {} V outside [{}, {}] V", volts, model.v_min,
                                     model.v_max));
    return model.c_j0_f / std::pow(1.0 + volts / model.junction_v, model.grading);
}

double total_capacitance(double c_gap_f, double c_var_f) {
    if (!(c_gap_f > 0.0) || !(c_var_f > 0.0))
        throw DomainError("series capacitances must be strictly positive");
    return 1.0 / ((1.0 / c_gap_f) + (1.0 / c_var_f));
}

double resonant_frequency(double inductance_h, double capacitance_f) {
    require_positive(inductance_h, "inductance");
    require_positive(capacitance_f, "capacitance");
    return 1.0 / (2.0 * constants::pi * std::sqrt(inductance_h * capacitance_f));
}

MetaAtomGeometry calibrate_geometry(double target_hz, const MetaAtomGeometry& seed,
                                    const VaractorModel& varactor) {
    require_positive(target_hz, "target frequency");
    seed.validate();
    varactor.validate();

    const double c_var = varactor_capacitance(varactor, varactor.mid_bias());
    MetaAtomGeometry g = seed;
    // Residual in log space; f0 is strictly increasing in the gap length.
    auto residual = [&](double log_gap) {
        g.gap_m = std::exp(log_gap);
        return std::log(loaded_f0(g, c_var) / target_hz);
    };

    const double side = std::min(seed.l1_m, seed.l2_m);
    double lo = std::log(side * 1e-6);
    double hi = std::log(side * (1.0 - 1e-9));
    double r_lo = residual(lo);
    double r_hi = residual(hi);
    if (r_lo > 0.0 || r_hi < 0.0) {
        const double f_lo = target_hz * std::exp(r_lo);
        const double f_hi = target_hz * std::exp(r_hi);
        throw CalibrationError(fmt::format("cannot reach {} Hz: admissible gap range brackets "
                                           "[{}, {}] Hz",
                                           target_hz, f_lo, f_hi),
                               f_lo, f_hi);
    }

    // Secant from the seed gap, falling back to bisection whenever a step
    // leaves the current bracket.
    double x0 = std::log(seed.gap_m);
    double r0 = residual(x0);
    if (std::abs(r0) < 1e-14) return seed;
    if (r0 < 0.0) { lo = x0; r_lo = r0; } else { hi = x0; r_hi = r0; }
    double x1 = r0 < 0.0 ? hi : lo;
    double r1 = r0 < 0.0 ? r_hi : r_lo;

    for (int iter = 0; iter < 200; ++iter) {
        double x2 = x1 - r1 * (x1 - x0) / (r1 - r0);
        if (!(x2 > lo && x2 < hi) || !std::isfinite(x2)) x2 = 0.5 * (lo + hi);
        const double r2 = residual(x2);
        if (std::abs(r2) < 1e-13) {
            g.gap_m = std::exp(x2);
            return g;
        }
        if (r2 < 0.0) { lo = x2; r_lo = r2; } else { hi = x2; r_hi = r2; }
        x0 = x1; r0 = r1;
        x1 = x2; r1 = r2;
    }
    throw CalibrationError("gap search did not converge", target_hz * std::exp(r_lo),
                           target_hz * std::exp(r_hi));
}

}  // namespace mmwall
