#include "mmwall/sheet_response.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include <fmt/format.h>

namespace mmwall {

ElementModel ElementModel::calibrated(double carrier_hz, const AtomCircuit& atom,
                                      double coupling) {
    AtomCircuit cal = atom;
    cal.geometry = calibrate_geometry(carrier_hz, atom.geometry, atom.varactor);
    return {cal, cal, coupling};
}

double ElementModel::v_min() const {
    return std::max(electric.varactor.v_min, magnetic.varactor.v_min);
}

double ElementModel::v_max() const {
    return std::min(electric.varactor.v_max, magnetic.varactor.v_max);
}

Complex sheet_admittance(const CircuitValues& circuit, double c_var_f, double f_hz,
                         double coupling) {
    if (!(f_hz > 0.0)) throw DomainError("frequency must be positive");
    const double omega = 2.0 * constants::pi * f_hz;
    const double c_total = total_capacitance(circuit.gap_capacitance_f, c_var_f);
    const double x_l = omega * circuit.inductance_h;
    const double reactance = x_l - 1.0 / (omega * c_total);
    const Complex z_branch(circuit.r_loss_ohm, reactance);
    if (std::abs(z_branch) <= 1e-15 * x_l)
        throw DivergenceError("lossless branch driven exactly at resonance");
    return coupling * constants::eta0 / z_branch;
}

namespace {

// A lossless branch exactly on resonance is a short: report it as infinite
// admittance and let sheet_transition take the limit.
Complex branch_admittance(const CircuitValues& circuit, double c_var_f, double f_hz,
                          double coupling) {
    try {
        return sheet_admittance(circuit, c_var_f, f_hz, coupling);
    } catch (const DivergenceError&) {
        return {std::numeric_limits<double>::infinity(), 0.0};
    }
}

}  // namespace

SheetResponse sheet_transition(Complex y, Complex z, double f_hz) {
    const bool y_short = std::isinf(std::abs(y));
    const bool z_short = std::isinf(std::abs(z));
    if (y_short && z_short) return {Complex{-1.0, 0.0}, Complex{0.0, 0.0}, f_hz};
    if (y_short) {
        const Complex d = 1.0 + 0.5 * z;
        return {-0.5 * z / d, -1.0 / d, f_hz};
    }
    if (z_short) {
        const Complex d = 1.0 + 0.5 * y;
        return {-0.5 * y / d, 1.0 / d, f_hz};
    }
    const Complex half_y = 0.5 * y;
    const Complex half_z = 0.5 * z;
    const Complex denom = (1.0 + half_y) * (1.0 + half_z);
    return {(1.0 - 0.25 * y * z) / denom, (half_z - half_y) / denom, f_hz};
}

SheetResponse element_response(const ElementModel& model, VoltagePair pair, double f_hz) {
    return ElementEvaluator(model)(pair, f_hz);
}

ElementEvaluator::ElementEvaluator(const ElementModel& model)
    : model_(model), electric_(model.electric.values()), magnetic_(model.magnetic.values()) {
    model.electric.varactor.validate();
    model.magnetic.varactor.validate();
}

SheetResponse ElementEvaluator::operator()(VoltagePair pair, double f_hz) const {
    const Complex y = branch_admittance(
        electric_, varactor_capacitance(model_.electric.varactor, pair.u_e), f_hz,
        model_.coupling);
    const Complex z = branch_admittance(
        magnetic_, varactor_capacitance(model_.magnetic.varactor, pair.u_m), f_hz,
        model_.coupling);
    return sheet_transition(y, z, f_hz);
}

HuygensPatternTable::HuygensPatternTable(double carrier_hz, double v_lo, double v_hi,
                                         double resolution_v)
    : carrier_hz_(carrier_hz), resolution_v_(resolution_v) {
    if (!(resolution_v > 0.0)) throw DomainError("grid resolution must be positive");
    if (!(v_hi >= v_lo)) throw DomainError("bias window must satisfy v_lo <= v_hi");
    const double span = v_hi - v_lo;
    const auto steps = static_cast<int>(std::ceil(span / resolution_v - 1e-9));
    axis_.reserve(static_cast<std::size_t>(steps) + 1);
    for (int i = 0; i <= steps; ++i) axis_.push_back(std::min(v_lo + i * resolution_v, v_hi));
    responses_.resize(axis_.size() * axis_.size());
}

HuygensPatternTable build_pattern_table(const ElementModel& model, double carrier_hz,
                                        double resolution_v, Execution exec) {
    return build_pattern_table(model, carrier_hz, model.v_min(), model.v_max(), resolution_v,
                               exec);
}

HuygensPatternTable build_pattern_table(const ElementModel& model, double carrier_hz,
                                        double v_lo, double v_hi, double resolution_v,
                                        Execution exec) {
    HuygensPatternTable table(carrier_hz, v_lo, v_hi, resolution_v);
    const int n = table.axis_size();

    // Branch responses depend on one voltage each; compute the two axes once.
    std::vector<Complex> y(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n));
    const CircuitValues ce = model.electric.values();
    const CircuitValues cm = model.magnetic.values();
    for (int i = 0; i < n; ++i) {
        const double v = table.voltage(i);
        y[i] = branch_admittance(ce, varactor_capacitance(model.electric.varactor, v), carrier_hz,
                                model.coupling);
        z[i] = branch_admittance(cm, varactor_capacitance(model.magnetic.varactor, v), carrier_hz,
                                model.coupling);
    }

    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) table.at(i, j) = sheet_transition(y[i], z[j], carrier_hz);
    } else {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) table.at(i, j) = sheet_transition(y[i], z[j], carrier_hz);
    }
    return table;
}

VoltagePair phase_to_voltages(const HuygensPatternTable& table, double target_phase_rad,
                              RelayMode mode, double tolerance_rad) {
    if (!(target_phase_rad >= -constants::pi && target_phase_rad < constants::pi))
        throw RangeError("target phase must lie in [-pi, pi)");

    int best_i = -1, best_j = -1;
    double best_mag = -1.0;
    double closest_phase = 0.0;
    double closest_err = std::numeric_limits<double>::infinity();
    const int n = table.axis_size();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const Complex c = table.at(i, j).coefficient(mode);
            const double mag = std::abs(c);
            const double err = std::abs(wrap_phase(std::arg(c) - target_phase_rad));
            if (err < closest_err) {
                closest_err = err;
                closest_phase = std::arg(c);
            }
            // Strict '>' keeps the lexicographically first point on ties.
            if (err <= tolerance_rad && mag > best_mag) {
                best_mag = mag;
                best_i = i;
                best_j = j;
            }
        }
    }
    if (best_i < 0)
        throw CoverageGapError(
            fmt::format("no bias pair within {:.2f} deg of {:.2f} deg; closest phase {:.2f} deg",
                        rad2deg(tolerance_rad), rad2deg(target_phase_rad),
                        rad2deg(closest_phase)),
            closest_phase);
    return table.pair(best_i, best_j);
}

void write_pattern_table_csv(std::ostream& os, const HuygensPatternTable& table) {
    os << "U_E,U_M,re_T,im_T,re_R,im_R\n";
    const int n = table.axis_size();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const auto& s = table.at(i, j);
            os << fmt::format("{:.4f},{:.4f},{:.12e},{:.12e},{:.12e},{:.12e}\n", table.voltage(i),
                              table.voltage(j), s.t.real(), s.t.imag(), s.r.real(), s.r.imag());
        }
    }
}

}  // namespace mmwall
