#include "mmwall/array_beam.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace mmwall {

ArrayLayout ArrayLayout::half_wave(int count, double f_hz) {
    const double lambda = constants::c_light / f_hz;
    return {count, 0.5 * lambda, lambda};
}

void ArrayLayout::validate() const {
    if (count < 1) throw DomainError("array needs at least one element");
    if (!(pitch_m > 0.0)) throw DomainError("element pitch must be positive");
    if (!(wavelength_m > 0.0)) throw DomainError("wavelength must be positive");
}

void ExcitationVector::validate(const ArrayLayout& layout) const {
    if (coefficients.size() != static_cast<std::size_t>(layout.count))
        throw DomainError(fmt::format("excitation has {} coefficients, layout has {} elements",
                                      coefficients.size(), layout.count));
    for (const auto& c : coefficients) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw DomainError("excitation coefficients must be finite");
        if (std::abs(c) > 1.0 + 1e-9) throw DomainError("excitation magnitude exceeds 1");
    }
}

const ExcitationVector& HarmonicExcitations::at(int h, Side side) const {
    if (!has(h))
        throw RangeError(fmt::format("harmonic {} outside [-{}, {}]", h, max_harmonic,
                                     max_harmonic));
    const auto& v = side == Side::forward ? forward : backward;
    return v[static_cast<std::size_t>(h + max_harmonic)];
}

Complex array_factor(const ArrayLayout& layout, const ExcitationVector& exc, double theta_rad) {
    return array_factor_at_sine(layout, exc, std::sin(theta_rad));
}

Complex array_factor_at_sine(const ArrayLayout& layout, const ExcitationVector& exc, double u) {
    const auto& c = exc.coefficients;
    if (c.empty()) return {0.0, 0.0};
    // Horner evaluation of sum c_n z^n with z = exp(j k d u).
    const Complex z = cis(layout.wavenumber() * layout.pitch_m * u);
    Complex acc = c.back();
    for (std::size_t n = c.size() - 1; n-- > 0;) acc = acc * z + c[n];
    return acc / static_cast<double>(c.size());
}

std::vector<double> progressive_phases(const ArrayLayout& layout, double sine) {
    std::vector<double> phases(static_cast<std::size_t>(layout.count));
    const double step = -layout.wavenumber() * layout.pitch_m * sine;
    for (int n = 0; n < layout.count; ++n) phases[static_cast<std::size_t>(n)] = step * n;
    return phases;
}

std::vector<double> steer_phases(const ArrayLayout& layout, double theta_rad) {
    return progressive_phases(layout, std::sin(theta_rad));
}

ExcitationVector phased_excitation(std::span<const double> phases, Side side) {
    ExcitationVector exc;
    exc.side = side;
    exc.coefficients.reserve(phases.size());
    for (double p : phases) exc.coefficients.push_back(cis(p));
    return exc;
}

std::vector<double> angle_grid(double step_rad) {
    if (!(step_rad > 0.0)) throw DomainError("angle step must be positive");
    const double half = 0.5 * constants::pi;
    const auto n = static_cast<int>(std::ceil(constants::pi / step_rad - 1e-9));
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) grid.push_back(std::min(-half + i * step_rad, half));
    return grid;
}

BeamPattern evaluate_pattern(const ArrayLayout& layout, const ExcitationVector& exc,
                             std::span<const double> angles_rad, int harmonic, Execution exec) {
    BeamPattern pattern;
    pattern.angles_rad.assign(angles_rad.begin(), angles_rad.end());
    pattern.field.resize(angles_rad.size());
    pattern.harmonic = harmonic;
    pattern.side = exc.side;
    const auto n = static_cast<long>(angles_rad.size());
    if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < n; ++i) pattern.field[i] = array_factor(layout, exc, angles_rad[i]);
    } else {
        for (long i = 0; i < n; ++i) pattern.field[i] = array_factor(layout, exc, angles_rad[i]);
    }
    return pattern;
}

Peak find_peak(const BeamPattern& pattern) {
    if (pattern.size() == 0) throw DomainError("cannot locate the peak of an empty pattern");
    std::size_t best = 0;
    for (std::size_t i = 1; i < pattern.size(); ++i)
        if (pattern.power(i) > pattern.power(best)) best = i;

    Peak peak{pattern.angles_rad[best], pattern.power(best)};
    if (best == 0 || best + 1 == pattern.size()) return peak;

    const double x0 = pattern.angles_rad[best - 1];
    const double x1 = pattern.angles_rad[best];
    const double x2 = pattern.angles_rad[best + 1];
    const double y0 = pattern.power(best - 1);
    const double y1 = pattern.power(best);
    const double y2 = pattern.power(best + 1);
    // Vertex of the interpolating parabola (handles non-uniform spacing).
    const double d01 = (y1 - y0) / (x1 - x0);
    const double d12 = (y2 - y1) / (x2 - x1);
    const double curvature = (d12 - d01) / (x2 - x0);
    if (!(curvature < 0.0)) return peak;
    const double vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    if (vertex < x0 || vertex > x2) return peak;
    const double value = y0 + d01 * (vertex - x0) + curvature * (vertex - x0) * (vertex - x1);
    peak.angle_rad = vertex;
    peak.power = std::max(value, y1);
    return peak;
}

double beam_efficiency(const HarmonicExcitations& spectra, int harmonic, Side side) {
    const auto& exc = spectra.at(harmonic, side);
    if (exc.coefficients.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& c : exc.coefficients) sum += std::norm(c);
    return sum / static_cast<double>(exc.coefficients.size());
}

double angular_efficiency(const ArrayLayout& layout, const ExcitationVector& exc, int samples) {
    if (samples < 1) throw DomainError("need at least one integration sample");
    const double du = 2.0 / samples;
    double sum = 0.0;
    for (int s = 0; s < samples; ++s) {
        const double u = -1.0 + (s + 0.5) * du;
        sum += std::norm(array_factor(layout, exc, std::asin(u)));
    }
    return layout.count * (layout.pitch_m / layout.wavelength_m) * sum * du;
}

}  // namespace mmwall
