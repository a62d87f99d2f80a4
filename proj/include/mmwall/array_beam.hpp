#pragma once

// Far-field array factor of a uniform line of N elements.
//
// Angles are measured from broadside (0 = normal to the wall), so the
// progressive phase between elements is k d sin(theta). The factor is
// normalized by 1/N: a uniform unit-amplitude beam peaks at exactly 1.

#include <span>
#include <vector>

#include "mmwall/common.hpp"

namespace mmwall {

struct ArrayLayout {
    int count = 20;
    double pitch_m = 6.25e-3;
    double wavelength_m = constants::c_light / 24e9;

    /// Half-wavelength pitch at f_hz.
    static ArrayLayout half_wave(int count, double f_hz);

    double wavenumber() const { return 2.0 * constants::pi / wavelength_m; }
    void validate() const;
};

struct ExcitationVector {
    std::vector<Complex> coefficients;
    Side side = Side::forward;

    std::size_t size() const { return coefficients.size(); }
    void validate(const ArrayLayout& layout) const;
};

struct BeamPattern {
    std::vector<double> angles_rad;
    std::vector<Complex> field;
    int harmonic = 0;
    Side side = Side::forward;

    double power(std::size_t i) const { return std::norm(field[i]); }
    std::size_t size() const { return angles_rad.size(); }
};

/// Per-harmonic excitation vectors for both sides, harmonics -H..H.
struct HarmonicExcitations {
    int max_harmonic = 0;
    std::vector<ExcitationVector> forward;   // index h + H
    std::vector<ExcitationVector> backward;  // index h + H

    bool has(int h) const { return h >= -max_harmonic && h <= max_harmonic; }
    const ExcitationVector& at(int h, Side side) const;
};

Complex array_factor(const ArrayLayout& layout, const ExcitationVector& exc, double theta_rad);
/// Same sum at a direction sine u; |u| > 1 is allowed (oblique-incidence offsets).
Complex array_factor_at_sine(const ArrayLayout& layout, const ExcitationVector& exc, double u);

/// phi_n = -k n d sin(theta): uniform excitation then peaks at theta.
std::vector<double> steer_phases(const ArrayLayout& layout, double theta_rad);

/// phi_n = -k n d u for a direction sine u (|u| may exceed 1 under oblique incidence).
std::vector<double> progressive_phases(const ArrayLayout& layout, double sine);

/// Unit-amplitude excitation with the given per-element phases.
ExcitationVector phased_excitation(std::span<const double> phases, Side side = Side::forward);

/// Equispaced angles covering [-pi/2, pi/2] inclusive.
std::vector<double> angle_grid(double step_rad);

BeamPattern evaluate_pattern(const ArrayLayout& layout, const ExcitationVector& exc,
                             std::span<const double> angles_rad, int harmonic = 0,
                             Execution exec = Execution::parallel);

struct Peak {
    double angle_rad = 0.0;
    double power = 0.0;
};

// Global maximum of |AF|^2, refined by a parabola through the three samples
// around the discrete maximum.
Peak find_peak(const BeamPattern& pattern);

// Fraction of incident power carried by harmonic h on `side`:
// sum_n |c_n|^2 / N. Throws RangeError for an unknown harmonic.
double beam_efficiency(const HarmonicExcitations& spectra, int harmonic, Side side);

// Cross-check of beam_efficiency by integrating |AF|^2 over u = sin(theta)
// in [-1, 1] with `samples` midpoints. Exact when 2d/lambda is an integer.
double angular_efficiency(const ArrayLayout& layout, const ExcitationVector& exc,
                          int samples = 4096);

}  // namespace mmwall
