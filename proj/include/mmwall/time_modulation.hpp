#pragma once

// Periodic bias modulation of an element and its harmonic sidebands.
//
// Each bias line carries U(t) = U_amp F(t) + U_off with
//   F(t) = sum_n a_n cos(n(2 pi Omega t - phi)) + b_n sin(n(2 pi Omega t - phi)),
// normalized so that max |F| = 1. Since Omega << f_c the element follows the
// bias quasi-statically; sampling one period and taking discrete Fourier
// coefficients yields the sideband amplitudes at f_c + h Omega.

#include <span>
#include <vector>

#include "mmwall/array_beam.hpp"
#include "mmwall/sheet_response.hpp"

namespace mmwall {

struct VoltageWaveform {
    double amplitude_v = 0.0;
    double offset_v = 0.0;
    std::vector<double> cos_coeffs{0.0};  // a_1 .. a_Nh
    std::vector<double> sin_coeffs{0.0};  // b_1 .. b_Nh
    double phase_rad = 0.0;
    double modulation_hz = 30e6;

    static VoltageWaveform constant(double volts, double modulation_hz);

    int order() const { return static_cast<int>(cos_coeffs.size()); }
    double period_s() const { return 1.0 / modulation_hz; }

    /// F(t), the unscaled Fourier series.
    double shape(double t) const;
    double value(double t) const { return amplitude_v * shape(t) + offset_v; }

    /// max |F| over one period (golden-section refined around the best sample).
    double shape_peak() const;
    /// Copy with coefficients rescaled so max |F| = 1; unchanged if F vanishes.
    VoltageWaveform normalized() const;

    /// Checks order, Omega > 0, U_amp >= 0 and U_off +- U_amp inside [v_min, v_max].
    void validate(double v_min, double v_max) const;
};

double waveform_value(const VoltageWaveform& w, double t);

struct ModulationSettings {
    int max_harmonic = 8;
    int samples_per_period = 256;
    double guard_ratio = 100.0;  // require Omega < f_c / guard_ratio

    void validate(double carrier_hz, double modulation_hz) const;
};

struct HarmonicSpectrum {
    int max_harmonic = 0;
    std::vector<Complex> transmission;  // index h + H
    std::vector<Complex> reflection;    // index h + H
    double carrier_hz = 0.0;
    double modulation_hz = 0.0;

    bool has(int h) const { return h >= -max_harmonic && h <= max_harmonic; }
    Complex at(int h, Side side) const;
    double power(int h, Side side) const { return std::norm(at(h, side)); }
    /// Sum of |c_h|^2 over all retained harmonics on one side.
    double total_power(Side side) const;
};

// Instantaneous responses at S equispaced instants over one modulation period.
// Both waveforms must share Omega. A bias outside the varactor range raises
// ClippingError naming the first offending sample.
std::vector<SheetResponse> sample_response(const VoltageWaveform& electric,
                                           const VoltageWaveform& magnetic,
                                           const ElementEvaluator& element, double carrier_hz,
                                           int samples_per_period);

std::vector<SheetResponse> sample_response(const VoltageWaveform& electric,
                                           const VoltageWaveform& magnetic,
                                           const ElementModel& model, double carrier_hz,
                                           int samples_per_period);

/// c_h = (1/S) sum_s x_s exp(-j 2 pi h s / S) for |h| <= H. Requires H < S/2.
std::vector<Complex> harmonic_coefficients(std::span<const Complex> series, int max_harmonic);

HarmonicSpectrum harmonic_decompose(std::span<const SheetResponse> series, int max_harmonic,
                                    double carrier_hz = 0.0, double modulation_hz = 0.0);

/// Bias drive for one element pair. carrier_phase_rad rotates every harmonic
/// equally and is only set by the experimental dual-gradient steering.
struct ElementDrive {
    VoltageWaveform electric;
    VoltageWaveform magnetic;
    double carrier_phase_rad = 0.0;
};

HarmonicSpectrum element_spectrum(const ElementDrive& drive, const ElementEvaluator& element,
                                  double carrier_hz, const ModulationSettings& settings);

// Excitation vectors {c_h^(n)} for every harmonic and side, one entry per
// element. Elements are independent; the parallel path maps them with OpenMP.
HarmonicExcitations per_element_spectra(std::span<const ElementDrive> drives,
                                        const ElementModel& model, double carrier_hz,
                                        const ModulationSettings& settings = {},
                                        Execution exec = Execution::parallel);

}  // namespace mmwall
