#include "mmwall/time_modulation.hpp"

#include <algorithm>
#include <exception>

#include <fmt/format.h>

namespace mmwall {

namespace {

// Sampled |F| local maxima are refined over +-one sample step.
constexpr int kPeakSamples = 512;
constexpr double kBiasSlack = 1e-9;  // volts

double shape_at_phase(const VoltageWaveform& w, double x) {
    double f = 0.0;
    for (int n = 1; n <= w.order(); ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        f += w.cos_coeffs[i] * std::cos(n * x) + w.sin_coeffs[i] * std::sin(n * x);
    }
    return f;
}

double golden_max(const VoltageWaveform& w, double lo, double hi) {
    const double inv_phi = 0.5 * (std::sqrt(5.0) - 1.0);
    auto g = [&](double x) { return std::abs(shape_at_phase(w, x)); };
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double gc = g(c), gd = g(d);
    for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
        if (gc > gd) {
            b = d; d = c; gd = gc;
            c = b - inv_phi * (b - a); gc = g(c);
        } else {
            a = c; c = d; gc = gd;
            d = a + inv_phi * (b - a); gd = g(d);
        }
    }
    return std::max({gc, gd, g(0.5 * (a + b))});
}

}  // namespace

VoltageWaveform VoltageWaveform::constant(double volts, double modulation_hz) {
    VoltageWaveform w;
    w.offset_v = volts;
    w.modulation_hz = modulation_hz;
    return w;
}

double VoltageWaveform::shape(double t) const {
    return shape_at_phase(*this, 2.0 * constants::pi * modulation_hz * t - phase_rad);
}

double VoltageWaveform::shape_peak() const {
    const double step = 2.0 * constants::pi / kPeakSamples;
    std::vector<double> mag(kPeakSamples);
    for (int s = 0; s < kPeakSamples; ++s) mag[s] = std::abs(shape_at_phase(*this, s * step));
    double peak = 0.0;
    for (int s = 0; s < kPeakSamples; ++s) {
        const double prev = mag[(s + kPeakSamples - 1) % kPeakSamples];
        const double next = mag[(s + 1) % kPeakSamples];
        if (mag[s] >= prev && mag[s] >= next && mag[s] > 0.0)
            peak = std::max(peak, golden_max(*this, (s - 1) * step, (s + 1) * step));
    }
    return peak;
}

VoltageWaveform VoltageWaveform::normalized() const {
    const double peak = shape_peak();
    if (!(peak > 1e-12)) return *this;
    VoltageWaveform w = *this;
    for (auto& a : w.cos_coeffs) a /= peak;
    for (auto& b : w.sin_coeffs) b /= peak;
    return w;
}

void VoltageWaveform::validate(double v_min, double v_max) const {
    if (order() < 1 || cos_coeffs.size() != sin_coeffs.size())
        throw DomainError("waveform needs matching cos/sin coefficient lists of order >= 1");
    if (!(modulation_hz > 0.0) || !std::isfinite(modulation_hz))
        throw DomainError("modulation frequency must be positive");
    if (!(amplitude_v >= 0.0)) throw DomainError("waveform amplitude must be non-negative");
    const double excursion = amplitude_v * shape_peak();
    if (offset_v - excursion < v_min - kBiasSlack || offset_v + excursion > v_max + kBiasSlack)
        throw RangeError(fmt::format("bias excursion [{}, {}] V leaves [{}, {}] V",
                                     offset_v - excursion, offset_v + excursion, v_min, v_max));
}

double waveform_value(const VoltageWaveform& w, double t) { return w.value(t); }

void ModulationSettings::validate(double carrier_hz, double modulation_hz) const {
    if (max_harmonic < 0) throw DomainError("max harmonic must be non-negative");
    if (samples_per_period < 4 * max_harmonic + 4)
        throw NyquistError(fmt::format("{} samples per period cannot resolve {} harmonics "
                                       "(need >= {})",
                                       samples_per_period, max_harmonic, 4 * max_harmonic + 4));
    if (!(modulation_hz > 0.0)) throw DomainError("modulation frequency must be positive");
    if (!(modulation_hz * guard_ratio < carrier_hz))
        throw DomainError(fmt::format("modulation {} Hz violates the quasi-static guard "
                                      "(must be < f_c / {})",
                                      modulation_hz, guard_ratio));
}

Complex HarmonicSpectrum::at(int h, Side side) const {
    if (!has(h))
        throw RangeError(fmt::format("harmonic {} outside [-{}, {}]", h, max_harmonic,
                                     max_harmonic));
    const auto i = static_cast<std::size_t>(h + max_harmonic);
    return side == Side::forward ? transmission[i] : reflection[i];
}

double HarmonicSpectrum::total_power(Side side) const {
    double sum = 0.0;
    for (const auto& c : side == Side::forward ? transmission : reflection) sum += std::norm(c);
    return sum;
}

std::vector<SheetResponse> sample_response(const VoltageWaveform& electric,
                                           const VoltageWaveform& magnetic,
                                           const ElementEvaluator& element, double carrier_hz,
                                           int samples_per_period) {
    if (samples_per_period < 1) throw DomainError("need at least one sample per period");
    if (electric.modulation_hz != magnetic.modulation_hz)
        throw DomainError("electric and magnetic waveforms must share Omega");
    const double lo = element.model().v_min();
    const double hi = element.model().v_max();
    auto bias = [&](const VoltageWaveform& w, int s, double t, const char* line) {
        const double v = w.value(t);
        if (!(v >= lo - kBiasSlack && v <= hi + kBiasSlack))
            throw ClippingError(fmt::format("{} bias {} V at sample {} (t = {} s) outside "
                                            "[{}, {}] V",
                                            line, v, s, t, lo, hi),
                                s, t);
        return std::clamp(v, lo, hi);
    };

    std::vector<SheetResponse> out;
    out.reserve(static_cast<std::size_t>(samples_per_period));
    const double dt = electric.period_s() / samples_per_period;
    for (int s = 0; s < samples_per_period; ++s) {
        const double t = s * dt;
        const VoltagePair pair{bias(electric, s, t, "electric"), bias(magnetic, s, t, "magnetic")};
        out.push_back(element(pair, carrier_hz));
    }
    return out;
}

std::vector<SheetResponse> sample_response(const VoltageWaveform& electric,
                                           const VoltageWaveform& magnetic,
                                           const ElementModel& model, double carrier_hz,
                                           int samples_per_period) {
    return sample_response(electric, magnetic, ElementEvaluator(model), carrier_hz,
                           samples_per_period);
}

std::vector<Complex> harmonic_coefficients(std::span<const Complex> series, int max_harmonic) {
    const auto s_count = static_cast<long>(series.size());
    if (s_count == 0) throw DomainError("empty time series");
    if (max_harmonic < 0) throw DomainError("max harmonic must be non-negative");
    if (2L * max_harmonic >= s_count)
        throw NyquistError(fmt::format("harmonic {} needs more than {} samples", max_harmonic,
                                       s_count));

    // Twiddles by exact integer phase index (h s mod S) to avoid growing arguments.
    std::vector<Complex> twiddle(static_cast<std::size_t>(s_count));
    for (long k = 0; k < s_count; ++k)
        twiddle[static_cast<std::size_t>(k)] =
            cis(-2.0 * constants::pi * static_cast<double>(k) / static_cast<double>(s_count));

    std::vector<Complex> coeffs(static_cast<std::size_t>(2 * max_harmonic + 1));
    for (int h = -max_harmonic; h <= max_harmonic; ++h) {
        Complex acc{0.0, 0.0};
        const long step = ((h % s_count) + s_count) % s_count;
        long k = 0;
        for (long s = 0; s < s_count; ++s) {
            acc += series[static_cast<std::size_t>(s)] * twiddle[static_cast<std::size_t>(k)];
            k += step;
            if (k >= s_count) k -= s_count;
        }
        coeffs[static_cast<std::size_t>(h + max_harmonic)] = acc / static_cast<double>(s_count);
    }
    return coeffs;
}

HarmonicSpectrum harmonic_decompose(std::span<const SheetResponse> series, int max_harmonic,
                                    double carrier_hz, double modulation_hz) {
    std::vector<Complex> t(series.size()), r(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        t[i] = series[i].t;
        r[i] = series[i].r;
    }
    HarmonicSpectrum spec;
    spec.max_harmonic = max_harmonic;
    spec.transmission = harmonic_coefficients(t, max_harmonic);
    spec.reflection = harmonic_coefficients(r, max_harmonic);
    spec.carrier_hz = carrier_hz;
    spec.modulation_hz = modulation_hz;
    return spec;
}

HarmonicSpectrum element_spectrum(const ElementDrive& drive, const ElementEvaluator& element,
                                  double carrier_hz, const ModulationSettings& settings) {
    settings.validate(carrier_hz, drive.electric.modulation_hz);
    const auto series = sample_response(drive.electric, drive.magnetic, element, carrier_hz,
                                        settings.samples_per_period);
    HarmonicSpectrum spec = harmonic_decompose(series, settings.max_harmonic, carrier_hz,
                                               drive.electric.modulation_hz);
    if (drive.carrier_phase_rad != 0.0) {
        const Complex rot = cis(drive.carrier_phase_rad);
        for (auto& c : spec.transmission) c *= rot;
        for (auto& c : spec.reflection) c *= rot;
    }
    return spec;
}

HarmonicExcitations per_element_spectra(std::span<const ElementDrive> drives,
                                        const ElementModel& model, double carrier_hz,
                                        const ModulationSettings& settings, Execution exec) {
    if (drives.empty()) throw DomainError("surface needs at least one element drive");
    const double omega = drives.front().electric.modulation_hz;
    for (const auto& d : drives)
        if (d.electric.modulation_hz != omega || d.magnetic.modulation_hz != omega)
            throw DomainError("all elements must share the modulation frequency");
    settings.validate(carrier_hz, omega);

    const ElementEvaluator element(model);
    const auto n = static_cast<long>(drives.size());
    std::vector<HarmonicSpectrum> spectra(drives.size());
    if (exec == Execution::parallel) {
        // Exceptions must not escape the parallel region; rethrow the first one.
        std::exception_ptr failure;
#pragma omp parallel for schedule(static)
        for (long i = 0; i < n; ++i) {
            try {
                spectra[i] = element_spectrum(drives[i], element, carrier_hz, settings);
            } catch (...) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (long i = 0; i < n; ++i)
            spectra[i] = element_spectrum(drives[i], element, carrier_hz, settings);
    }

    const int H = settings.max_harmonic;
    HarmonicExcitations out;
    out.max_harmonic = H;
    out.forward.resize(static_cast<std::size_t>(2 * H + 1));
    out.backward.resize(static_cast<std::size_t>(2 * H + 1));
    for (int h = -H; h <= H; ++h) {
        auto& fwd = out.forward[static_cast<std::size_t>(h + H)];
        auto& bwd = out.backward[static_cast<std::size_t>(h + H)];
        fwd.side = Side::forward;
        bwd.side = Side::backward;
        fwd.coefficients.reserve(spectra.size());
        bwd.coefficients.reserve(spectra.size());
        for (const auto& s : spectra) {
            fwd.coefficients.push_back(s.at(h, Side::forward));
            bwd.coefficients.push_back(s.at(h, Side::backward));
        }
    }
    return out;
}

}  // namespace mmwall
