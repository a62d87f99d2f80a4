#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace mmwall {

using Complex = std::complex<double>;

namespace constants {
inline constexpr double epsilon0 = 8.8541878128e-12;  // F/m
inline constexpr double mu0 = 1.25663706212e-6;       // H/m
inline constexpr double c_light = 2.99792458e8;       // m/s
inline constexpr double eta0 = 376.730313668;         // ohm
inline constexpr double pi = std::numbers::pi;
}  // namespace constants

// Selects between the OpenMP kernels and their serial reference versions.
// Both paths produce bit-identical results; the serial one is kept for tests.
enum class Execution { serial, parallel };

// forward = transmitted half-space (lens), backward = reflected half-space (mirror).
enum class Side { forward, backward };

enum class RelayMode { lens, mirror };

inline const char* to_string(Side s) { return s == Side::forward ? "forward" : "backward"; }
inline const char* to_string(RelayMode m) { return m == RelayMode::lens ? "lens" : "mirror"; }

inline double deg2rad(double deg) { return deg * constants::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / constants::pi; }

// Wraps to [-pi, pi).
inline double wrap_phase(double x) {
    double y = std::fmod(x + constants::pi, 2.0 * constants::pi);
    if (y < 0) y += 2.0 * constants::pi;
    return y - constants::pi;
}

inline Complex cis(double phase) { return {std::cos(phase), std::sin(phase)}; }

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure the library reports derives from Error.
// ---------------------------------------------------------------------------
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, double f_low, double f_high)
        : Error(what), bracket_low_hz(f_low), bracket_high_hz(f_high) {}
    double bracket_low_hz;
    double bracket_high_hz;
};

class DivergenceError : public Error {
public:
    using Error::Error;
};

class CoverageGapError : public Error {
public:
    CoverageGapError(const std::string& what, double best_phase)
        : Error(what), best_phase_rad(best_phase) {}
    double best_phase_rad;
};

class ClippingError : public Error {
public:
    ClippingError(const std::string& what, int sample, double time_s)
        : Error(what), sample_index(sample), sample_time_s(time_s) {}
    int sample_index;
    double sample_time_s;
};

class NyquistError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class ConfigurationError : public Error {
public:
    using Error::Error;
};

}  // namespace mmwall
