#pragma once

#include <stdexcept>
#include <string>

namespace ergomix {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad norm/representation pairing, schema violation, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// A mathematical parameter condition is violated (e.g. |b| >= |d|).
struct ParameterError : Error {
    using Error::Error;
};

/// Mixed representation kinds or incompatible bases in a vector operation.
struct TypeError : Error {
    using Error::Error;
};

/// Adaptive quadrature failed to converge within the panel cap.
struct QuadratureError : Error {
    QuadratureError(const std::string& msg, double prev_estimate, double last_estimate)
        : Error(msg), prev_estimate_norm(prev_estimate), last_estimate_norm(last_estimate) {}
    double prev_estimate_norm = 0.0;
    double last_estimate_norm = 0.0;
};

/// NaN/Inf encountered in numerical data.
struct NumericError : Error {
    using Error::Error;
};

/// A state was shifted outside the representable domain.
struct DomainOverflowError : Error {
    using Error::Error;
};

/// A model function no longer covers the window required by an operation.
struct CoverageError : Error {
    using Error::Error;
};

/// Requested point lies outside a model function's window.
struct RangeError : Error {
    using Error::Error;
};

/// Eigenvector tail mass above threshold at the configured truncation.
struct TruncationError : Error {
    using Error::Error;
};

/// Truncation calibration could not reach the requested tolerance.
struct CalibrationError : Error {
    CalibrationError(const std::string& msg, double achieved)
        : Error(msg), achieved_tail(achieved) {}
    double achieved_tail = 0.0;
};

/// Requested spectral parameter is outside the attainable window.
struct SpectralRangeError : Error {
    SpectralRangeError(const std::string& msg, double lo, double hi)
        : Error(msg), window_lo(lo), window_hi(hi) {}
    double window_lo = 0.0;
    double window_hi = 0.0;
};

}  // namespace ergomix
