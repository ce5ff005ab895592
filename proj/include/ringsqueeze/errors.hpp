#pragma once

#include <stdexcept>
#include <string>

namespace ringsqueeze {

// Error taxonomy. Every failure the library can diagnose maps onto one of
// these types; the C API flattens them to stable integer codes.

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Configuration rejected by the validator.
struct ConfigError : Error { using Error::Error; };

// Coupler with |s^2 + c^2 - 1| beyond tolerance, or out-of-range values.
struct InvalidCoupling : ConfigError { using ConfigError::ConfigError; };

// A physical coupler position has no phantom site on that ring.
struct MisalignedPhantom : ConfigError { using ConfigError::ConfigError; };

// Two spectral bins overlap in angular frequency.
struct BinOverlap : ConfigError { using ConfigError::ConfigError; };

// Wavenumber outside the invertible branch of the dispersion model.
struct BranchOverflow : Error { using Error::Error; };

// Linear network solve failed (singular cascade matrix, bad conditioning).
struct NetworkSolveError : Error { using Error::Error; };

// Truncated exponential series failed to converge.
struct SeriesDiverged : Error { using Error::Error; };

// Pump integrator produced non-finite values or grew without bound.
struct StepUnstable : Error { using Error::Error; };

// Pump pulse spectrum is not contained in its assigned bin.
struct PulseNotContained : Error { using Error::Error; };

// Covariance matrix failed a positivity / uncertainty check.
struct NotPhysical : Error { using Error::Error; };

// At least one sweep point failed while others completed.
struct PartialFailure : Error { using Error::Error; };

} // namespace ringsqueeze
