#pragma once

#include <stdexcept>
#include <string>

namespace wavestrip {

/// Base class for all errors thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration or malformed input file.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

/// Admissibility margins of a state: all three must be positive for the
/// state to be inside the open set the solver operates on.
struct Margins {
    double min_k = 0.0;            // min of the conformal factor K(w)
    double min_stagnation = 0.0;   // min of sigma*(S dA/dy + lambda)
    double greatest_height = 0.0;  // min of q + lambda^2/2 - g*w
    bool admissible() const {
        return min_k > 0.0 && min_stagnation > 0.0 && greatest_height > 0.0;
    }
};

/// Thrown when an operation requires an admissible state and gets one that
/// violates at least one margin. Carries all three margins for diagnostics.
class AdmissibilityError : public Error {
public:
    Margins margins;
    AdmissibilityError(const std::string& msg, const Margins& m)
        : Error(msg), margins(m) {}
};

/// Numerical failure (integrator blow-up, singular system, no convergence).
class NumericsError : public Error {
public:
    explicit NumericsError(const std::string& msg) : Error(msg) {}
};

} // namespace wavestrip
