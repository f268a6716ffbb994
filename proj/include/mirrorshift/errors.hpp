#pragma once

#include <stdexcept>
#include <string>

namespace mirrorshift {

/// Evaluation outside a trajectory's domain, or a non-finite derivative.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A quadrature or stepper failed to reach its tolerance within budget.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid configuration (bad parameter ranges, missing metadata).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace mirrorshift
