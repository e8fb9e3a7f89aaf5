#pragma once

#include <stdexcept>
#include <string>

namespace bsde {

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Iteration failure or non-finite values during a numerical step.
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& what, double residual = 0.0)
        : std::runtime_error(what), residual(residual) {}
    double residual;
};

/// Implicit step is not a contraction: theta*delta*K >= 1.
struct StepSizeError : NumericalError {
    StepSizeError(const std::string& what, double delta_k)
        : NumericalError(what, delta_k), delta_k(delta_k) {}
    double delta_k;
};

struct ResourceError : std::runtime_error {
    ResourceError(const std::string& what, int n)
        : std::runtime_error(what), n(n) {}
    int n;
};

struct UnsupportedProblem : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace bsde
