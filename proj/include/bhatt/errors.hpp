#pragma once

#include <stdexcept>
#include <string>

namespace bhatt {

/// Parameter value outside the model's valid open interval, or an
/// otherwise out-of-contract argument.
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Fewer than two support points survive pruning.
struct DegenerateModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A finite-difference stencil would leave the model domain.
struct StepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Saturating estimator requested for a divergent bound.
struct DivergentBound : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Density-matrix derivative has significant weight outside the state's
/// support, so the Lyapunov equation for the SLD has no solution there.
struct SupportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Estimator and model disagree on the outcome space.
struct SupportMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Curves evaluated on different grids, or an interval not covered by one.
struct GridMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bessel normalization sum underflowed.
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace bhatt
