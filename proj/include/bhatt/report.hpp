#pragma once

#include <Eigen/Core>

namespace bhatt {

enum class BoundStatus { Finite, Divergent };

/// Shared tolerance knobs for all rank and range decisions.
///
/// tol_rank is the single relative singular-value cutoff used everywhere a
/// numerical rank is needed (bound matrices, existence systems, derivative
/// spans), so that divergence and nonexistence verdicts stay consistent.
struct Tolerances {
    double tol_rank = 1e-10;
    double tol_range = 1e-8;
};

/// Outcome of a variance lower-bound computation at a given order.
///
/// Finite reports carry the bound value, the maximizing coefficient vector
/// a = C+ lambda and the effective order (smallest order whose bound value
/// already equals this one). Divergent reports carry a certificate: a null
/// vector a' of the bound matrix with a'^T lambda = 1.
struct BoundReport {
    int order = 0;
    BoundStatus status = BoundStatus::Finite;
    double value = 0.0;
    Eigen::VectorXd maximizer;
    Eigen::VectorXd certificate;
    int effective_order = 0;

    bool finite() const { return status == BoundStatus::Finite; }
};

} // namespace bhatt
