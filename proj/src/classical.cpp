#include "bhatt/classical.hpp"

#include <cmath>

#include "bhatt/errors.hpp"

namespace bhatt {

double fisher_information(const DerivativeStack& stack) {
    if (stack.order < 1) throw DomainError("fisher_information: stack order must be >= 1");
    double acc = 0.0;
    for (int j = 0; j < stack.cols(); ++j) {
        const double d = stack.table(1, j);
        acc += d * d / stack.table(0, j);
    }
    return acc;
}

BhattMatrix bhatt_matrix(const DerivativeStack& stack, int order) {
    if (order < 1) throw DomainError("bhatt_matrix: order must be >= 1");
    if (order > stack.order) throw DomainError("bhatt_matrix: stack holds fewer derivatives");

    BhattMatrix C;
    C.order = order;
    C.theta0 = stack.theta0;
    C.entries.resize(order, order);
    for (int k = 1; k <= order; ++k) {
        for (int l = k; l <= order; ++l) {
            double acc = 0.0;
            for (int j = 0; j < stack.cols(); ++j) {
                acc += stack.table(k, j) * stack.table(l, j) / stack.table(0, j);
            }
            C.entries(k - 1, l - 1) = acc;
            C.entries(l - 1, k - 1) = acc;
        }
    }
    return C;
}

BoundReport bhatt_bound(const BhattMatrix& C, const Tolerances& tol) {
    return gram_bound(C.entries, tol);
}

BoundReport cramer_rao(const DerivativeStack& stack, const Tolerances& tol) {
    return bhatt_bound(bhatt_matrix(stack, 1), tol);
}

EstimatorTable bhatt_estimator(const DerivativeStack& stack, const BhattMatrix& C,
                               const Tolerances& tol) {
    BoundReport rep = bhatt_bound(C, tol);
    if (rep.status != BoundStatus::Finite) {
        throw DivergentBound("bhatt_estimator: bound is divergent at order " +
                             std::to_string(C.order));
    }
    EstimatorTable est;
    est.theta0 = stack.theta0;
    est.satisfied_order = C.order;
    est.kept_indices = stack.kept_indices;
    est.values.resize(stack.cols());
    for (int j = 0; j < stack.cols(); ++j) {
        double corr = 0.0;
        for (int k = 1; k <= C.order; ++k) {
            corr += rep.maximizer(k - 1) * stack.table(k, j);
        }
        est.values(j) = stack.theta0 + corr / stack.table(0, j);
    }
    return est;
}

LinearSystem existence_system(const DerivativeStack& stack, int order) {
    if (order < 0) throw DomainError("existence_system: order must be >= 0");
    if (order > stack.order) throw DomainError("existence_system: stack holds fewer derivatives");

    LinearSystem sys;
    sys.A = stack.table.topRows(order + 1);
    sys.b = Eigen::VectorXd::Zero(order + 1);
    sys.b(0) = stack.theta0;
    if (order >= 1) sys.b(1) = 1.0;
    sys.theta0 = stack.theta0;
    sys.kept_indices = stack.kept_indices;
    sys.order = order;
    return sys;
}

SolveResult solve_estimator(const LinearSystem& system, double tol_rank) {
    MinNormSolution sol = min_norm_solve(system.A, system.b, tol_rank);
    SolveResult out;
    out.solvable = sol.consistent;
    out.residual = sol.residual;
    if (sol.consistent) {
        out.estimator.theta0 = system.theta0;
        out.estimator.values = sol.x;
        out.estimator.kept_indices = system.kept_indices;
        out.estimator.satisfied_order = system.order;
    } else {
        out.witness = sol.witness;
    }
    return out;
}

int max_nontrivial_order(const DerivativeStack& stack, double tol_rank) {
    if (stack.order < 1) throw DomainError("max_nontrivial_order: stack order must be >= 1");
    // Score rows d^k P / sqrt(P) share their Gram matrix with C, so their
    // numerical rank is the order past which no new information appears.
    Eigen::MatrixXd scores(stack.order, stack.cols());
    for (int k = 1; k <= stack.order; ++k) {
        for (int j = 0; j < stack.cols(); ++j) {
            scores(k - 1, j) = stack.table(k, j) / std::sqrt(stack.table(0, j));
        }
    }
    const int r = numerical_rank(scores, tol_rank);
    return std::min(r, stack.cols() - 1);
}

Eigen::VectorXd estimator_condition_residuals(const DerivativeStack& stack,
                                              const EstimatorTable& est, int order) {
    if (est.values.size() != stack.cols()) {
        throw SupportMismatch("estimator_condition_residuals: estimator/stack size mismatch");
    }
    if (order > stack.order) {
        throw DomainError("estimator_condition_residuals: stack holds fewer derivatives");
    }
    Eigen::VectorXd res(order + 1);
    for (int k = 0; k <= order; ++k) {
        res(k) = stack.table.row(k) * est.values;
    }
    res(0) -= stack.theta0;
    if (order >= 1) res(1) -= 1.0;
    return res;
}

} // namespace bhatt
