#pragma once

#include <vector>

#include <Eigen/Core>

#include "bhatt/linalg.hpp"
#include "bhatt/model.hpp"
#include "bhatt/report.hpp"

namespace bhatt {

/// Gram matrix C_kl = sum_i d^k P(x_i) d^l P(x_i) / P(x_i), k,l = 1..order.
/// entries(k-1, l-1) holds C_kl.
struct BhattMatrix {
    int order = 0;
    double theta0 = 0.0;
    Eigen::MatrixXd entries;
};

/// Estimator as a value table over the kept support points.
struct EstimatorTable {
    double theta0 = 0.0;
    Eigen::VectorXd values;
    std::vector<int> kept_indices;
    int satisfied_order = 0;
};

/// Unbiasedness-condition system A x = b: rows are the stack rows
/// (P; dP; ...; d^n P) over kept points, b = (theta0, 1, 0, ..., 0).
struct LinearSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double theta0 = 0.0;
    std::vector<int> kept_indices;
    int order = 0;
};

/// Existence verdict for the unbiasedness system.
struct SolveResult {
    bool solvable = false;
    EstimatorTable estimator;   // valid when solvable
    Eigen::VectorXd witness;    // left null vector w with w^T b != 0 otherwise
    double residual = 0.0;
};

/// Classical Fisher information sum_i (dP_i)^2 / P_i over kept points.
double fisher_information(const DerivativeStack& stack);

/// Cramer-Rao bound; identical to the order-1 Bhattacharyya bound.
BoundReport cramer_rao(const DerivativeStack& stack, const Tolerances& tol = {});

BhattMatrix bhatt_matrix(const DerivativeStack& stack, int order);

/// Order-n Bhattacharyya bound from its Gram matrix. Divergence is a
/// status, not an error; the certificate witnesses the unbounded direction.
BoundReport bhatt_bound(const BhattMatrix& C, const Tolerances& tol = {});

/// Saturating estimator theta0 + sum_k (C+ lambda)_k d^k P(x_i) / P(x_i).
/// Throws DivergentBound when lambda is outside range(C).
EstimatorTable bhatt_estimator(const DerivativeStack& stack, const BhattMatrix& C,
                               const Tolerances& tol = {});

/// Build the unbiasedness system for orders 0..n (n = 0 is plain
/// unbiasedness, always solvable for N >= 2).
LinearSystem existence_system(const DerivativeStack& stack, int order);

/// Rouche-Frobenius solvability test; minimum-norm solution when solvable.
SolveResult solve_estimator(const LinearSystem& system, double tol_rank = 1e-10);

/// Numerical rank of the score rows d^k P / sqrt(P), k = 1..stack order,
/// capped at kept-support-size - 1. Bounds beyond this order are divergent
/// or repeat the value at this order.
int max_nontrivial_order(const DerivativeStack& stack, double tol_rank = 1e-10);

/// Residuals of the unbiasedness conditions evaluated through the stack
/// rows: (<est> - theta0, d<est> - 1, d^2<est>, ..., d^n<est>).
Eigen::VectorXd estimator_condition_residuals(const DerivativeStack& stack,
                                              const EstimatorTable& est, int order);

} // namespace bhatt
