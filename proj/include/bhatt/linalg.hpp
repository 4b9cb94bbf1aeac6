#pragma once

#include <Eigen/Core>

#include "bhatt/report.hpp"

namespace bhatt {

/// Result of a rank-revealing least-squares solve of A x = b.
struct MinNormSolution {
    bool consistent = false;
    Eigen::VectorXd x;        // minimum-norm solution (consistent case)
    Eigen::VectorXd witness;  // left null vector w of A with w^T b != 0 (inconsistent case)
    double residual = 0.0;    // ||A x - b|| of the returned solution
    int rank = 0;
    int rank_augmented = 0;
};

/// Numerical rank with relative threshold tol_rank * sigma_max.
int numerical_rank(const Eigen::MatrixXd& A, double tol_rank);

/// Pseudo-inverse application: x = A+ b with singular values below
/// tol_rank * sigma_max treated as zero.
Eigen::VectorXd pinv_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           double tol_rank, int* rank_out = nullptr);

/// Rouche-Frobenius consistency test plus minimum-norm solve.
///
/// Rows are equilibrated to unit infinity norm before the rank decisions so
/// that systems mixing rows of very different magnitudes (e.g. probability
/// rows next to high-order derivative rows) get balanced verdicts. The
/// solution set is unchanged by the scaling; the reported residual is
/// measured against the original system.
MinNormSolution min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double tol_rank);

/// Variance lower bound from a symmetric PSD Gram matrix G of score rows:
/// sup_a (a^T lambda)^2 / (a^T G a) with lambda = e1.
///
/// Finite exactly when lambda lies in range(G); the value is then
/// lambda^T G+ lambda and the maximizer a = G+ lambda. Otherwise the
/// supremum is infinite and the report carries a null-space certificate a'
/// with G a' = 0 and a'^T lambda = 1. The effective order is found by
/// re-evaluating the bound on leading principal submatrices.
BoundReport gram_bound(const Eigen::MatrixXd& G, const Tolerances& tol);

} // namespace bhatt
