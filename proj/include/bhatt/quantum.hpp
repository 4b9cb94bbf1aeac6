#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bhatt/report.hpp"

namespace bhatt {

/// Density matrix at theta0 together with its theta-derivatives
/// d^k rho for k = 1..order().
struct DensityStack {
    int dim = 0;
    double theta0 = 0.0;
    Eigen::MatrixXcd rho;
    std::vector<Eigen::MatrixXcd> derivs;

    int order() const { return static_cast<int>(derivs.size()); }
    const Eigen::MatrixXcd& deriv(int k) const { return derivs.at(static_cast<size_t>(k) - 1); }

    /// Enforce the stack invariants (hermiticity, unit trace, positivity,
    /// traceless derivatives); throws DomainError on violation.
    void validate() const;
};

/// Generalized symmetric logarithmic derivatives L_l, l = 1..n, each
/// solving d^l rho = (rho L_l + L_l rho) / 2 on the support of rho.
struct SLDSet {
    std::vector<Eigen::MatrixXcd> operators;
    int support_rank = 0;
};

/// Quantum analog of the Bhattacharyya matrix: Q_kl = Re Tr(d^k rho L_l).
struct QMatrix {
    int order = 0;
    double theta0 = 0.0;
    Eigen::MatrixXd entries;
};

/// Measurement-plus-processing estimator as a single Hermitian operator.
struct HermitianEstimator {
    Eigen::MatrixXcd op;
    int satisfied_order = 0;
};

/// Real-vectorized constraint system for Hermitian estimators. The N^2 real
/// unknowns are the N diagonal entries plus (Re, Im) of each upper-triangle
/// entry; every constraint Tr[d^k rho Theta] is real for Hermitian
/// arguments, so the system is (order+1) x N^2 over the reals. The
/// complex-variable count N(N+1)/2 used for the order-cap statement is
/// reported separately by q_order_cap().
struct HermitianSystem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    int dim = 0;
    double theta0 = 0.0;
    int order = 0;
};

struct QuantumSolveResult {
    bool solvable = false;
    HermitianEstimator estimator;
    Eigen::VectorXd witness;
    double residual = 0.0;
};

/// Solve the Lyapunov equation drho = (rho L + L rho)/2 for Hermitian L via
/// the eigenbasis of rho: L_ij = 2 <i|drho|j> / (p_i + p_j) wherever
/// p_i + p_j > tol_eig, zero elsewhere. Throws SupportError when drho has
/// weight >= 1e-8 * (1 + ||drho||_F) on the excluded pairs.
Eigen::MatrixXcd sld(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho,
                     double tol_eig = 1e-12);

/// Quantum Fisher information Tr[rho L^2].
double qfi(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& L);

SLDSet sld_set(const DensityStack& stack, int order, double tol_eig = 1e-12);

QMatrix q_matrix(const DensityStack& stack, int order, double tol_eig = 1e-12);

/// Order-n quantum Bhattacharyya bound; same range-test logic as the
/// classical bound applied to Q.
BoundReport q_bhatt_bound(const QMatrix& Q, const Tolerances& tol = {});

HermitianSystem hermitian_existence_system(const DensityStack& stack, int order);

QuantumSolveResult solve_quantum_estimator(const HermitianSystem& system,
                                           double tol_rank = 1e-10);

/// Saturating operator estimator theta0 I + sum_k (Q+ lambda)_k L_k.
/// Throws DivergentBound when the bound is divergent.
HermitianEstimator q_bhatt_estimator(const DensityStack& stack, const QMatrix& Q,
                                     double tol_eig = 1e-12, const Tolerances& tol = {});

/// Eigenprojectors of the SLD, grouped by eigenvalue within a degeneracy
/// tolerance of 1e-9 times the spectral radius. Projecting onto this basis
/// is the measurement that saturates the quantum Cramer-Rao bound.
std::vector<Eigen::MatrixXcd> optimal_measurement(const Eigen::MatrixXcd& L);

/// Numerical rank of {d^1 rho, ..., d^n rho} viewed as real vectors in
/// Hermitian-matrix space.
int q_max_nontrivial_order(const DensityStack& stack, double tol_rank = 1e-10);

/// The dimension-based cap N(N+1)/2 - 1 on nontrivial quantum orders.
int q_order_cap(int dim);

/// Residuals of (Tr[rho T] - theta0, Tr[d rho T] - 1, Tr[d^l rho T]).
Eigen::VectorXd quantum_condition_residuals(const DensityStack& stack,
                                            const HermitianEstimator& est, int order);

/// Density-stack text format: header "# quantum N=<dim> theta0=<v> order=<n>",
/// then rho and each d^k rho as N rows of N whitespace-separated "re im" pairs.
DensityStack load_density_stack(std::istream& in);
DensityStack load_density_stack_file(const std::string& path);

} // namespace bhatt
