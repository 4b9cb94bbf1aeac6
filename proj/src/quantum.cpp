#include "bhatt/quantum.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <complex>
#include <fstream>
#include <sstream>

#include "bhatt/errors.hpp"
#include "bhatt/linalg.hpp"

namespace bhatt {

namespace {

double hermiticity_defect(const Eigen::MatrixXcd& M) {
    return (M - M.adjoint()).cwiseAbs().maxCoeff();
}

Eigen::MatrixXcd hermitize(const Eigen::MatrixXcd& M) {
    return 0.5 * (M + M.adjoint());
}

// Real vectorization of a Hermitian matrix: N diagonal entries, then
// (2 Re, 2 Im) of each strict upper-triangle entry. The factor 2 makes
// Tr[M T] a plain dot product of the two vectorizations with the estimator
// parameters (x, y) where T_ij = x_ij + i y_ij for i < j.
Eigen::VectorXd vec_constraint_row(const Eigen::MatrixXcd& M) {
    const int n = static_cast<int>(M.rows());
    Eigen::VectorXd v(n * n);
    int idx = 0;
    for (int i = 0; i < n; ++i) v(idx++) = M(i, i).real();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            v(idx++) = 2.0 * M(i, j).real();
            v(idx++) = 2.0 * M(i, j).imag();
        }
    }
    return v;
}

Eigen::MatrixXcd unvec_hermitian(const Eigen::VectorXd& v, int n) {
    Eigen::MatrixXcd T(n, n);
    int idx = 0;
    for (int i = 0; i < n; ++i) T(i, i) = v(idx++);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double re = v(idx++);
            const double im = v(idx++);
            T(i, j) = std::complex<double>(re, im);
            T(j, i) = std::complex<double>(re, -im);
        }
    }
    return T;
}

double real_trace_product(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    return (A * B).trace().real();
}

} // namespace

void DensityStack::validate() const {
    if (rho.rows() != dim || rho.cols() != dim) {
        throw DimensionMismatch("DensityStack: rho dimension mismatch");
    }
    if (hermiticity_defect(rho) > 1e-12) {
        throw DomainError("DensityStack: rho is not Hermitian (defect > 1e-12)");
    }
    if (std::abs(rho.trace().real() - 1.0) > 1e-10 || std::abs(rho.trace().imag()) > 1e-10) {
        throw DomainError("DensityStack: Tr rho != 1");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(rho),
                                                       Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw DomainError("DensityStack: rho has a negative eigenvalue");
    }
    for (const auto& d : derivs) {
        if (d.rows() != dim || d.cols() != dim) {
            throw DimensionMismatch("DensityStack: derivative dimension mismatch");
        }
        if (hermiticity_defect(d) > 1e-12) {
            throw DomainError("DensityStack: derivative is not Hermitian");
        }
        if (std::abs(d.trace()) > 1e-10) {
            throw DomainError("DensityStack: derivative is not traceless");
        }
    }
}

Eigen::MatrixXcd sld(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& drho,
                     double tol_eig) {
    if (rho.rows() != drho.rows() || rho.cols() != drho.cols() || rho.rows() != rho.cols()) {
        throw DimensionMismatch("sld: operator dimensions mismatch");
    }
    const int n = static_cast<int>(rho.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(rho));
    const Eigen::VectorXd p = es.eigenvalues();
    const Eigen::MatrixXcd& V = es.eigenvectors();

    const Eigen::MatrixXcd M = V.adjoint() * drho * V;
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(n, n);
    double excluded_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double s = p(i) + p(j);
            if (s > tol_eig) {
                L(i, j) = 2.0 * M(i, j) / s;
            } else {
                excluded_sq += std::norm(M(i, j));
            }
        }
    }
    const double dnorm = drho.norm();
    if (std::sqrt(excluded_sq) >= 1e-8 * (1.0 + dnorm)) {
        throw SupportError("sld: derivative has weight outside the state support");
    }
    return hermitize(V * L * V.adjoint());
}

double qfi(const Eigen::MatrixXcd& rho, const Eigen::MatrixXcd& L) {
    return real_trace_product(rho, L * L);
}

SLDSet sld_set(const DensityStack& stack, int order, double tol_eig) {
    if (order < 1 || order > stack.order()) {
        throw DomainError("sld_set: order outside stack range");
    }
    SLDSet out;
    out.operators.reserve(static_cast<size_t>(order));
    for (int l = 1; l <= order; ++l) {
        out.operators.push_back(sld(stack.rho, stack.deriv(l), tol_eig));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(stack.rho),
                                                       Eigen::EigenvaluesOnly);
    out.support_rank = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        if (es.eigenvalues()(i) > tol_eig) ++out.support_rank;
    }
    return out;
}

QMatrix q_matrix(const DensityStack& stack, int order, double tol_eig) {
    SLDSet slds = sld_set(stack, order, tol_eig);
    QMatrix Q;
    Q.order = order;
    Q.theta0 = stack.theta0;
    Q.entries.resize(order, order);
    for (int k = 1; k <= order; ++k) {
        for (int l = 1; l <= order; ++l) {
            Q.entries(k - 1, l - 1) =
                real_trace_product(stack.deriv(k), slds.operators[static_cast<size_t>(l - 1)]);
        }
    }
    return Q;
}

BoundReport q_bhatt_bound(const QMatrix& Q, const Tolerances& tol) {
    return gram_bound(Q.entries, tol);
}

HermitianSystem hermitian_existence_system(const DensityStack& stack, int order) {
    if (order < 0 || order > stack.order()) {
        throw DomainError("hermitian_existence_system: order outside stack range");
    }
    HermitianSystem sys;
    sys.dim = stack.dim;
    sys.theta0 = stack.theta0;
    sys.order = order;
    sys.A.resize(order + 1, stack.dim * stack.dim);
    sys.A.row(0) = vec_constraint_row(stack.rho).transpose();
    for (int k = 1; k <= order; ++k) {
        sys.A.row(k) = vec_constraint_row(stack.deriv(k)).transpose();
    }
    sys.b = Eigen::VectorXd::Zero(order + 1);
    sys.b(0) = stack.theta0;
    if (order >= 1) sys.b(1) = 1.0;
    return sys;
}

QuantumSolveResult solve_quantum_estimator(const HermitianSystem& system, double tol_rank) {
    MinNormSolution sol = min_norm_solve(system.A, system.b, tol_rank);
    QuantumSolveResult out;
    out.solvable = sol.consistent;
    out.residual = sol.residual;
    if (sol.consistent) {
        out.estimator.op = unvec_hermitian(sol.x, system.dim);
        out.estimator.satisfied_order = system.order;
    } else {
        out.witness = sol.witness;
    }
    return out;
}

HermitianEstimator q_bhatt_estimator(const DensityStack& stack, const QMatrix& Q,
                                     double tol_eig, const Tolerances& tol) {
    BoundReport rep = q_bhatt_bound(Q, tol);
    if (rep.status != BoundStatus::Finite) {
        throw DivergentBound("q_bhatt_estimator: bound is divergent at order " +
                             std::to_string(Q.order));
    }
    SLDSet slds = sld_set(stack, Q.order, tol_eig);
    Eigen::MatrixXcd T =
        stack.theta0 * Eigen::MatrixXcd::Identity(stack.dim, stack.dim);
    for (int k = 1; k <= Q.order; ++k) {
        T += rep.maximizer(k - 1) * slds.operators[static_cast<size_t>(k - 1)];
    }
    HermitianEstimator est;
    est.op = hermitize(T);
    est.satisfied_order = Q.order;
    return est;
}

std::vector<Eigen::MatrixXcd> optimal_measurement(const Eigen::MatrixXcd& L) {
    if (L.rows() != L.cols()) throw DimensionMismatch("optimal_measurement: L must be square");
    const int n = static_cast<int>(L.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(hermitize(L));
    const Eigen::VectorXd ev = es.eigenvalues();
    const Eigen::MatrixXcd& V = es.eigenvectors();

    const double radius = ev.cwiseAbs().maxCoeff();
    const double gap_tol = 1e-9 * radius;

    std::vector<Eigen::MatrixXcd> projectors;
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || ev(i) - ev(i - 1) > gap_tol) {
            Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(n, n);
            for (int j = start; j < i; ++j) {
                P += V.col(j) * V.col(j).adjoint();
            }
            projectors.push_back(hermitize(P));
            start = i;
        }
    }
    return projectors;
}

int q_max_nontrivial_order(const DensityStack& stack, double tol_rank) {
    if (stack.order() < 1) throw DomainError("q_max_nontrivial_order: no derivatives held");
    const int n = stack.dim;
    Eigen::MatrixXd rows(stack.order(), 2 * n * n);
    for (int k = 1; k <= stack.order(); ++k) {
        const Eigen::MatrixXcd& d = stack.deriv(k);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                rows(k - 1, i * n + j) = d(i, j).real();
                rows(k - 1, n * n + i * n + j) = d(i, j).imag();
            }
        }
    }
    return numerical_rank(rows, tol_rank);
}

int q_order_cap(int dim) { return dim * (dim + 1) / 2 - 1; }

Eigen::VectorXd quantum_condition_residuals(const DensityStack& stack,
                                            const HermitianEstimator& est, int order) {
    if (est.op.rows() != stack.dim || est.op.cols() != stack.dim) {
        throw DimensionMismatch("quantum_condition_residuals: dimension mismatch");
    }
    if (order > stack.order()) {
        throw DomainError("quantum_condition_residuals: stack holds fewer derivatives");
    }
    Eigen::VectorXd res(order + 1);
    res(0) = real_trace_product(stack.rho, est.op) - stack.theta0;
    for (int k = 1; k <= order; ++k) {
        res(k) = real_trace_product(stack.deriv(k), est.op);
    }
    if (order >= 1) res(1) -= 1.0;
    return res;
}

DensityStack load_density_stack(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.empty() || line[0] != '#' ||
        line.find("quantum") == std::string::npos) {
        throw IoError("density stack: missing '# quantum N=<dim> theta0=<v> order=<n>' header");
    }
    const auto grab = [&line](const char* key) -> std::string {
        const auto pos = line.find(key);
        if (pos == std::string::npos) return {};
        auto start = pos + std::string(key).size();
        auto end = line.find_first_of(" \t", start);
        return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
    };
    int dim = 0, order = 0;
    double theta0 = 0.0;
    try {
        dim = std::stoi(grab("N="));
        theta0 = std::stod(grab("theta0="));
        order = std::stoi(grab("order="));
    } catch (const std::exception&) {
        throw IoError("density stack: malformed header");
    }
    if (dim < 2 || order < 0) throw IoError("density stack: need N >= 2 and order >= 0");

    // remaining tokens: (order+1) matrices, row-major "re im" pairs
    std::vector<double> nums;
    nums.reserve(static_cast<size_t>((order + 1) * 2 * dim * dim));
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') continue;
        std::istringstream ls(line);
        double v;
        while (ls >> v) nums.push_back(v);
    }
    const size_t per_matrix = static_cast<size_t>(2 * dim * dim);
    if (nums.size() != per_matrix * static_cast<size_t>(order + 1)) {
        throw IoError("density stack: expected " +
                      std::to_string(per_matrix * static_cast<size_t>(order + 1)) +
                      " numbers, found " + std::to_string(nums.size()));
    }
    auto read_matrix = [&](size_t offset) {
        Eigen::MatrixXcd M(dim, dim);
        size_t idx = offset;
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
                M(i, j) = std::complex<double>(nums[idx], nums[idx + 1]);
                idx += 2;
            }
        }
        return M;
    };

    DensityStack stack;
    stack.dim = dim;
    stack.theta0 = theta0;
    stack.rho = read_matrix(0);
    for (int k = 1; k <= order; ++k) {
        stack.derivs.push_back(read_matrix(per_matrix * static_cast<size_t>(k)));
    }
    stack.validate();
    return stack;
}

DensityStack load_density_stack_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open density file: " + path);
    return load_density_stack(in);
}

} // namespace bhatt
