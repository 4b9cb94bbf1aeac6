#include "bhatt/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>

#include "bhatt/errors.hpp"

namespace bhatt {

namespace {

int rank_from_singular_values(const Eigen::VectorXd& sv, double tol_rank) {
    if (sv.size() == 0) return 0;
    const double cutoff = tol_rank * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > cutoff && sv(i) > 0.0) ++r;
    }
    return r;
}

} // namespace

int numerical_rank(const Eigen::MatrixXd& A, double tol_rank) {
    if (A.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return rank_from_singular_values(svd.singularValues(), tol_rank);
}

Eigen::VectorXd pinv_apply(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           double tol_rank, int* rank_out) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int r = rank_from_singular_values(sv, tol_rank);
    if (rank_out) *rank_out = r;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(A.cols());
    for (int i = 0; i < r; ++i) {
        const double coeff = svd.matrixU().col(i).dot(b) / sv(i);
        x += coeff * svd.matrixV().col(i);
    }
    return x;
}

MinNormSolution min_norm_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                               double tol_rank) {
    if (A.rows() != b.size()) throw DimensionMismatch("min_norm_solve: A rows != b size");

    // Equilibrate rows to unit infinity norm; zero rows are left alone.
    Eigen::VectorXd scale(A.rows());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        const double m = A.row(i).cwiseAbs().maxCoeff();
        scale(i) = (m > 0.0) ? 1.0 / m : 1.0;
    }
    const Eigen::MatrixXd As = scale.asDiagonal() * A;
    const Eigen::VectorXd bs = scale.asDiagonal() * b;

    Eigen::MatrixXd Aug(A.rows(), A.cols() + 1);
    Aug.leftCols(A.cols()) = As;
    Aug.col(A.cols()) = bs;

    MinNormSolution out;
    out.rank = numerical_rank(As, tol_rank);
    out.rank_augmented = numerical_rank(Aug, tol_rank);
    out.consistent = (out.rank == out.rank_augmented);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int r = rank_from_singular_values(sv, tol_rank);

    if (out.consistent) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(A.cols());
        for (int i = 0; i < r; ++i) {
            x += (svd.matrixU().col(i).dot(bs) / sv(i)) * svd.matrixV().col(i);
        }
        out.x = x;
        out.residual = (A * x - b).norm();
    } else {
        // Component of bs outside the column span of As is a left null
        // direction of As; pulled back through the scaling it witnesses the
        // inconsistency of the original system.
        Eigen::VectorXd proj = bs;
        for (int i = 0; i < r; ++i) {
            proj -= svd.matrixU().col(i).dot(bs) * svd.matrixU().col(i);
        }
        Eigen::VectorXd w = scale.asDiagonal() * proj;
        const double n = w.norm();
        if (n > 0.0) w /= n;
        out.witness = w;
        out.residual = proj.norm();
    }
    return out;
}

namespace {

// Bound value and maximizer for a single Gram matrix; does not fill
// effective_order.
BoundReport gram_bound_single(const Eigen::MatrixXd& G, const Tolerances& tol) {
    const int n = static_cast<int>(G.rows());
    BoundReport rep;
    rep.order = n;

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
    lambda(0) = 1.0;

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const int r = rank_from_singular_values(sv, tol.tol_rank);

    // lambda in range(G) <=> no component on the orthogonal complement of
    // the column span.
    Eigen::VectorXd lambda_perp = lambda;
    for (int i = 0; i < r; ++i) {
        lambda_perp -= svd.matrixU().col(i).dot(lambda) * svd.matrixU().col(i);
    }

    if (lambda_perp.norm() <= tol.tol_range) {
        Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < r; ++i) {
            a += (svd.matrixU().col(i).dot(lambda) / sv(i)) * svd.matrixV().col(i);
        }
        rep.status = BoundStatus::Finite;
        rep.value = a.dot(lambda);
        rep.maximizer = a;
    } else {
        // Null vector with nonzero first component, scaled to a'^T lambda = 1.
        Eigen::VectorXd cert = Eigen::VectorXd::Zero(n);
        for (int i = r; i < n; ++i) {
            cert += svd.matrixV().col(i).dot(lambda) * svd.matrixV().col(i);
        }
        const double overlap = cert.dot(lambda);
        rep.status = BoundStatus::Divergent;
        rep.certificate = cert / overlap;
    }
    return rep;
}

} // namespace

BoundReport gram_bound(const Eigen::MatrixXd& G, const Tolerances& tol) {
    if (G.rows() != G.cols()) throw DimensionMismatch("gram_bound: matrix must be square");
    if (G.rows() == 0) throw DimensionMismatch("gram_bound: empty matrix");

    BoundReport rep = gram_bound_single(G, tol);
    if (rep.status == BoundStatus::Finite) {
        rep.effective_order = rep.order;
        for (int m = 1; m < rep.order; ++m) {
            BoundReport lower = gram_bound_single(G.topLeftCorner(m, m), tol);
            if (lower.status != BoundStatus::Finite) continue;
            if (std::abs(lower.value - rep.value) <= 1e-9 * std::max(std::abs(rep.value), 1e-300)) {
                rep.effective_order = m;
                break;
            }
        }
    }
    return rep;
}

} // namespace bhatt
