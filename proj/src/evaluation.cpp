#include "bhatt/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "bhatt/errors.hpp"

namespace bhatt {

MSEPoint estimator_moments(const DiscreteModel& model, const EstimatorTable& est,
                           double theta) {
    if (!model.in_domain(theta)) {
        throw DomainError("estimator_moments: theta outside the model domain");
    }
    if (est.values.size() != static_cast<Eigen::Index>(est.kept_indices.size())) {
        throw SupportMismatch("estimator_moments: estimator table is inconsistent");
    }
    const Eigen::VectorXd p_full = model.prob(theta);
    for (int idx : est.kept_indices) {
        if (idx < 0 || idx >= p_full.size()) {
            throw SupportMismatch("estimator_moments: estimator support not in model support");
        }
    }

    double mass = 0.0, mean_acc = 0.0, mse_acc = 0.0;
    for (size_t j = 0; j < est.kept_indices.size(); ++j) {
        const double p = p_full(est.kept_indices[j]);
        const double v = est.values(static_cast<Eigen::Index>(j));
        mass += p;
        mean_acc += p * v;
        const double dv = v - theta;
        mse_acc += p * dv * dv;
    }
    if (!(mass > 0.0)) {
        throw DegenerateModel("estimator_moments: zero retained mass at theta");
    }
    const double mean = mean_acc / mass;
    double var_acc = 0.0;
    for (size_t j = 0; j < est.kept_indices.size(); ++j) {
        const double p = p_full(est.kept_indices[j]);
        const double dv = est.values(static_cast<Eigen::Index>(j)) - mean;
        var_acc += p * dv * dv;
    }

    MSEPoint out;
    out.bias = mean - theta;
    out.variance = var_acc / mass;
    out.mse = mse_acc / mass;
    return out;
}

MSEPoint quantum_estimator_moments(const std::function<Eigen::MatrixXcd(double)>& rho,
                                   const HermitianEstimator& est, double theta) {
    const Eigen::MatrixXcd r = rho(theta);
    if (r.rows() != est.op.rows() || r.cols() != est.op.cols()) {
        throw DimensionMismatch("quantum_estimator_moments: dimension mismatch");
    }
    const Eigen::MatrixXcd& T = est.op;
    const double mean = (r * T).trace().real();
    const double second = (r * T * T).trace().real();
    const Eigen::MatrixXcd shifted =
        T - theta * Eigen::MatrixXcd::Identity(T.rows(), T.cols());
    MSEPoint out;
    out.bias = mean - theta;
    out.variance = second - mean * mean;
    out.mse = (r * shifted * shifted).trace().real();
    return out;
}

namespace {

template <typename PointFn>
MSECurve scan_impl(const std::vector<double>& grid, const std::string& id, int threads,
                   PointFn&& eval) {
    if (grid.empty()) throw GridMismatch("mse_scan: empty grid");
    for (size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1])) {
            throw GridMismatch("mse_scan: grid must be strictly increasing");
        }
    }
    MSECurve curve;
    curve.estimator_id = id;
    curve.grid = grid;
    curve.points.resize(grid.size());

    const int nthreads = std::max(1, threads);
    if (nthreads == 1 || grid.size() < 2) {
        for (size_t i = 0; i < grid.size(); ++i) curve.points[i] = eval(grid[i]);
    } else {
        // Points are independent; results land at their grid index so the
        // assembled curve matches the sequential scan exactly.
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < nthreads; ++t) {
            pool.emplace_back([&]() {
                for (;;) {
                    const size_t i = next.fetch_add(1);
                    if (i >= curve.grid.size()) return;
                    curve.points[i] = eval(curve.grid[i]);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return curve;
}

} // namespace

MSECurve mse_scan(const DiscreteModel& model, const EstimatorTable& est,
                  const std::vector<double>& grid, const std::string& id, int threads) {
    return scan_impl(grid, id, threads,
                     [&](double th) { return estimator_moments(model, est, th); });
}

MSECurve quantum_mse_scan(const std::function<Eigen::MatrixXcd(double)>& rho,
                          const HermitianEstimator& est, const std::vector<double>& grid,
                          const std::string& id, int threads) {
    return scan_impl(grid, id, threads,
                     [&](double th) { return quantum_estimator_moments(rho, est, th); });
}

BiasBoundReport bias_bound_check(const MSECurve& curve) {
    BiasBoundReport rep;
    for (const MSEPoint& pt : curve.points) {
        const double slack = pt.mse - pt.bias * pt.bias;
        rep.max_slack = std::max(rep.max_slack, slack);
        if (slack < 0.0) rep.max_violation = std::max(rep.max_violation, -slack);
        if (slack < -1e-12 * (1.0 + std::abs(pt.mse))) rep.pass = false;
    }
    return rep;
}

double integrated_mse_gap(const MSECurve& a, const MSECurve& b, double delta,
                          double theta0) {
    if (a.grid != b.grid) throw GridMismatch("integrated_mse_gap: curves use different grids");
    if (a.grid.size() < 2) throw GridMismatch("integrated_mse_gap: need at least 2 grid points");
    const double lo = theta0 - delta / 2.0;
    const double hi = theta0 + delta / 2.0;
    if (lo < a.grid.front() || hi > a.grid.back()) {
        throw GridMismatch("integrated_mse_gap: interval not covered by the grid");
    }

    const auto diff = [&](size_t i) { return a.points[i].mse - b.points[i].mse; };
    const auto interp = [&](double x) {
        const auto it = std::upper_bound(a.grid.begin(), a.grid.end(), x);
        size_t hi_idx = static_cast<size_t>(std::distance(a.grid.begin(), it));
        if (hi_idx == 0) hi_idx = 1;
        if (hi_idx >= a.grid.size()) hi_idx = a.grid.size() - 1;
        const size_t lo_idx = hi_idx - 1;
        const double t = (x - a.grid[lo_idx]) / (a.grid[hi_idx] - a.grid[lo_idx]);
        return diff(lo_idx) + t * (diff(hi_idx) - diff(lo_idx));
    };

    // Trapezoid over interior grid points plus partial end segments.
    double acc = 0.0;
    size_t first = 0;
    while (first < a.grid.size() && a.grid[first] < lo) ++first;
    size_t last = a.grid.size();
    while (last > 0 && a.grid[last - 1] > hi) --last;

    if (first >= last) {
        // interval falls between two adjacent grid points
        return 0.5 * (interp(lo) + interp(hi)) * (hi - lo);
    }
    for (size_t i = first + 1; i < last; ++i) {
        acc += 0.5 * (diff(i - 1) + diff(i)) * (a.grid[i] - a.grid[i - 1]);
    }
    if (a.grid[first] > lo) {
        acc += 0.5 * (interp(lo) + diff(first)) * (a.grid[first] - lo);
    }
    if (a.grid[last - 1] < hi) {
        acc += 0.5 * (diff(last - 1) + interp(hi)) * (hi - a.grid[last - 1]);
    }
    return acc;
}

Eigen::VectorXd bias_derivatives_at(const MSECurve& curve, double theta0, int n) {
    if (n < 1 || n > 2) throw DomainError("bias_derivatives_at: n must be 1 or 2");
    const auto& g = curve.grid;
    if (g.size() < 7) throw GridMismatch("bias_derivatives_at: grid too short");

    const double h = g[1] - g[0];
    for (size_t i = 1; i < g.size(); ++i) {
        if (std::abs((g[i] - g[i - 1]) - h) > 1e-9 * h) {
            throw GridMismatch("bias_derivatives_at: grid must be uniform");
        }
    }
    size_t i0 = 0;
    double best = std::abs(g[0] - theta0);
    for (size_t i = 1; i < g.size(); ++i) {
        const double d = std::abs(g[i] - theta0);
        if (d < best) {
            best = d;
            i0 = i;
        }
    }
    if (best > 1e-9 * h || i0 < 3 || i0 + 3 >= g.size()) {
        throw GridMismatch("bias_derivatives_at: theta0 not an interior grid point");
    }

    // 6th-order central stencils keep the truncation term of the vanishing
    // derivatives far below the check tolerances.
    static const double c1[7] = {-1.0 / 60, 9.0 / 60, -45.0 / 60, 0.0,
                                 45.0 / 60, -9.0 / 60, 1.0 / 60};
    static const double c2[7] = {2.0 / 180,   -27.0 / 180, 270.0 / 180, -490.0 / 180,
                                 270.0 / 180, -27.0 / 180, 2.0 / 180};
    double d1 = 0.0, d2 = 0.0;
    for (int o = -3; o <= 3; ++o) {
        const size_t idx = static_cast<size_t>(static_cast<long>(i0) + o);
        d1 += c1[o + 3] * curve.points[idx].bias;
        d2 += c2[o + 3] * curve.points[idx].bias;
    }
    Eigen::VectorXd out(n);
    out(0) = d1 / h;
    if (n >= 2) out(1) = d2 / (h * h);
    return out;
}

namespace {

std::string fmt17(double v) {
    char buf[64];
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double bound_column_value(const BoundReport& rep) {
    return rep.finite() ? rep.value : std::numeric_limits<double>::infinity();
}

} // namespace

void write_comparison_csv(std::ostream& out, const ComparisonInputs& inputs) {
    out << "theta,estimator,bias,variance,mse,bound_cr,bound_bh\n";
    if (inputs.curves.empty()) return;

    const std::vector<double>& grid = inputs.curves.front().grid;
    for (const auto& c : inputs.curves) {
        if (c.grid != grid) throw GridMismatch("comparison CSV: curves use different grids");
    }
    double cr = std::numeric_limits<double>::quiet_NaN();
    double bh = std::numeric_limits<double>::quiet_NaN();
    if (!inputs.bounds.empty()) {
        cr = bound_column_value(inputs.bounds.front());
        bh = bound_column_value(inputs.bounds.back());
    }
    for (size_t i = 0; i < grid.size(); ++i) {
        for (const auto& c : inputs.curves) {
            const MSEPoint& p = c.points[i];
            out << fmt17(grid[i]) << ',' << c.estimator_id << ',' << fmt17(p.bias) << ','
                << fmt17(p.variance) << ',' << fmt17(p.mse) << ',' << fmt17(cr) << ','
                << fmt17(bh) << '\n';
        }
    }
}

std::string comparison_summary(const ComparisonInputs& inputs) {
    std::ostringstream out;
    char buf[128];
    for (const BoundReport& rep : inputs.bounds) {
        if (rep.finite()) {
            std::snprintf(buf, sizeof(buf), "order %d: finite value=%.6g effective_order=%d",
                          rep.order, rep.value, rep.effective_order);
        } else {
            std::snprintf(buf, sizeof(buf), "order %d: divergent", rep.order);
        }
        out << buf;
        for (const auto& [order, solvable] : inputs.existence) {
            if (order == rep.order) {
                out << (solvable ? " estimator=solvable" : " estimator=unsolvable");
            }
        }
        out << '\n';
    }
    if (inputs.max_nontrivial >= 0) {
        out << "max nontrivial order: " << inputs.max_nontrivial << '\n';
    }
    return out.str();
}

} // namespace bhatt
