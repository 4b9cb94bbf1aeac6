#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "bhatt/classical.hpp"
#include "bhatt/model.hpp"
#include "bhatt/quantum.hpp"
#include "bhatt/report.hpp"

namespace bhatt {

struct MSEPoint {
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
};

struct MSECurve {
    std::string estimator_id;
    std::vector<double> grid;
    std::vector<MSEPoint> points;
};

/// Exact expectation sums over the estimator's support at theta, normalized
/// by the retained mass so the decomposition mse = variance + bias^2 is an
/// identity even for truncated models.
MSEPoint estimator_moments(const DiscreteModel& model, const EstimatorTable& est,
                           double theta);

MSEPoint quantum_estimator_moments(const std::function<Eigen::MatrixXcd(double)>& rho,
                                   const HermitianEstimator& est, double theta);

/// Evaluate moments across a strictly increasing grid. With threads > 1 the
/// grid points are evaluated concurrently and assembled in grid order, so
/// the result is identical to the sequential scan.
MSECurve mse_scan(const DiscreteModel& model, const EstimatorTable& est,
                  const std::vector<double>& grid, const std::string& id,
                  int threads = 1);

MSECurve quantum_mse_scan(const std::function<Eigen::MatrixXcd(double)>& rho,
                          const HermitianEstimator& est, const std::vector<double>& grid,
                          const std::string& id, int threads = 1);

/// Verify bias^2 <= mse pointwise (the Cauchy-Schwarz lower bound on the
/// MSE). Failures are reported, not thrown.
struct BiasBoundReport {
    bool pass = true;
    double max_violation = 0.0;  // largest bias^2 - mse overshoot
    double max_slack = 0.0;      // largest mse - bias^2 margin
};

BiasBoundReport bias_bound_check(const MSECurve& curve);

/// Trapezoidal integral of (mse_a - mse_b) over [theta0 - delta/2,
/// theta0 + delta/2]; positive means b outperforms a on the interval.
double integrated_mse_gap(const MSECurve& a, const MSECurve& b, double delta,
                          double theta0);

/// Finite-difference derivatives of the bias at theta0 from a uniform
/// curve grid, orders 1..n (n <= 2), using 6th-order central stencils.
Eigen::VectorXd bias_derivatives_at(const MSECurve& curve, double theta0, int n);

/// CSV + text summary of an estimator comparison. CSV columns are
/// theta,estimator,bias,variance,mse,bound_cr,bound_bh with 17 significant
/// digits; byte output is deterministic for fixed inputs.
struct ComparisonInputs {
    std::vector<MSECurve> curves;
    std::vector<BoundReport> bounds;             // ascending order
    std::vector<std::pair<int, bool>> existence; // (order, solvable)
    int max_nontrivial = -1;                     // omitted when negative
};

void write_comparison_csv(std::ostream& out, const ComparisonInputs& inputs);
std::string comparison_summary(const ComparisonInputs& inputs);

} // namespace bhatt
