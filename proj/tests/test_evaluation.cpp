#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bhatt/classical.hpp"
#include "bhatt/errors.hpp"
#include "bhatt/evaluation.hpp"
#include "bhatt/quantum.hpp"
#include "bhatt/scenarios.hpp"

using namespace bhatt;

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> g(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return g;
}

EstimatorTable crb_estimator(const std::string& name, double theta0) {
    auto stack = evaluate_stack(corpus_model(name).model, theta0, 1);
    return bhatt_estimator(stack, bhatt_matrix(stack, 1));
}

} // namespace

TEST_CASE("estimator_moments on the Bernoulli CRB estimator") {
    auto model = corpus_model("bernoulli").model;
    auto est = crb_estimator("bernoulli", 0.5);

    auto at_theta0 = estimator_moments(model, est, 0.5);
    CHECK(at_theta0.bias == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(at_theta0.variance == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(at_theta0.mse == doctest::Approx(0.25).epsilon(1e-12));

    // the linear estimator is globally unbiased for the linear family
    auto away = estimator_moments(model, est, 0.6);
    CHECK(away.bias == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("estimator_moments on a constant estimator") {
    auto model = corpus_model("bernoulli").model;
    EstimatorTable constant;
    constant.theta0 = 0.5;
    constant.values = Eigen::VectorXd::Constant(2, 0.5);
    constant.kept_indices = {0, 1};
    constant.satisfied_order = 0;

    for (double theta : {0.2, 0.5, 0.8}) {
        auto m = estimator_moments(model, constant, theta);
        CHECK(m.bias == doctest::Approx(0.5 - theta));
        CHECK(m.variance == doctest::Approx(0.0));
        CHECK(m.mse == doctest::Approx((0.5 - theta) * (0.5 - theta)));
    }
}

TEST_CASE("estimator_moments rejects mismatched supports") {
    auto model = corpus_model("bernoulli").model;
    EstimatorTable est;
    est.theta0 = 0.5;
    est.values = Eigen::VectorXd::Zero(3);
    est.kept_indices = {0, 1, 7};
    CHECK_THROWS_AS(estimator_moments(model, est, 0.5), SupportMismatch);
}

TEST_CASE("quantum_estimator_moments") {
    auto fam = qubit_model({0.25, 0.1});

    HermitianEstimator constant;
    constant.op = 0.1 * Eigen::MatrixXcd::Identity(2, 2);
    constant.satisfied_order = 0;
    auto m = quantum_estimator_moments(fam.rho, constant, 0.3);
    CHECK(m.bias == doctest::Approx(0.1 - 0.3));
    CHECK(m.variance == doctest::Approx(0.0));

    auto stack = fam.stack_at(0.1, 2);
    auto Q = q_matrix(stack, 2);
    auto rep = q_bhatt_bound(Q);
    auto est = q_bhatt_estimator(stack, Q);
    auto at0 = quantum_estimator_moments(fam.rho, est, 0.1);
    CHECK(std::abs(at0.bias) <= 1e-9);
    CHECK(at0.variance >= rep.value * (1.0 - 1e-6));
    CHECK(std::isfinite(at0.mse));
}

TEST_CASE("mse = variance + bias^2 across scans") {
    auto model = corpus_model("binomial2").model;
    auto est = crb_estimator("binomial2", 0.3);
    auto curve = mse_scan(model, est, linspace(0.1, 0.6, 51), "crb");
    for (const auto& pt : curve.points) {
        const double recomposed = pt.variance + pt.bias * pt.bias;
        CHECK(std::abs(pt.mse - recomposed) <= 1e-10 * std::max(std::abs(pt.mse), 1e-30));
    }
}

TEST_CASE("singleton grid matches estimator_moments") {
    auto model = corpus_model("bernoulli").model;
    auto est = crb_estimator("bernoulli", 0.5);
    auto curve = mse_scan(model, est, {0.5}, "crb");
    REQUIRE(curve.points.size() == 1);
    auto direct = estimator_moments(model, est, 0.5);
    CHECK(curve.points[0].mse == direct.mse);
    CHECK(curve.points[0].bias == direct.bias);
}

TEST_CASE("threaded scans equal the sequential scan") {
    auto model = corpus_model("binomial2").model;
    auto est = crb_estimator("binomial2", 0.3);
    auto grid = linspace(0.15, 0.55, 97);
    auto seq = mse_scan(model, est, grid, "crb", 1);
    auto par = mse_scan(model, est, grid, "crb", 4);
    for (size_t i = 0; i < grid.size(); ++i) {
        CHECK(seq.points[i].bias == par.points[i].bias);
        CHECK(seq.points[i].variance == par.points[i].variance);
        CHECK(seq.points[i].mse == par.points[i].mse);
    }
}

TEST_CASE("mse_scan rejects bad grids") {
    auto model = corpus_model("bernoulli").model;
    auto est = crb_estimator("bernoulli", 0.5);
    CHECK_THROWS_AS(mse_scan(model, est, {}, "x"), GridMismatch);
    CHECK_THROWS_AS(mse_scan(model, est, {0.5, 0.5}, "x"), GridMismatch);
    CHECK_THROWS_AS(mse_scan(model, est, {0.5, 1.5}, "x"), DomainError);
}

TEST_CASE("bias_bound_check") {
    auto model = corpus_model("bernoulli").model;
    auto est = crb_estimator("bernoulli", 0.5);
    auto curve = mse_scan(model, est, linspace(0.2, 0.8, 31), "crb");
    auto rep = bias_bound_check(curve);
    CHECK(rep.pass);
    CHECK(rep.max_violation == 0.0);
    // slack equals the variance pointwise for this curve
    double expect = 0.0;
    for (const auto& pt : curve.points) expect = std::max(expect, pt.variance);
    CHECK(rep.max_slack == doctest::Approx(expect).epsilon(1e-12));

    EstimatorTable constant;
    constant.theta0 = 0.5;
    constant.values = Eigen::VectorXd::Constant(2, 0.5);
    constant.kept_indices = {0, 1};
    auto flat = mse_scan(model, constant, linspace(0.2, 0.8, 31), "const");
    auto rep2 = bias_bound_check(flat);
    CHECK(rep2.pass);
    CHECK(rep2.max_slack <= 1e-15);  // equality at every point
}

TEST_CASE("integrated_mse_gap basics") {
    auto model = corpus_model("binomial2").model;
    auto est = crb_estimator("binomial2", 0.3);
    auto grid = linspace(0.1, 0.5, 201);
    auto curve = mse_scan(model, est, grid, "a");

    CHECK(integrated_mse_gap(curve, curve, 0.2, 0.3) == doctest::Approx(0.0));

    EstimatorTable constant;
    constant.theta0 = 0.3;
    constant.values = Eigen::VectorXd::Constant(3, 0.3);
    constant.kept_indices = {0, 1, 2};
    auto flat = mse_scan(model, constant, grid, "b");

    const double gap = integrated_mse_gap(curve, flat, 0.2, 0.3);
    auto fine = mse_scan(model, est, linspace(0.1, 0.5, 401), "a");
    auto fine_flat = mse_scan(model, constant, linspace(0.1, 0.5, 401), "b");
    const double gap_fine = integrated_mse_gap(fine, fine_flat, 0.2, 0.3);
    CHECK(std::abs(gap - gap_fine) <= 0.01 * std::abs(gap_fine));

    CHECK_THROWS_AS(integrated_mse_gap(curve, fine, 0.2, 0.3), GridMismatch);
    CHECK_THROWS_AS(integrated_mse_gap(curve, flat, 2.0, 0.3), GridMismatch);
}

TEST_CASE("bias derivatives from a synthetic cubic bias curve") {
    // bias(theta) = (theta - 1)^3 has zero first and second derivatives at 1
    MSECurve curve;
    curve.estimator_id = "synthetic";
    curve.grid = linspace(0.9, 1.1, 41);
    for (double th : curve.grid) {
        MSEPoint pt;
        pt.bias = std::pow(th - 1.0, 3);
        pt.mse = 1.0;
        pt.variance = 1.0 - pt.bias * pt.bias;
        curve.points.push_back(pt);
    }
    auto d = bias_derivatives_at(curve, 1.0, 2);
    CHECK(std::abs(d(0)) <= 1e-10);
    CHECK(std::abs(d(1)) <= 1e-8);

    CHECK_THROWS_AS(bias_derivatives_at(curve, 0.9, 2), GridMismatch);
    CHECK_THROWS_AS(bias_derivatives_at(curve, 0.95001, 2), GridMismatch);
}

TEST_CASE("comparison CSV shape and determinism") {
    ComparisonInputs inputs;
    std::ostringstream empty;
    write_comparison_csv(empty, inputs);
    CHECK(empty.str() == "theta,estimator,bias,variance,mse,bound_cr,bound_bh\n");

    auto model = corpus_model("binomial2").model;
    auto stack = evaluate_stack(model, 0.3, 2);
    auto est1 = bhatt_estimator(stack, bhatt_matrix(stack, 1));
    auto est2 = bhatt_estimator(stack, bhatt_matrix(stack, 2));
    auto grid = linspace(0.25, 0.35, 11);
    inputs.curves.push_back(mse_scan(model, est1, grid, "bhb1"));
    inputs.curves.push_back(mse_scan(model, est2, grid, "bhb2"));
    inputs.bounds.push_back(bhatt_bound(bhatt_matrix(stack, 1)));
    inputs.bounds.push_back(bhatt_bound(bhatt_matrix(stack, 2)));
    inputs.existence.emplace_back(1, true);
    inputs.existence.emplace_back(2, true);
    inputs.max_nontrivial = max_nontrivial_order(stack);

    std::ostringstream a, b;
    write_comparison_csv(a, inputs);
    write_comparison_csv(b, inputs);
    CHECK(a.str() == b.str());
    CHECK(a.str().find("bhb2") != std::string::npos);

    auto summary = comparison_summary(inputs);
    CHECK(summary.find("order 1: finite") != std::string::npos);
    CHECK(summary.find("estimator=solvable") != std::string::npos);
    CHECK(summary.find("max nontrivial order: 2") != std::string::npos);
}
