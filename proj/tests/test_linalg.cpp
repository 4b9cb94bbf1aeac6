#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "bhatt/errors.hpp"
#include "bhatt/linalg.hpp"

using namespace bhatt;

TEST_CASE("numerical rank with relative threshold") {
    Eigen::MatrixXd A(3, 3);
    A << 1, 0, 0, 0, 1e-5, 0, 0, 0, 1e-14;
    CHECK(numerical_rank(A, 1e-10) == 2);
    CHECK(numerical_rank(A, 1e-16) == 3);
    CHECK(numerical_rank(Eigen::MatrixXd::Zero(4, 2), 1e-10) == 0);
}

TEST_CASE("min_norm_solve on a consistent full-rank system") {
    Eigen::MatrixXd A(2, 2);
    A << 0.5, 0.5, 1.0, -1.0;
    Eigen::VectorXd b(2);
    b << 0.5, 1.0;
    auto sol = min_norm_solve(A, b, 1e-10);
    REQUIRE(sol.consistent);
    CHECK(sol.x(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sol.x(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sol.residual <= 1e-12);
}

TEST_CASE("min_norm_solve picks the minimum-norm member of the solution set") {
    // one equation, two unknowns: x0 + x1 = 2, min norm at (1, 1)
    Eigen::MatrixXd A(1, 2);
    A << 1.0, 1.0;
    Eigen::VectorXd b(1);
    b << 2.0;
    auto sol = min_norm_solve(A, b, 1e-10);
    REQUIRE(sol.consistent);
    CHECK(sol.x(0) == doctest::Approx(1.0));
    CHECK(sol.x(1) == doctest::Approx(1.0));
}

TEST_CASE("min_norm_solve reports an inconsistency witness") {
    Eigen::MatrixXd A(3, 2);
    A << 1, 0, 0, 1, 1, 1;  // row3 = row1 + row2
    Eigen::VectorXd b(3);
    b << 1, 1, 3;  // inconsistent: would need 2
    auto sol = min_norm_solve(A, b, 1e-10);
    REQUIRE_FALSE(sol.consistent);
    REQUIRE(sol.witness.size() == 3);
    CHECK((sol.witness.transpose() * A).norm() <= 1e-10);
    CHECK(std::abs(sol.witness.dot(b)) > 1e-3);
}

TEST_CASE("min_norm_solve handles zero rows") {
    Eigen::MatrixXd A(2, 2);
    A << 1, 1, 0, 0;
    Eigen::VectorXd b0(2), b1(2);
    b0 << 1, 0;
    b1 << 1, 0.5;
    CHECK(min_norm_solve(A, b0, 1e-10).consistent);
    CHECK_FALSE(min_norm_solve(A, b1, 1e-10).consistent);
}

TEST_CASE("gram_bound on a full-rank matrix inverts it") {
    Eigen::MatrixXd G(2, 2);
    G << 4, 1, 1, 2;
    auto rep = gram_bound(G, {});
    REQUIRE(rep.finite());
    // direct 2x2 inverse: (G^-1)_11 = G22 / det
    CHECK(rep.value == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(rep.effective_order == 2);
    CHECK((G * rep.maximizer - Eigen::Vector2d(1, 0)).norm() <= 1e-12);
}

TEST_CASE("gram_bound with lambda inside the range of a singular matrix") {
    Eigen::MatrixXd G(2, 2);
    G << 4, 0, 0, 0;
    auto rep = gram_bound(G, {});
    REQUIRE(rep.finite());
    CHECK(rep.value == doctest::Approx(0.25));
    CHECK(rep.effective_order == 1);
}

TEST_CASE("gram_bound divergence certificate") {
    // column 2 = 2 * column 1 -> null vector hits lambda
    Eigen::MatrixXd G(2, 2);
    G << 1, 2, 2, 4;
    auto rep = gram_bound(G, {});
    REQUIRE_FALSE(rep.finite());
    REQUIRE(rep.certificate.size() == 2);
    CHECK(rep.certificate(0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((G * rep.certificate).norm() <= 1e-10);
}

TEST_CASE("gram_bound on the zero matrix diverges with certificate lambda") {
    auto rep = gram_bound(Eigen::MatrixXd::Zero(3, 3), {});
    REQUIRE_FALSE(rep.finite());
    CHECK(rep.certificate(0) == doctest::Approx(1.0));
    CHECK(rep.certificate.tail(2).norm() <= 1e-14);
}

TEST_CASE("gram_bound value matches dense solve on random SPD matrices") {
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        Eigen::MatrixXd B(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
        Eigen::MatrixXd G = B * B.transpose() + 1e-3 * Eigen::MatrixXd::Identity(n, n);
        auto rep = gram_bound(G, {});
        REQUIRE(rep.finite());
        Eigen::VectorXd lambda = Eigen::VectorXd::Zero(n);
        lambda(0) = 1.0;
        const double direct = lambda.dot(G.ldlt().solve(lambda));
        CHECK(rep.value == doctest::Approx(direct).epsilon(1e-9));
    }
}

TEST_CASE("gram_bound rejects non-square input") {
    CHECK_THROWS_AS(gram_bound(Eigen::MatrixXd::Zero(2, 3), {}), DimensionMismatch);
}
