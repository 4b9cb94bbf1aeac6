#include "bhatt/scenarios.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "bhatt/errors.hpp"

namespace bhatt {

namespace {

constexpr double kRescaleLimit = 1e250;
constexpr double kRescaleFactor = 1e-250;

int miller_start_index(int nmax, double x) {
    // Must start above both the requested order (with a contamination
    // margin ~ sqrt(160 n) for double precision) and the turning point of
    // the recurrence at m ~ x.
    const double from_order = nmax + std::sqrt(160.0 * (nmax + 1.0));
    const double from_arg = x + 10.0 * std::cbrt(std::max(x, 1.0));
    int m = static_cast<int>(std::ceil(std::max(from_order, from_arg))) + 20;
    if (m % 2 != 0) ++m;
    return m;
}

} // namespace

Eigen::VectorXd bessel_j_array(int nmax, double x) {
    if (nmax < 0) throw DomainError("bessel_j_array: nmax must be >= 0");
    if (x < 0.0) throw DomainError("bessel_j_array: x must be >= 0");
    if (!(x <= 1e7)) throw DomainError("bessel_j_array: argument out of supported range");

    Eigen::VectorXd out = Eigen::VectorXd::Zero(nmax + 1);
    if (x == 0.0) {
        out(0) = 1.0;
        return out;
    }

    const int start = miller_start_index(nmax, x);

    // Downward recurrence f_{m-1} = (2m/x) f_m - f_{m+1}. Values grow by
    // many orders of magnitude on the way down, so everything is rescaled
    // when they approach overflow; stored entries remember the epoch they
    // were written in and are adjusted at the end.
    double fp1 = 0.0;       // f_{m+1}
    double f = 1e-30;       // f_m
    double norm_sum = 0.0;  // f_0 + 2 sum_{even m >= 2} f_m, same scaling as f
    int epoch = 0;

    std::vector<double> vals(static_cast<size_t>(nmax) + 1, 0.0);
    std::vector<int> val_epoch(static_cast<size_t>(nmax) + 1, 0);

    for (int m = start; m >= 0; --m) {
        if (m <= nmax) {
            vals[static_cast<size_t>(m)] = f;
            val_epoch[static_cast<size_t>(m)] = epoch;
        }
        if (m % 2 == 0) norm_sum += (m == 0) ? f : 2.0 * f;
        if (m == 0) break;

        const double fm1 = (2.0 * m / x) * f - fp1;
        fp1 = f;
        f = fm1;
        if (std::abs(f) > kRescaleLimit) {
            f *= kRescaleFactor;
            fp1 *= kRescaleFactor;
            norm_sum *= kRescaleFactor;
            ++epoch;
        }
    }

    if (norm_sum == 0.0 || !std::isfinite(norm_sum)) {
        throw ConvergenceError("bessel_j_array: normalization sum underflowed");
    }

    for (int m = 0; m <= nmax; ++m) {
        double v = vals[static_cast<size_t>(m)];
        for (int e = val_epoch[static_cast<size_t>(m)]; e < epoch; ++e) v *= kRescaleFactor;
        out(m) = v / norm_sum;
    }
    return out;
}

double bessel_j(long q, double x) {
    const long aq = std::labs(q);
    if (aq > 1000000) throw DomainError("bessel_j: |order| too large");
    const Eigen::VectorXd arr = bessel_j_array(static_cast<int>(aq), x);
    double v = arr(static_cast<int>(aq));
    if (q < 0 && (aq % 2 != 0)) v = -v;
    return v;
}

namespace {

double binom(int n, int k) {
    double acc = 1.0;
    for (int i = 1; i <= k; ++i) acc = acc * (n - k + i) / i;
    return acc;
}

// Signed lookup J_q for possibly negative q from an array of J_0..J_max.
double j_signed(const Eigen::VectorXd& arr, long q) {
    const long aq = std::labs(q);
    double v = arr(static_cast<Eigen::Index>(aq));
    if (q < 0 && (aq % 2 != 0)) v = -v;
    return v;
}

// m-th derivative of J_q in its argument, from the recurrence
// J_q' = (J_{q-1} - J_{q+1}) / 2 applied m times.
double bessel_deriv(const Eigen::VectorXd& arr, long q, int m) {
    double acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binom(m, i) * j_signed(arr, q - m + 2 * i);
    }
    return std::ldexp(acc, -m);  // / 2^m
}

} // namespace

MachZehnderModel mach_zehnder_model(const MachZehnderConfig& cfg) {
    if (cfg.r < 1) throw DomainError("mach_zehnder_model: r must be >= 1");
    if (!(cfg.theta0 > 0.0)) throw DomainError("mach_zehnder_model: theta0 must be > 0");
    if (!(cfg.tail_mass > 0.0)) throw DomainError("mach_zehnder_model: tail_mass must be > 0");

    const double theta_ref = cfg.theta_max > 0.0 ? cfg.theta_max : 1.5 * cfg.theta0;
    if (theta_ref < cfg.theta0) {
        throw DomainError("mach_zehnder_model: theta_max below theta0");
    }
    const double x_ref = static_cast<double>(cfg.r) * theta_ref;

    // Initial window past the Bessel turning point, then trimmed from the
    // outside while the excluded mass at the widest scan point stays below
    // tail_mass. Sum J_q^2 over all q is exactly 1.
    int window = static_cast<int>(std::ceil(x_ref)) +
                 std::max(20, static_cast<int>(std::ceil(3.0 * std::cbrt(x_ref) + 10.0)));
    {
        const Eigen::VectorXd arr = bessel_j_array(window, x_ref);
        double mass = arr(0) * arr(0);
        for (int q = 1; q <= window; ++q) mass += 2.0 * arr(q) * arr(q);
        int trimmed = window;
        double kept = mass;
        while (trimmed > static_cast<int>(std::ceil(x_ref)) + 1) {
            const double without = kept - 2.0 * arr(trimmed) * arr(trimmed);
            if (1.0 - without > cfg.tail_mass) break;
            kept = without;
            --trimmed;
        }
        window = trimmed;
    }

    const int n_points = 2 * window + 1;
    const long r = cfg.r;
    const int w = window;

    DiscreteModel model;
    model.support_labels.reserve(static_cast<size_t>(n_points));
    for (int q = -w; q <= w; ++q) {
        model.support_labels.push_back(std::to_string(2 * q));
    }
    model.theta_lo = 0.0;
    model.theta_hi = theta_ref * 1.05;
    model.prob = [r, w](double theta) {
        const Eigen::VectorXd arr = bessel_j_array(w, r * theta);
        Eigen::VectorXd p(2 * w + 1);
        for (int q = -w; q <= w; ++q) {
            const double j = arr(std::abs(q));
            p(q + w) = j * j;
        }
        return p;
    };
    model.analytic_derivs = [r, w](double theta, int k) {
        if (k < 1 || k > 8) throw DomainError("mach_zehnder derivatives support k in 1..8");
        const Eigen::VectorXd arr = bessel_j_array(w + k, r * theta);
        Eigen::VectorXd d(2 * w + 1);
        const double rk = std::pow(static_cast<double>(r), k);
        for (int q = -w; q <= w; ++q) {
            // d^k/dtheta^k J_q(r theta)^2 by the product rule in x = r theta
            double acc = 0.0;
            for (int j = 0; j <= k; ++j) {
                acc += binom(k, j) * bessel_deriv(arr, q, j) * bessel_deriv(arr, q, k - j);
            }
            d(q + w) = rk * acc;
        }
        return d;
    };

    MachZehnderModel out;
    out.model = std::move(model);
    out.q_window = window;
    out.small_angle_ok = (static_cast<double>(cfg.r) * cfg.theta0 <= 50.0);
    return out;
}

namespace {

// Derivatives of cos(2 theta^2) and sin(2 theta^2) up to order 4.
void cos_sin_2t2_derivs(double theta, int k, double* u, double* v) {
    const double c = std::cos(2.0 * theta * theta);
    const double s = std::sin(2.0 * theta * theta);
    const double t = theta;
    const double t2 = t * t;
    switch (k) {
        case 0: *u = c; *v = s; return;
        case 1: *u = -4.0 * t * s; *v = 4.0 * t * c; return;
        case 2:
            *u = -4.0 * s - 16.0 * t2 * c;
            *v = 4.0 * c - 16.0 * t2 * s;
            return;
        case 3:
            *u = -48.0 * t * c + 64.0 * t * t2 * s;
            *v = -48.0 * t * s - 64.0 * t * t2 * c;
            return;
        case 4:
            *u = -48.0 * c + 384.0 * t2 * s + 256.0 * t2 * t2 * c;
            *v = -48.0 * s - 384.0 * t2 * c + 256.0 * t2 * t2 * s;
            return;
        default:
            throw DomainError("qubit_model: analytic derivatives available up to order 4");
    }
}

} // namespace

DensityFamily qubit_model(const QubitConfig& cfg) {
    if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) {
        throw DomainError("qubit_model: lambda must be in (0, 1)");
    }
    const double c = cfg.lambda - 0.5;
    const std::complex<double> I(0.0, 1.0);

    DensityFamily fam;
    fam.dim = 2;
    fam.theta_lo = -10.0;
    fam.theta_hi = 10.0;
    fam.rho = [c, I](double theta) {
        double u, v;
        cos_sin_2t2_derivs(theta, 0, &u, &v);
        Eigen::MatrixXcd m(2, 2);
        m(0, 0) = 0.5 + c * u;
        m(1, 1) = 0.5 - c * u;
        m(0, 1) = I * c * v;
        m(1, 0) = -I * c * v;
        return m;
    };
    fam.drho = [c, I](double theta, int k) {
        double u, v;
        cos_sin_2t2_derivs(theta, k, &u, &v);
        Eigen::MatrixXcd m(2, 2);
        m(0, 0) = c * u;
        m(1, 1) = -c * u;
        m(0, 1) = I * c * v;
        m(1, 0) = -I * c * v;
        return m;
    };
    return fam;
}

Eigen::Matrix2d qubit_q_closed_form(double lambda, double theta) {
    const double t = (1.0 - 2.0 * lambda) * (1.0 - 2.0 * lambda);
    const double th2 = theta * theta;
    Eigen::Matrix2d Q;
    Q(0, 0) = 16.0 * th2 * t;
    Q(0, 1) = Q(1, 0) = 16.0 * theta * t;
    Q(1, 1) = 16.0 * t * ((lambda - 1.0) * lambda - 4.0 * th2 * th2) /
              ((lambda - 1.0) * lambda);
    return Q;
}

DensityStack DensityFamily::stack_at(double theta0, int order) const {
    if (!(theta0 > theta_lo && theta0 < theta_hi)) {
        throw DomainError("DensityFamily: theta0 outside the family domain");
    }
    DensityStack stack;
    stack.dim = dim;
    stack.theta0 = theta0;
    stack.rho = rho(theta0);
    for (int k = 1; k <= order; ++k) {
        if (drho) {
            stack.derivs.push_back(drho(theta0, k));
        } else {
            // entrywise central differences, re-Hermitized
            const double h = fd_default_step(theta0, k);
            Eigen::MatrixXcd m(dim, dim);
            for (int i = 0; i < dim; ++i) {
                for (int j = 0; j < dim; ++j) {
                    auto re = [this, i, j](double th) { return rho(th)(i, j).real(); };
                    auto im = [this, i, j](double th) { return rho(th)(i, j).imag(); };
                    m(i, j) = std::complex<double>(
                        finite_difference_derivative(re, theta0, k, h),
                        finite_difference_derivative(im, theta0, k, h));
                }
            }
            stack.derivs.push_back(0.5 * (m + m.adjoint().eval()));
        }
    }
    stack.validate();
    return stack;
}

namespace {

DiscreteModel two_point_model(std::function<double(double)> g,
                              std::function<double(double, int)> dg,
                              double lo, double hi) {
    // P = (g, 1 - g) with derivatives (dg, -dg)
    DiscreteModel m;
    m.support_labels = {"0", "1"};
    m.theta_lo = lo;
    m.theta_hi = hi;
    m.prob = [g](double th) {
        Eigen::VectorXd p(2);
        p << g(th), 1.0 - g(th);
        return p;
    };
    m.analytic_derivs = [dg](double th, int k) {
        Eigen::VectorXd d(2);
        const double v = dg(th, k);
        d << v, -v;
        return d;
    };
    return m;
}

DiscreteModel binomial2_model() {
    DiscreteModel m;
    m.support_labels = {"0", "1", "2"};
    m.theta_lo = 0.0;
    m.theta_hi = 1.0;
    m.prob = [](double th) {
        Eigen::VectorXd p(3);
        p << th * th, 2.0 * th * (1.0 - th), (1.0 - th) * (1.0 - th);
        return p;
    };
    m.analytic_derivs = [](double th, int k) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(3);
        if (k == 1) d << 2.0 * th, 2.0 - 4.0 * th, 2.0 * th - 2.0;
        if (k == 2) d << 2.0, -4.0, 2.0;
        return d;
    };
    return m;
}

DensityFamily diagonal_family(const DiscreteModel& model) {
    DensityFamily fam;
    fam.dim = model.size();
    fam.theta_lo = model.theta_lo;
    fam.theta_hi = model.theta_hi;
    const DiscreteModel m = model;
    const auto diag = [](const Eigen::VectorXd& v) {
        Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(v.size(), v.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) d(i, i) = v(i);
        return d;
    };
    fam.rho = [m, diag](double th) { return diag(m.prob(th)); };
    fam.drho = [m, diag](double th, int k) { return diag(m.analytic_derivs(th, k)); };
    return fam;
}

} // namespace

std::vector<CorpusEntry> synthetic_corpus() {
    std::vector<CorpusEntry> out;
    out.push_back({"bernoulli",
                   two_point_model([](double th) { return th; },
                                   [](double, int k) { return k == 1 ? 1.0 : 0.0; }, 0.0, 1.0),
                   0.5});
    out.push_back({"quadratic2",
                   two_point_model([](double th) { return th * th; },
                                   [](double th, int k) {
                                       if (k == 1) return 2.0 * th;
                                       if (k == 2) return 2.0;
                                       return 0.0;
                                   },
                                   0.0, 1.0),
                   0.6});
    out.push_back({"binomial2", binomial2_model(), 0.3});
    out.push_back({"cubic-zero-score",
                   two_point_model([](double th) { return 0.5 + th * th * th; },
                                   [](double th, int k) {
                                       if (k == 1) return 3.0 * th * th;
                                       if (k == 2) return 6.0 * th;
                                       if (k == 3) return 6.0;
                                       return 0.0;
                                   },
                                   -0.79, 0.79),
                   0.0});
    return out;
}

std::vector<QuantumCorpusEntry> quantum_corpus() {
    std::vector<QuantumCorpusEntry> out;
    out.push_back({"qubit-lam0.10", qubit_model({0.10, 0.1}), 0.1});
    out.push_back({"qubit-lam0.25", qubit_model({0.25, 0.1}), 0.1});
    out.push_back({"qubit-lam0.40", qubit_model({0.40, 0.1}), 0.1});
    out.push_back({"qubit-lam0.50", qubit_model({0.50, 0.1}), 0.1});

    const auto corpus = synthetic_corpus();
    out.push_back({"diag-bernoulli", diagonal_family(corpus[0].model), 0.5});
    out.push_back({"diag-binomial2", diagonal_family(corpus[2].model), 0.3});
    return out;
}

CorpusEntry corpus_model(const std::string& name) {
    for (auto& e : synthetic_corpus()) {
        if (e.name == name) return e;
    }
    throw DomainError("unknown corpus model: " + name);
}

} // namespace bhatt
