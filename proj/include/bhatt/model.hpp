#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bhatt {

/// A finite-outcome probability family P_theta(x_i) over an open parameter
/// interval, with optional analytic derivative access.
struct DiscreteModel {
    std::vector<std::string> support_labels;
    std::function<Eigen::VectorXd(double)> prob;
    // (theta, k) -> k-th derivative vector; empty means finite differences
    std::function<Eigen::VectorXd(double, int)> analytic_derivs;
    double theta_lo = 0.0;
    double theta_hi = 1.0;

    int size() const { return static_cast<int>(support_labels.size()); }
    bool in_domain(double theta) const { return theta > theta_lo && theta < theta_hi; }
};

/// Table of derivatives d^k P_theta0(x_i) for k = 0..order over the support
/// points that survived pruning (the set of outcomes with positive
/// probability at theta0). Row 0 is P_theta0 itself.
struct DerivativeStack {
    double theta0 = 0.0;
    Eigen::MatrixXd table;          // (order+1) x kept
    int order = 0;
    std::vector<int> kept_indices;  // positions in the original support
    double pre_prune_mass = 1.0;    // row-0 sum before any pruning
    double retained_mass = 1.0;     // row-0 sum of the kept columns

    int cols() const { return static_cast<int>(table.cols()); }
    Eigen::VectorXd row(int k) const { return table.row(k).transpose(); }
};

struct DerivOptions {
    double p_min = 1e-14;
    bool force_finite_difference = false;
};

/// Central-difference derivative of order k (1..6) with one Richardson
/// extrapolation step combining steps h and h/2.
double finite_difference_derivative(const std::function<double(double)>& f,
                                    double theta0, int k, double h);

/// Step size used by the finite-difference fallback for derivative order k.
double fd_default_step(double theta0, int k);

/// Half-width (in units of h) of the order-k central stencil.
int fd_stencil_halfwidth(int k);

/// Build the derivative table at theta0 up to the requested order, using
/// analytic derivatives when the model provides them and central
/// differences otherwise, then prune zero-probability support points.
DerivativeStack evaluate_stack(const DiscreteModel& model, double theta0, int order,
                               const DerivOptions& opts = {});

/// Drop support points with P_theta0 <= p_min. Idempotent for fixed p_min.
DerivativeStack prune_support(const DerivativeStack& stack, double p_min);

/// Tabulated-model text format: header "# theta0=<v> order=<n>", then one
/// line per support point with columns "label p d1 ... dn".
struct TabulatedModel {
    std::vector<std::string> labels;
    DerivativeStack stack;
};

TabulatedModel load_tabulated_stack(std::istream& in, double p_min = 1e-14);
TabulatedModel load_tabulated_stack_file(const std::string& path, double p_min = 1e-14);

} // namespace bhatt
