#include "bhatt/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "bhatt/errors.hpp"

namespace bhatt {

namespace {

struct Stencil {
    int halfwidth;
    // weights over offsets -halfwidth..halfwidth, to be divided by h^k
    const double* weights;
};

constexpr double kW1[] = {-0.5, 0.0, 0.5};
constexpr double kW2[] = {1.0, -2.0, 1.0};
constexpr double kW3[] = {-0.5, 1.0, 0.0, -1.0, 0.5};
constexpr double kW4[] = {1.0, -4.0, 6.0, -4.0, 1.0};
constexpr double kW5[] = {-0.5, 2.0, -2.5, 0.0, 2.5, -2.0, 0.5};
constexpr double kW6[] = {1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0};

Stencil stencil_for(int k) {
    switch (k) {
        case 1: return {1, kW1};
        case 2: return {1, kW2};
        case 3: return {2, kW3};
        case 4: return {2, kW4};
        case 5: return {3, kW5};
        case 6: return {3, kW6};
        default: throw DomainError("finite_difference_derivative: order must be in 1..6");
    }
}

double apply_stencil(const std::function<double(double)>& f, double theta0, int k,
                     double h) {
    const Stencil s = stencil_for(k);
    double acc = 0.0;
    for (int o = -s.halfwidth; o <= s.halfwidth; ++o) {
        const double w = s.weights[o + s.halfwidth];
        if (w != 0.0) acc += w * f(theta0 + o * h);
    }
    return acc / std::pow(h, k);
}

} // namespace

int fd_stencil_halfwidth(int k) { return stencil_for(k).halfwidth; }

double fd_default_step(double theta0, int k) {
    const double eps = std::numeric_limits<double>::epsilon();
    return std::max(std::abs(theta0), 1.0) * std::pow(eps, 1.0 / (k + 2));
}

double finite_difference_derivative(const std::function<double(double)>& f,
                                    double theta0, int k, double h) {
    if (!(h > 0.0)) throw StepError("finite_difference_derivative: step must be positive");
    const double coarse = apply_stencil(f, theta0, k, h);
    const double fine = apply_stencil(f, theta0, k, h / 2.0);
    // Both stencils are O(h^2) accurate; one Richardson step cancels that term.
    return (4.0 * fine - coarse) / 3.0;
}

DerivativeStack prune_support(const DerivativeStack& stack, double p_min) {
    if (p_min < 0.0) throw DomainError("prune_support: p_min must be >= 0");

    std::vector<int> keep_cols;
    keep_cols.reserve(static_cast<size_t>(stack.cols()));
    for (int j = 0; j < stack.cols(); ++j) {
        if (stack.table(0, j) > p_min) keep_cols.push_back(j);
    }
    if (keep_cols.size() < 2) {
        throw DegenerateModel("prune_support: fewer than 2 support points remain");
    }
    if (static_cast<int>(keep_cols.size()) == stack.cols()) return stack;

    DerivativeStack out;
    out.theta0 = stack.theta0;
    out.order = stack.order;
    out.pre_prune_mass = stack.pre_prune_mass;
    out.table.resize(stack.order + 1, static_cast<Eigen::Index>(keep_cols.size()));
    out.kept_indices.reserve(keep_cols.size());
    for (size_t jj = 0; jj < keep_cols.size(); ++jj) {
        out.table.col(static_cast<Eigen::Index>(jj)) = stack.table.col(keep_cols[jj]);
        out.kept_indices.push_back(stack.kept_indices[static_cast<size_t>(keep_cols[jj])]);
    }
    out.retained_mass = out.table.row(0).sum();
    return out;
}

DerivativeStack evaluate_stack(const DiscreteModel& model, double theta0, int order,
                               const DerivOptions& opts) {
    if (!model.in_domain(theta0)) {
        throw DomainError("evaluate_stack: theta0 outside the model domain");
    }
    if (order < 1) throw DomainError("evaluate_stack: order must be >= 1");
    const int n_support = model.size();
    if (n_support < 2) throw DegenerateModel("evaluate_stack: model needs N >= 2");

    DerivativeStack stack;
    stack.theta0 = theta0;
    stack.order = order;
    stack.table.resize(order + 1, n_support);

    Eigen::VectorXd p0 = model.prob(theta0);
    if (p0.size() != n_support) {
        throw DimensionMismatch("evaluate_stack: prob() size mismatch");
    }
    stack.table.row(0) = p0.transpose();

    const bool analytic = static_cast<bool>(model.analytic_derivs) && !opts.force_finite_difference;
    if (analytic) {
        for (int k = 1; k <= order; ++k) {
            Eigen::VectorXd dk = model.analytic_derivs(theta0, k);
            if (dk.size() != n_support) {
                throw DimensionMismatch("evaluate_stack: analytic_derivs size mismatch");
            }
            stack.table.row(k) = dk.transpose();
        }
    } else {
        for (int k = 1; k <= order; ++k) {
            const double h = fd_default_step(theta0, k);
            const int hw = fd_stencil_halfwidth(k);
            if (!model.in_domain(theta0 - hw * h) || !model.in_domain(theta0 + hw * h)) {
                throw StepError("evaluate_stack: finite-difference stencil leaves the domain");
            }
            for (int j = 0; j < n_support; ++j) {
                auto fj = [&model, j](double th) { return model.prob(th)(j); };
                stack.table(k, j) = finite_difference_derivative(fj, theta0, k, h);
            }
        }
    }

    stack.kept_indices.resize(static_cast<size_t>(n_support));
    for (int j = 0; j < n_support; ++j) stack.kept_indices[static_cast<size_t>(j)] = j;
    stack.pre_prune_mass = p0.sum();
    stack.retained_mass = stack.pre_prune_mass;

    return prune_support(stack, opts.p_min);
}

namespace {

bool parse_header(const std::string& line, double* theta0, int* order, bool* quantum) {
    // accepted: "# theta0=<v> order=<n>" with optional "quantum N=<dim>"
    if (line.empty() || line[0] != '#') return false;
    *quantum = line.find("quantum") != std::string::npos;
    const auto grab = [&line](const char* key) -> std::string {
        const auto pos = line.find(key);
        if (pos == std::string::npos) return {};
        auto start = pos + std::string(key).size();
        auto end = line.find_first_of(" \t", start);
        return line.substr(start, end == std::string::npos ? std::string::npos : end - start);
    };
    const std::string t = grab("theta0=");
    const std::string n = grab("order=");
    if (t.empty() || n.empty()) return false;
    try {
        *theta0 = std::stod(t);
        *order = std::stoi(n);
    } catch (const std::exception&) {
        return false;
    }
    return true;
}

} // namespace

TabulatedModel load_tabulated_stack(std::istream& in, double p_min) {
    std::string line;
    double theta0 = 0.0;
    int order = 0;
    bool quantum = false;
    if (!std::getline(in, line) || !parse_header(line, &theta0, &order, &quantum)) {
        throw IoError("tabulated model: missing '# theta0=<v> order=<n>' header");
    }
    if (quantum) throw IoError("tabulated model: file declares a quantum stack");
    if (order < 1) throw IoError("tabulated model: order must be >= 1");

    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string label;
        if (!(ls >> label)) continue;
        std::vector<double> vals(static_cast<size_t>(order) + 1);
        for (double& v : vals) {
            if (!(ls >> v)) throw IoError("tabulated model: short line for label " + label);
        }
        labels.push_back(label);
        rows.push_back(std::move(vals));
    }
    if (rows.size() < 2) throw IoError("tabulated model: need at least 2 support points");

    DerivativeStack stack;
    stack.theta0 = theta0;
    stack.order = order;
    stack.table.resize(order + 1, static_cast<Eigen::Index>(rows.size()));
    for (size_t j = 0; j < rows.size(); ++j) {
        for (int k = 0; k <= order; ++k) {
            stack.table(k, static_cast<Eigen::Index>(j)) = rows[j][static_cast<size_t>(k)];
        }
    }
    stack.kept_indices.resize(rows.size());
    for (size_t j = 0; j < rows.size(); ++j) stack.kept_indices[j] = static_cast<int>(j);
    stack.pre_prune_mass = stack.table.row(0).sum();
    stack.retained_mass = stack.pre_prune_mass;

    TabulatedModel out;
    out.labels = std::move(labels);
    out.stack = prune_support(stack, p_min);
    return out;
}

TabulatedModel load_tabulated_stack_file(const std::string& path, double p_min) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    return load_tabulated_stack(in, p_min);
}

} // namespace bhatt
