// Command-line front end: bound tables, estimator existence reports, and
// MSE comparison scans for the built-in scenarios or user-supplied model
// files. See README.md for the file formats and configuration keys.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bhatt/classical.hpp"
#include "bhatt/errors.hpp"
#include "bhatt/evaluation.hpp"
#include "bhatt/model.hpp"
#include "bhatt/quantum.hpp"
#include "bhatt/scenarios.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDivergentStrict = 2;
constexpr int kExitBadConfig = 3;

struct RunConfig {
    std::string scenario;
    std::string model_file;
    double theta0 = std::numeric_limits<double>::quiet_NaN();
    int order = 2;
    double lambda = 0.25;
    long r = 5000;
    std::string grid_spec;
    double tol_rank = 1e-10;
    double p_min = 1e-14;
    double tail_mass = 1e-12;
    bool strict = false;
    std::string out_path;
    int threads = 1;
};

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

std::vector<double> parse_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0;
    long n = 0;
    char extra = 0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%ld%c", &lo, &hi, &n, &extra) != 3 || n < 1 ||
        hi < lo) {
        throw bhatt::DomainError("bad --grid spec (want lo:hi:n): " + spec);
    }
    if (n == 1) return {lo};
    std::vector<double> g(static_cast<size_t>(n));
    for (long i = 0; i < n; ++i) {
        g[static_cast<size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) /
                                             static_cast<double>(n - 1);
    }
    return g;
}

// ---------------------------------------------------------------------------
// Problem resolution: what the flags describe
// ---------------------------------------------------------------------------

struct ClassicalProblem {
    std::optional<bhatt::DiscreteModel> model;  // absent for tabulated files
    bhatt::DerivativeStack stack;
    std::string description;
    bool scannable = false;
};

struct QuantumProblem {
    std::optional<bhatt::DensityFamily> family;  // absent for density files
    bhatt::DensityStack stack;
    std::string description;
    bool scannable = false;
};

struct Problem {
    std::optional<ClassicalProblem> classical;
    std::optional<QuantumProblem> quantum;
};

bool file_is_quantum(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw bhatt::IoError("cannot open model file: " + path);
    std::string line;
    std::getline(in, line);
    return line.find("quantum") != std::string::npos;
}

Problem resolve_problem(const RunConfig& cfg, double grid_max) {
    Problem out;
    if (!cfg.model_file.empty()) {
        if (!std::isnan(cfg.theta0)) {
            std::cerr << "note: --theta0 is ignored for model files (the file pins theta0)\n";
        }
        if (file_is_quantum(cfg.model_file)) {
            QuantumProblem q;
            q.stack = bhatt::load_density_stack_file(cfg.model_file);
            q.description = "density file " + cfg.model_file;
            out.quantum = std::move(q);
        } else {
            ClassicalProblem c;
            c.stack = bhatt::load_tabulated_stack_file(cfg.model_file, cfg.p_min).stack;
            c.description = "model file " + cfg.model_file;
            out.classical = std::move(c);
        }
        return out;
    }
    if (cfg.scenario.empty()) {
        throw bhatt::DomainError("either --scenario or --model-file is required");
    }

    if (cfg.scenario == "qubit") {
        const double theta0 = std::isnan(cfg.theta0) ? 0.1 : cfg.theta0;
        QuantumProblem q;
        q.family = bhatt::qubit_model({cfg.lambda, theta0});
        q.stack = q.family->stack_at(theta0, cfg.order);
        q.description = "qubit scenario (lambda=" + fmt(cfg.lambda) + ")";
        q.scannable = true;
        out.quantum = std::move(q);
        return out;
    }

    ClassicalProblem c;
    double theta0 = cfg.theta0;
    if (cfg.scenario == "mach-zehnder") {
        if (std::isnan(theta0)) theta0 = 1e-3;
        bhatt::MachZehnderConfig mz_cfg;
        mz_cfg.r = cfg.r;
        mz_cfg.theta0 = theta0;
        mz_cfg.tail_mass = cfg.tail_mass;
        mz_cfg.theta_max = std::max(1.5 * theta0, grid_max);
        auto mz = bhatt::mach_zehnder_model(mz_cfg);
        if (!mz.small_angle_ok) {
            std::cerr << "warning: r*theta0 = " << fmt(static_cast<double>(cfg.r) * theta0)
                      << " is outside the tested small-angle regime (r*theta0 <= 50)\n";
        }
        c.model = std::move(mz.model);
        c.description = "mach-zehnder (r=" + std::to_string(cfg.r) + ")";
    } else {
        auto entry = bhatt::corpus_model(cfg.scenario);
        if (std::isnan(theta0)) theta0 = entry.theta0;
        c.model = std::move(entry.model);
        c.description = cfg.scenario + " scenario";
    }
    c.stack = bhatt::evaluate_stack(*c.model, theta0, cfg.order, {cfg.p_min, false});
    c.scannable = true;
    out.classical = std::move(c);
    return out;
}

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

int cmd_bounds(const RunConfig& cfg) {
    Problem problem = resolve_problem(cfg, 0.0);
    const bhatt::Tolerances tol{cfg.tol_rank, 1e-8};

    std::vector<bhatt::BoundReport> reports;
    std::string kind, desc;
    double theta0 = 0.0;
    int max_order = 0, cap = 0, n_points = 0;

    if (problem.classical) {
        auto& prob = *problem.classical;
        if (cfg.order > prob.stack.order) {
            throw bhatt::DomainError("requested order exceeds the available derivatives (" +
                                     std::to_string(prob.stack.order) + ")");
        }
        for (int n = 1; n <= cfg.order; ++n) {
            reports.push_back(bhatt::bhatt_bound(bhatt::bhatt_matrix(prob.stack, n), tol));
        }
        kind = "classical";
        desc = prob.description;
        theta0 = prob.stack.theta0;
        n_points = prob.stack.cols();
        max_order = bhatt::max_nontrivial_order(prob.stack, cfg.tol_rank);
        cap = n_points - 1;
    } else {
        auto& prob = *problem.quantum;
        if (cfg.order > prob.stack.order()) {
            throw bhatt::DomainError("requested order exceeds the available derivatives (" +
                                     std::to_string(prob.stack.order()) + ")");
        }
        for (int n = 1; n <= cfg.order; ++n) {
            reports.push_back(bhatt::q_bhatt_bound(bhatt::q_matrix(prob.stack, n), tol));
        }
        kind = "quantum";
        desc = prob.description;
        theta0 = prob.stack.theta0;
        n_points = prob.stack.dim;
        max_order = bhatt::q_max_nontrivial_order(prob.stack, cfg.tol_rank);
        cap = bhatt::q_order_cap(prob.stack.dim);
    }

    std::cout << "model: " << desc << "  theta0=" << fmt(theta0) << "  N=" << n_points
              << "\n";
    std::cout << "kind: " << kind << "\n";
    std::cout << "max nontrivial order: " << max_order << " (dimension cap " << cap << ")\n";
    std::cout << "order  status     value         effective\n";
    for (const auto& rep : reports) {
        char line[128];
        if (rep.finite()) {
            std::snprintf(line, sizeof(line), "%-6d finite     %-13s %d", rep.order,
                          fmt(rep.value).c_str(), rep.effective_order);
        } else {
            std::snprintf(line, sizeof(line), "%-6d divergent  %-13s -", rep.order, "inf");
        }
        std::cout << line << "\n";
    }

    if (!cfg.out_path.empty()) {
        std::ofstream csv(cfg.out_path);
        if (!csv) throw bhatt::IoError("cannot write " + cfg.out_path);
        csv << "order,status,value,effective_order\n";
        for (const auto& rep : reports) {
            csv << rep.order << ',' << (rep.finite() ? "finite" : "divergent") << ','
                << fmt(rep.finite() ? rep.value : std::numeric_limits<double>::infinity(),
                       "%.17g")
                << ',' << rep.effective_order << "\n";
        }
    }

    const bool any_divergent =
        std::any_of(reports.begin(), reports.end(),
                    [](const bhatt::BoundReport& r) { return !r.finite(); });
    return (cfg.strict && any_divergent) ? kExitDivergentStrict : kExitOk;
}

// ---------------------------------------------------------------------------
// exists
// ---------------------------------------------------------------------------

int cmd_exists(const RunConfig& cfg) {
    Problem problem = resolve_problem(cfg, 0.0);

    bool any_unsolvable = false;
    std::cout << "order  estimator    detail\n";
    for (int n = 0; n <= cfg.order; ++n) {
        bool solvable = false;
        double residual = 0.0, overlap = 0.0;
        if (problem.classical) {
            auto sys = bhatt::existence_system(problem.classical->stack, n);
            auto sol = bhatt::solve_estimator(sys, cfg.tol_rank);
            solvable = sol.solvable;
            residual = sol.residual;
            if (!solvable) overlap = std::abs(sol.witness.dot(sys.b));
        } else {
            auto sys = bhatt::hermitian_existence_system(problem.quantum->stack, n);
            auto sol = bhatt::solve_quantum_estimator(sys, cfg.tol_rank);
            solvable = sol.solvable;
            residual = sol.residual;
            if (!solvable) overlap = std::abs(sol.witness.dot(sys.b));
        }
        char line[128];
        if (solvable) {
            std::snprintf(line, sizeof(line), "%-6d solvable     residual=%s", n,
                          fmt(residual).c_str());
        } else {
            std::snprintf(line, sizeof(line), "%-6d unsolvable   witness |w^T b|=%s", n,
                          fmt(overlap).c_str());
            any_unsolvable = true;
        }
        std::cout << line << "\n";
    }
    return (cfg.strict && any_unsolvable) ? kExitDivergentStrict : kExitOk;
}

// ---------------------------------------------------------------------------
// scan
// ---------------------------------------------------------------------------

std::vector<double> default_grid(double theta0, double lo_domain, double hi_domain,
                                 bool mach_zehnder) {
    double lo, hi;
    if (mach_zehnder) {
        lo = 0.5 * theta0;
        hi = 1.5 * theta0;
    } else {
        lo = theta0 - 0.05;
        hi = theta0 + 0.05;
        const double margin = 1e-6 * (hi_domain - lo_domain);
        lo = std::max(lo, lo_domain + margin);
        hi = std::min(hi, hi_domain - margin);
    }
    std::vector<double> g(401);
    for (int i = 0; i < 401; ++i) g[static_cast<size_t>(i)] = lo + (hi - lo) * i / 400.0;
    return g;
}

int cmd_scan(const RunConfig& cfg) {
    const bhatt::Tolerances tol{cfg.tol_rank, 1e-8};

    // the Mach-Zehnder support window must cover the scan, so the grid is
    // resolved before the model is built
    std::vector<double> grid;
    if (!cfg.grid_spec.empty()) grid = parse_grid(cfg.grid_spec);

    Problem problem = resolve_problem(cfg, grid.empty() ? 0.0 : grid.back());
    bhatt::ComparisonInputs inputs;
    double theta0 = 0.0;

    if (problem.classical) {
        auto& prob = *problem.classical;
        if (!prob.scannable) {
            throw bhatt::DomainError("scan needs a scenario model, not a tabulated file");
        }
        theta0 = prob.stack.theta0;
        if (grid.empty()) {
            grid = default_grid(theta0, prob.model->theta_lo, prob.model->theta_hi,
                                cfg.scenario == "mach-zehnder");
        }
        for (int n = 1; n <= cfg.order; ++n) {
            auto C = bhatt::bhatt_matrix(prob.stack, n);
            auto rep = bhatt::bhatt_bound(C, tol);
            inputs.bounds.push_back(rep);
            inputs.existence.emplace_back(
                n, bhatt::solve_estimator(bhatt::existence_system(prob.stack, n), cfg.tol_rank)
                       .solvable);
            if (!rep.finite()) {
                std::cerr << "note: order-" << n << " bound is divergent; no estimator curve\n";
                continue;
            }
            auto est = bhatt::bhatt_estimator(prob.stack, C, tol);
            inputs.curves.push_back(bhatt::mse_scan(*prob.model, est, grid,
                                                    "bhb" + std::to_string(n), cfg.threads));
        }
        inputs.max_nontrivial = bhatt::max_nontrivial_order(prob.stack, cfg.tol_rank);
    } else {
        auto& prob = *problem.quantum;
        if (!prob.scannable) {
            throw bhatt::DomainError("scan needs a scenario model, not a density file");
        }
        theta0 = prob.stack.theta0;
        if (grid.empty()) {
            grid = default_grid(theta0, prob.family->theta_lo, prob.family->theta_hi, false);
        }
        for (int n = 1; n <= cfg.order; ++n) {
            auto Q = bhatt::q_matrix(prob.stack, n);
            auto rep = bhatt::q_bhatt_bound(Q, tol);
            inputs.bounds.push_back(rep);
            inputs.existence.emplace_back(
                n, bhatt::solve_quantum_estimator(
                       bhatt::hermitian_existence_system(prob.stack, n), cfg.tol_rank)
                       .solvable);
            if (!rep.finite()) {
                std::cerr << "note: order-" << n << " bound is divergent; no estimator curve\n";
                continue;
            }
            auto est = bhatt::q_bhatt_estimator(prob.stack, Q, 1e-12, tol);
            inputs.curves.push_back(bhatt::quantum_mse_scan(
                prob.family->rho, est, grid, "qbhb" + std::to_string(n), cfg.threads));
        }
        inputs.max_nontrivial = bhatt::q_max_nontrivial_order(prob.stack, cfg.tol_rank);
    }

    // CSV to --out (summary to stdout), or CSV to stdout (summary to stderr)
    std::ostream* summary_stream = &std::cout;
    if (!cfg.out_path.empty()) {
        std::ofstream csv(cfg.out_path);
        if (!csv) throw bhatt::IoError("cannot write " + cfg.out_path);
        bhatt::write_comparison_csv(csv, inputs);
    } else {
        bhatt::write_comparison_csv(std::cout, inputs);
        summary_stream = &std::cerr;
    }

    *summary_stream << bhatt::comparison_summary(inputs);
    if (inputs.curves.size() >= 2 && grid.size() >= 2) {
        const auto& first = inputs.curves.front();
        const auto& last = inputs.curves.back();
        const double width = grid.back() - grid.front();
        *summary_stream << "integrated MSE gap (" << first.estimator_id << " - "
                        << last.estimator_id << "):\n";
        for (int j = 1; j <= 10; ++j) {
            double delta = width * j / 10.0;
            // keep the interval inside the grid around theta0
            delta = std::min(delta, 2.0 * (grid.back() - theta0));
            delta = std::min(delta, 2.0 * (theta0 - grid.front()));
            const double gap = bhatt::integrated_mse_gap(first, last, delta, theta0);
            *summary_stream << "  delta=" << fmt(delta) << "  gap=" << fmt(gap) << "\n";
        }
    }

    const bool any_divergent =
        std::any_of(inputs.bounds.begin(), inputs.bounds.end(),
                    [](const bhatt::BoundReport& r) { return !r.finite(); });
    return (cfg.strict && any_divergent) ? kExitDivergentStrict : kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    RunConfig cfg;

    CLI::App app{"Classical and quantum Cramer-Rao / Bhattacharyya bounds for "
                 "finite-outcome parametric models"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value config file")->envname("BHATT_CONFIG");

    app.add_option("--scenario", cfg.scenario,
                   "bernoulli | quadratic2 | binomial2 | cubic-zero-score | mach-zehnder | qubit");
    app.add_option("--model-file", cfg.model_file, "tabulated classical or density-stack file");
    app.add_option("--theta0", cfg.theta0, "working point (scenario default otherwise)");
    app.add_option("--order", cfg.order, "highest bound order")->check(CLI::Range(1, 64));
    app.add_option("--lambda", cfg.lambda, "qubit purity parameter in (0,1)");
    app.add_option("--r", cfg.r, "photons per arm for mach-zehnder")->check(CLI::PositiveNumber);
    app.add_option("--grid", cfg.grid_spec, "scan grid lo:hi:n");
    app.add_option("--tol-rank", cfg.tol_rank, "relative singular-value cutoff");
    app.add_option("--p-min", cfg.p_min, "support pruning threshold");
    app.add_option("--tail-mass", cfg.tail_mass, "mach-zehnder truncation tolerance");
    app.add_flag("--strict", cfg.strict, "exit 2 when any requested bound is divergent");
    app.add_option("--out", cfg.out_path, "CSV output path");
    app.add_option("--threads", cfg.threads, "concurrent grid evaluation")
        ->check(CLI::Range(1, 256));

    auto* bounds = app.add_subcommand("bounds", "bound table for orders 1..n");
    auto* exists = app.add_subcommand("exists", "estimator existence per order 0..n");
    auto* scan = app.add_subcommand("scan", "MSE comparison scan across a theta grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadConfig;
    }

    try {
        if (bounds->parsed()) return cmd_bounds(cfg);
        if (exists->parsed()) return cmd_exists(cfg);
        if (scan->parsed()) return cmd_scan(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadConfig;
    }
    return kExitBadConfig;
}
