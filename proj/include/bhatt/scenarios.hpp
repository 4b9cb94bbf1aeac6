#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bhatt/model.hpp"
#include "bhatt/quantum.hpp"

namespace bhatt {

/// Bessel function J_q(x) of integer order, x >= 0. Negative orders via
/// J_{-q} = (-1)^q J_q. Accurate to ~1e-12 relative for |x| <= 1e4.
double bessel_j(long q, double x);

/// J_0(x) .. J_nmax(x) in one backward-recurrence sweep (Miller's
/// algorithm, normalized with J_0 + 2 sum J_{2k} = 1).
Eigen::VectorXd bessel_j_array(int nmax, double x);

/// Twin-Fock Mach-Zehnder interferometry in the small-angle regime:
/// P_theta(2q) = J_q(r theta)^2 over even photon-count differences 2q.
struct MachZehnderConfig {
    long r = 5000;
    double theta0 = 1e-3;
    double tail_mass = 1e-12;
    // widest theta the fixed support window must cover; 0 means 1.5 * theta0
    double theta_max = 0.0;
};

struct MachZehnderModel {
    DiscreteModel model;
    int q_window = 0;          // support is q in [-q_window, q_window]
    bool small_angle_ok = true;
};

MachZehnderModel mach_zehnder_model(const MachZehnderConfig& cfg);

/// Qubit rotated by U = exp(-i theta^2 sigma_x) from diag(lambda, 1-lambda).
struct QubitConfig {
    double lambda = 0.25;
    double theta0 = 0.1;
};

/// A theta-parametrized density-matrix family with analytic derivatives.
struct DensityFamily {
    int dim = 0;
    std::function<Eigen::MatrixXcd(double)> rho;
    // (theta, k) -> d^k rho; empty means entrywise finite differences
    std::function<Eigen::MatrixXcd(double, int)> drho;
    double theta_lo = 0.0;
    double theta_hi = 1.0;

    DensityStack stack_at(double theta0, int order) const;
};

DensityFamily qubit_model(const QubitConfig& cfg);

/// Reference Q matrix for the qubit scenario in closed form; regression
/// oracle for q_matrix.
Eigen::Matrix2d qubit_q_closed_form(double lambda, double theta);

/// Deterministic test fixtures with exact polynomial derivatives.
struct CorpusEntry {
    std::string name;
    DiscreteModel model;
    double theta0 = 0.5;
};

struct QuantumCorpusEntry {
    std::string name;
    DensityFamily family;
    double theta0 = 0.1;
};

std::vector<CorpusEntry> synthetic_corpus();
std::vector<QuantumCorpusEntry> quantum_corpus();

/// Look up a corpus model by name; throws DomainError for unknown names.
CorpusEntry corpus_model(const std::string& name);

} // namespace bhatt
