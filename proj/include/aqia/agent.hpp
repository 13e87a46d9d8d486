#pragma once

// Finite transverse-field Ising patches ("agents"): exact Hamiltonian
// construction in the Z basis, dense ground-state solve, and the reduced
// observables (S, B, U) that summarize an agent for the feedback layer.
//
// Basis convention: state index a, qubit k carries bit (a >> k) & 1, and
// bit 0 is the Z = +1 eigenstate.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace aqia {

inline constexpr int kMaxQubits = 14;

using Bond = std::pair<int, int>;

/// Microscopic parameters of one agent.
struct AgentParams {
    int n = 0;
    std::vector<Bond> bonds;  // k < l, no duplicates
    std::vector<double> h;    // one per qubit
    std::vector<double> J;    // one per bond
    double gamma = 0.0;

    /// Throws std::invalid_argument if any invariant is broken.
    void validate() const;
    std::size_t dim() const { return std::size_t{1} << n; }
};

/// Open chain (k, k+1) for k = 0..n-2.
std::vector<Bond> chain_bonds(int n);
/// Periodic chain; identical to chain_bonds for n <= 2.
std::vector<Bond> ring_bonds(int n);

struct DenseHamiltonian {
    Eigen::MatrixXd entries;
    std::size_t dim() const { return static_cast<std::size_t>(entries.rows()); }
};

struct GroundState {
    double energy = 0.0;
    Eigen::VectorXd amplitudes;
};

/// Summary vector m_i = (S, B, U) of one agent.
struct Summary {
    double S = 0.0;
    double B = 0.0;
    double U = 0.0;

    double operator[](int channel) const { return channel == 0 ? S : (channel == 1 ? B : U); }
    double& operator[](int channel) { return channel == 0 ? S : (channel == 1 ? B : U); }
    bool operator==(const Summary&) const = default;
};

/// Feedback fields acting on one agent through S-hat, B-hat and U-hat.
struct FeedbackFields {
    double phiS = 0.0;
    double phiB = 0.0;
    double phiU = 0.0;
    bool operator==(const FeedbackFields&) const = default;
};

DenseHamiltonian build_hamiltonian(const AgentParams& params);

/// H0 - phiS * S-hat - phiB * B-hat - phiU * U-hat.
DenseHamiltonian build_mf_hamiltonian(const AgentParams& params, const FeedbackFields& fields);

/// Lowest eigenpair by dense symmetric eigendecomposition. Degenerate ground
/// levels resolve to the first eigenvector in the solver's ordering.
GroundState ground_state(const DenseHamiltonian& H);

Summary measure_summaries(const AgentParams& params, const GroundState& gs);

/// Ground state of the mean-field Hamiltonian followed by measurement against
/// the bare Hamiltonian.
Summary solve_agent(const AgentParams& params, const FeedbackFields& fields);

}  // namespace aqia
