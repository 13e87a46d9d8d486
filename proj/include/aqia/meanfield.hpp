#pragma once

// The self-consistency map F: weights -> fields -> per-agent mean-field
// ground states -> new summaries, the mean-field energy functional it is
// monitored by, and finite-difference linearization at fixed points.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aqia/agent.hpp"
#include "aqia/kernels.hpp"

namespace aqia {

struct LoopConfig {
    double tol = 1e-6;        // |E(n+1) - E(n)| stopping threshold
    int max_iters = 500;
    double mixing = 1.0;      // eta in (0, 1]
    bool record_trace = false;
    /// Retry an energy-raising undamped step once with eta = 0.5.
    bool descent_guard = true;
    double descent_slack = 1e-9;
    /// When false every weight is forced to zero and F is the bare solve.
    bool feedback = true;
    KernelOptions kernel;

    void validate() const;
};

struct IterationTrace {
    std::vector<double> energies;                         // E_tot per iteration, index 0 = init
    std::vector<double> residuals;                        // max |m(n+1) - m(n)| per step
    std::vector<std::vector<Summary>> summaries_per_iter;  // only when record_trace
};

struct FixedPoint {
    std::vector<Summary> summaries;
    double energy = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<FeedbackFields> fields;
    ChannelWeights weights;   // evaluated at the final summaries
    int guard_retries = 0;    // damped retries taken by the descent guard
    int energy_increases = 0; // steps that still raised E beyond the slack
    double final_residual = 0.0;
};

struct MapResult {
    std::vector<Summary> summaries;
    std::vector<FeedbackFields> fields;
    ChannelWeights weights;
};

/// Weights for the given summaries under the loop's kernel settings.
ChannelWeights weights_for(std::span<const Summary> summaries, const EdgeMask& mask,
                           const LoopConfig& config);

double energy_functional(std::span<const Summary> summaries, const ChannelWeights& w);

/// Interaction part of the functional (everything except sum_i U_i).
double interaction_energy(std::span<const Summary> summaries, const ChannelWeights& w);

/// E_tot: the functional evaluated with weights recomputed from the summaries.
double total_energy(std::span<const Summary> summaries, const EdgeMask& mask,
                    const LoopConfig& config);

/// Bare (zero-field) ground-state summaries of every agent.
std::vector<Summary> bare_summaries(std::span<const AgentParams> agents);

/// One application of F, mixed with the input when config.mixing < 1.
MapResult apply_map(std::span<const AgentParams> agents, std::span<const Summary> summaries,
                    const EdgeMask& mask, const LoopConfig& config);

struct LoopResult {
    FixedPoint fixed_point;
    IterationTrace trace;
};

LoopResult run_to_convergence(std::span<const AgentParams> agents, const EdgeMask& mask,
                              const LoopConfig& config, std::vector<Summary> init);

LoopResult run_to_convergence(std::span<const AgentParams> agents, const EdgeMask& mask,
                              const LoopConfig& config);

struct JacobianResult {
    Eigen::MatrixXd matrix;        // 3N x 3N, component index 3*i + channel
    std::vector<double> moduli;    // |lambda_k| sorted descending
    double spectral_radius() const { return moduli.empty() ? 0.0 : moduli.front(); }
};

/// Central-difference dF/dm at the fixed point, mixing disabled.
JacobianResult jacobian(std::span<const AgentParams> agents, const EdgeMask& mask,
                        const LoopConfig& config, const FixedPoint& fp, double step = 1e-5);

}  // namespace aqia
