#include "aqia/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aqia {

void LoopConfig::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (!(mixing > 0.0 && mixing <= 1.0)) throw std::invalid_argument("mixing must lie in (0, 1]");
    if (!(kernel.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

ChannelWeights weights_for(std::span<const Summary> summaries, const EdgeMask& mask,
                           const LoopConfig& config) {
    const auto stats = compute_stats(summaries, config.kernel.epsilon);
    if (!config.feedback) return zero_weights(mask);
    return channel_weights(summaries, stats, mask);
}

double interaction_energy(std::span<const Summary> summaries, const ChannelWeights& w) {
    const auto N = static_cast<Eigen::Index>(summaries.size());
    if (w.size() != N) throw std::invalid_argument("weight matrices do not match ensemble size");
    double total = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        const Summary& a = summaries[i];
        for (Eigen::Index j = i + 1; j < N; ++j) {
            const Summary& b = summaries[j];
            total += w.wS(i, j) * a.S * b.S + w.wB(i, j) * a.B * b.B + w.wU(i, j) * a.U * b.U +
                     w.wSB(i, j) * (a.S * b.B + b.S * a.B) +
                     w.wSU(i, j) * (a.S * b.U + b.S * a.U) +
                     w.wBU(i, j) * (a.B * b.U + b.B * a.U);
        }
    }
    return -total;
}

double energy_functional(std::span<const Summary> summaries, const ChannelWeights& w) {
    double bare = 0.0;
    for (const auto& m : summaries) bare += m.U;
    return bare + interaction_energy(summaries, w);
}

double total_energy(std::span<const Summary> summaries, const EdgeMask& mask,
                    const LoopConfig& config) {
    return energy_functional(summaries, weights_for(summaries, mask, config));
}

std::vector<Summary> bare_summaries(std::span<const AgentParams> agents) {
    std::vector<Summary> out;
    out.reserve(agents.size());
    for (const auto& a : agents) out.push_back(solve_agent(a, FeedbackFields{}));
    return out;
}

namespace {

std::vector<Summary> mix(std::span<const Summary> old_m, std::span<const Summary> new_m,
                         double eta) {
    std::vector<Summary> out(old_m.size());
    for (std::size_t i = 0; i < old_m.size(); ++i)
        for (int c = 0; c < 3; ++c) out[i][c] = (1.0 - eta) * old_m[i][c] + eta * new_m[i][c];
    return out;
}

double max_abs_change(std::span<const Summary> a, std::span<const Summary> b) {
    double r = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int c = 0; c < 3; ++c) r = std::max(r, std::abs(a[i][c] - b[i][c]));
    return r;
}

}  // namespace

MapResult apply_map(std::span<const AgentParams> agents, std::span<const Summary> summaries,
                    const EdgeMask& mask, const LoopConfig& config) {
    if (agents.size() != summaries.size())
        throw std::invalid_argument("agent and summary counts differ (" +
                                    std::to_string(agents.size()) + " vs " +
                                    std::to_string(summaries.size()) + ")");
    MapResult r;
    r.weights = weights_for(summaries, mask, config);
    r.fields = renormalized_fields(summaries, r.weights, config.kernel);
    r.summaries.reserve(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i)
        r.summaries.push_back(solve_agent(agents[i], r.fields[i]));
    if (config.mixing < 1.0) r.summaries = mix(summaries, r.summaries, config.mixing);
    return r;
}

LoopResult run_to_convergence(std::span<const AgentParams> agents, const EdgeMask& mask,
                              const LoopConfig& config, std::vector<Summary> init) {
    config.validate();
    if (init.size() != agents.size())
        throw std::invalid_argument("initial summaries must have one entry per agent");

    LoopResult out;
    FixedPoint& fp = out.fixed_point;
    IterationTrace& trace = out.trace;

    std::vector<Summary> current = std::move(init);
    double energy = total_energy(current, mask, config);
    trace.energies.push_back(energy);
    if (config.record_trace) trace.summaries_per_iter.push_back(current);

    for (int it = 1; it <= config.max_iters; ++it) {
        MapResult step = apply_map(agents, current, mask, config);
        double next_energy = total_energy(step.summaries, mask, config);
        if (config.descent_guard && config.mixing == 1.0 &&
            next_energy > energy + config.descent_slack) {
            ++fp.guard_retries;
            step.summaries = mix(current, step.summaries, 0.5);
            next_energy = total_energy(step.summaries, mask, config);
        }
        if (next_energy > energy + config.descent_slack) ++fp.energy_increases;

        const double residual = max_abs_change(current, step.summaries);
        trace.residuals.push_back(residual);
        trace.energies.push_back(next_energy);
        if (config.record_trace) trace.summaries_per_iter.push_back(step.summaries);

        const double delta = std::abs(next_energy - energy);
        current = std::move(step.summaries);
        energy = next_energy;
        fp.iterations = it;
        fp.final_residual = residual;
        if (delta < config.tol) {
            fp.converged = true;
            break;
        }
    }

    fp.weights = weights_for(current, mask, config);
    fp.fields = renormalized_fields(current, fp.weights, config.kernel);
    fp.energy = energy;
    fp.summaries = std::move(current);
    return out;
}

LoopResult run_to_convergence(std::span<const AgentParams> agents, const EdgeMask& mask,
                              const LoopConfig& config) {
    return run_to_convergence(agents, mask, config, bare_summaries(agents));
}

JacobianResult jacobian(std::span<const AgentParams> agents, const EdgeMask& mask,
                        const LoopConfig& config, const FixedPoint& fp, double step) {
    if (!fp.converged) throw std::invalid_argument("jacobian requires a converged fixed point");
    if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
    LoopConfig pure = config;
    pure.mixing = 1.0;

    const auto N = static_cast<Eigen::Index>(fp.summaries.size());
    const Eigen::Index dim = 3 * N;
    JacobianResult res;
    res.matrix = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<Summary> probe = fp.summaries;
    for (Eigen::Index col = 0; col < dim; ++col) {
        const auto agent = static_cast<std::size_t>(col / 3);
        const int channel = static_cast<int>(col % 3);
        const double base = probe[agent][channel];
        probe[agent][channel] = base + step;
        const auto plus = apply_map(agents, probe, mask, pure).summaries;
        probe[agent][channel] = base - step;
        const auto minus = apply_map(agents, probe, mask, pure).summaries;
        probe[agent][channel] = base;
        for (Eigen::Index row = 0; row < dim; ++row) {
            const auto a = static_cast<std::size_t>(row / 3);
            const int c = static_cast<int>(row % 3);
            res.matrix(row, col) = (plus[a][c] - minus[a][c]) / (2.0 * step);
        }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(res.matrix, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("general eigensolver failed on the Jacobian");
    const auto& ev = solver.eigenvalues();
    res.moduli.reserve(static_cast<std::size_t>(ev.size()));
    for (Eigen::Index k = 0; k < ev.size(); ++k) res.moduli.push_back(std::abs(ev[k]));
    std::sort(res.moduli.begin(), res.moduli.end(), std::greater<>());
    return res;
}

}  // namespace aqia
