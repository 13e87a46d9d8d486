#pragma once

// Similarity feedback between agents: ensemble statistics, the six Gaussian
// weight channels, and the renormalized fields they induce.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "aqia/agent.hpp"

namespace aqia {

using EdgeMask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

inline constexpr double kDefaultEpsilon = 1e-6;

struct EnsembleStats {
    double muS = 0.0, muB = 0.0, muU = 0.0;
    double sigmaS = 0.0, sigmaB = 0.0, sigmaU = 0.0;  // population standard deviations
    double epsilon = kDefaultEpsilon;
};

/// Weight channels in the order SS, BB, UU, SB, SU, BU.
enum Channel : int { kSS = 0, kBB, kUU, kSB, kSU, kBU, kChannelCount };

struct ChannelWeights {
    Eigen::MatrixXd wS, wB, wU, wSB, wSU, wBU;
    EdgeMask mask;
    Eigen::MatrixXd aggregate;  // elementwise sum of the six channels

    int size() const { return static_cast<int>(wS.rows()); }
    const Eigen::MatrixXd& channel(Channel c) const;
};

/// Options that select between literal and alternative readings of the
/// feedback rules.
struct KernelOptions {
    double epsilon = kDefaultEpsilon;
    /// Use centered U_j - mu_U in the U-channel field sum.
    bool centered_u_field = false;
};

EnsembleStats compute_stats(std::span<const Summary> summaries, double epsilon = kDefaultEpsilon);

ChannelWeights channel_weights(std::span<const Summary> summaries, const EnsembleStats& stats,
                               const EdgeMask& mask);

/// All-zero weights of size N on the given mask (feedback disabled).
ChannelWeights zero_weights(const EdgeMask& mask);

std::vector<FeedbackFields> renormalized_fields(std::span<const Summary> summaries,
                                                const ChannelWeights& w,
                                                const KernelOptions& options = {});

/// Symmetric zero-diagonal Erdos-Renyi mask; deterministic in seed.
EdgeMask sample_mask(int N, double edge_density, std::uint64_t seed);

EdgeMask complete_mask(int N);

}  // namespace aqia
