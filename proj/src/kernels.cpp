#include "aqia/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "aqia/random.hpp"

namespace aqia {

const Eigen::MatrixXd& ChannelWeights::channel(Channel c) const {
    switch (c) {
        case kSS: return wS;
        case kBB: return wB;
        case kUU: return wU;
        case kSB: return wSB;
        case kSU: return wSU;
        case kBU: return wBU;
        default: throw std::out_of_range("unknown weight channel");
    }
}

EnsembleStats compute_stats(std::span<const Summary> summaries, double epsilon) {
    const auto N = summaries.size();
    if (N < 2)
        throw std::invalid_argument("ensemble statistics need at least 2 agents, got " +
                                    std::to_string(N));
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
    EnsembleStats st;
    st.epsilon = epsilon;
    double mean[3] = {0, 0, 0};
    for (const auto& m : summaries)
        for (int c = 0; c < 3; ++c) mean[c] += m[c];
    for (double& v : mean) v /= static_cast<double>(N);
    double var[3] = {0, 0, 0};
    for (const auto& m : summaries)
        for (int c = 0; c < 3; ++c) var[c] += (m[c] - mean[c]) * (m[c] - mean[c]);
    for (double& v : var) v /= static_cast<double>(N);
    st.muS = mean[0];
    st.muB = mean[1];
    st.muU = mean[2];
    st.sigmaS = std::sqrt(var[0]);
    st.sigmaB = std::sqrt(var[1]);
    st.sigmaU = std::sqrt(var[2]);
    return st;
}

ChannelWeights zero_weights(const EdgeMask& mask) {
    const auto N = mask.rows();
    ChannelWeights w;
    w.wS = w.wB = w.wU = w.wSB = w.wSU = w.wBU = w.aggregate = Eigen::MatrixXd::Zero(N, N);
    w.mask = mask;
    return w;
}

ChannelWeights channel_weights(std::span<const Summary> summaries, const EnsembleStats& stats,
                               const EdgeMask& mask) {
    const auto N = static_cast<Eigen::Index>(summaries.size());
    if (mask.rows() != N || mask.cols() != N)
        throw std::invalid_argument("edge mask is " + std::to_string(mask.rows()) + "x" +
                                    std::to_string(mask.cols()) + " but ensemble has " +
                                    std::to_string(N) + " agents");
    ChannelWeights w = zero_weights(mask);
    const double dS = stats.sigmaS + stats.epsilon;
    const double dB = stats.sigmaB + stats.epsilon;
    const double dU = stats.sigmaU + stats.epsilon;
    const double u_norm = dU * dU;  // regularized sigma_U^2
    for (Eigen::Index i = 0; i < N; ++i) {
        const Summary& a = summaries[i];
        const double ua = a.U - stats.muU;
        for (Eigen::Index j = i + 1; j < N; ++j) {
            if (!mask(i, j)) continue;
            const Summary& b = summaries[j];
            const double xS = (a.S - b.S) / dS;
            const double xB = (a.B - b.B) / dB;
            const double xU = (a.U - b.U) / dU;
            const double ub = b.U - stats.muU;
            const double gS = std::exp(-0.5 * xS * xS);
            const double gB = std::exp(-0.5 * xB * xB);
            const double gU = std::exp(-0.5 * xU * xU);
            const double vals[kChannelCount] = {
                a.S * b.S * gS,
                a.B * b.B * gB,
                ua * ub / u_norm * gU,
                0.5 * (a.S * b.B + b.S * a.B) * std::exp(-0.25 * (xS * xS + xB * xB)),
                0.5 * (a.S * b.U + b.S * a.U) * std::exp(-0.25 * (xS * xS + xU * xU)),
                0.5 * (a.B * b.U + b.B * a.U) * std::exp(-0.25 * (xB * xB + xU * xU)),
            };
            Eigen::MatrixXd* mats[kChannelCount] = {&w.wS, &w.wB, &w.wU, &w.wSB, &w.wSU, &w.wBU};
            double total = 0.0;
            for (int c = 0; c < kChannelCount; ++c) {
                (*mats[c])(i, j) = (*mats[c])(j, i) = vals[c];
                total += vals[c];
            }
            w.aggregate(i, j) = w.aggregate(j, i) = total;
        }
    }
    return w;
}

std::vector<FeedbackFields> renormalized_fields(std::span<const Summary> summaries,
                                                const ChannelWeights& w,
                                                const KernelOptions& options) {
    const auto N = static_cast<Eigen::Index>(summaries.size());
    if (w.size() != N)
        throw std::invalid_argument("weight matrices do not match ensemble size");
    double u_shift = 0.0;
    if (options.centered_u_field) {
        for (const auto& m : summaries) u_shift += m.U;
        u_shift /= static_cast<double>(N);
    }
    std::vector<FeedbackFields> fields(summaries.size());
    for (Eigen::Index i = 0; i < N; ++i) {
        FeedbackFields f;
        for (Eigen::Index j = 0; j < N; ++j) {
            if (j == i) continue;
            const Summary& m = summaries[j];
            f.phiS += w.wS(i, j) * m.S + w.wSB(i, j) * m.B + w.wSU(i, j) * m.U;
            f.phiB += w.wB(i, j) * m.B + w.wSB(i, j) * m.S + w.wBU(i, j) * m.U;
            f.phiU += w.wU(i, j) * (m.U - u_shift) + w.wSU(i, j) * m.S + w.wBU(i, j) * m.B;
        }
        fields[i] = f;
    }
    return fields;
}

EdgeMask sample_mask(int N, double edge_density, std::uint64_t seed) {
    if (N < 1) throw std::invalid_argument("mask size must be positive");
    if (!(edge_density > 0.0 && edge_density <= 1.0))
        throw std::invalid_argument("edge_density must lie in (0, 1]");
    if (edge_density >= 1.0) return complete_mask(N);
    EdgeMask mask = EdgeMask::Constant(N, N, false);
    Rng rng(seed);
    std::bernoulli_distribution edge(edge_density);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) mask(i, j) = mask(j, i) = edge(rng);
    return mask;
}

EdgeMask complete_mask(int N) {
    EdgeMask mask = EdgeMask::Constant(N, N, true);
    for (int i = 0; i < N; ++i) mask(i, i) = false;
    return mask;
}

}  // namespace aqia
