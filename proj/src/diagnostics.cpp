#include "aqia/diagnostics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aqia {

namespace {

void require_square(const Eigen::MatrixXd& w, const char* what) {
    if (w.rows() != w.cols()) throw std::invalid_argument(std::string(what) + ": matrix not square");
}

}  // namespace

Eigen::MatrixXd positive_part(const Eigen::MatrixXd& w) { return w.cwiseMax(0.0); }

double modularity(const Eigen::MatrixXd& w, std::span<const int> labels) {
    require_square(w, "modularity");
    const Eigen::Index N = w.rows();
    if (static_cast<Eigen::Index>(labels.size()) != N)
        throw std::invalid_argument("modularity: one label per node required");
    const Eigen::VectorXd k = w.rowwise().sum();
    const double two_w = w.sum();
    if (two_w == 0.0) return 0.0;
    double q = 0.0;
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            if (i != j && labels[i] == labels[j]) q += w(i, j) - k[i] * k[j] / two_w;
    return q / two_w;
}

CommunityAssignment detect_communities(const Eigen::MatrixXd& w) {
    require_square(w, "detect_communities");
    const Eigen::Index N = w.rows();
    CommunityAssignment out;
    out.labels.resize(static_cast<std::size_t>(N));
    std::iota(out.labels.begin(), out.labels.end(), 0);
    const double two_w = w.sum();
    if (N == 0 || two_w <= 0.0) {
        out.Q = 0.0;
        return out;
    }
    const double W = 0.5 * two_w;

    // Communities kept ordered by smallest member; between-community weight
    // and total strength maintained incrementally.
    std::vector<std::vector<int>> members(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) members[i] = {i};
    Eigen::MatrixXd between = w;
    between.diagonal().setZero();
    std::vector<double> strength(static_cast<std::size_t>(N));
    for (Eigen::Index i = 0; i < N; ++i) strength[i] = w.row(i).sum();

    while (members.size() > 1) {
        const auto C = static_cast<Eigen::Index>(members.size());
        double best_gain = 1e-12;
        Eigen::Index best_a = -1, best_b = -1;
        for (Eigen::Index a = 0; a < C; ++a)
            for (Eigen::Index b = a + 1; b < C; ++b) {
                const double gain = (between(a, b) - strength[a] * strength[b] / two_w) / W;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_a = a;
                    best_b = b;
                }
            }
        if (best_a < 0) break;

        // Merge b into a; a < b so a keeps its smallest-member ordering.
        auto& ma = members[best_a];
        ma.insert(ma.end(), members[best_b].begin(), members[best_b].end());
        std::sort(ma.begin(), ma.end());
        strength[best_a] += strength[best_b];
        for (Eigen::Index c = 0; c < C; ++c) {
            if (c == best_a || c == best_b) continue;
            between(best_a, c) += between(best_b, c);
            between(c, best_a) = between(best_a, c);
        }
        // Drop row/column b.
        Eigen::MatrixXd shrunk(C - 1, C - 1);
        for (Eigen::Index r = 0, rr = 0; r < C; ++r) {
            if (r == best_b) continue;
            for (Eigen::Index c = 0, cc = 0; c < C; ++c) {
                if (c == best_b) continue;
                shrunk(rr, cc++) = between(r, c);
            }
            ++rr;
        }
        between = std::move(shrunk);
        between(best_a, best_a) = 0.0;
        members.erase(members.begin() + best_b);
        strength.erase(strength.begin() + best_b);
    }

    for (std::size_t c = 0; c < members.size(); ++c)
        for (int i : members[c]) out.labels[i] = static_cast<int>(c);
    out.Q = modularity(w, out.labels);
    return out;
}

NetworkStats network_stats(const Eigen::MatrixXd& w, double threshold_fraction) {
    require_square(w, "network_stats");
    const Eigen::Index N = w.rows();
    NetworkStats st;
    st.strengths = w.rowwise().sum();
    const double max_abs = N > 0 ? w.cwiseAbs().maxCoeff() : 0.0;
    st.threshold = threshold_fraction * max_abs;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            adj(i, j) = i != j && max_abs > 0.0 && std::abs(w(i, j)) > st.threshold;
    st.clustering = Eigen::VectorXd::Zero(N);
    st.degrees.assign(static_cast<std::size_t>(N), 0);
    for (Eigen::Index i = 0; i < N; ++i) {
        std::vector<Eigen::Index> nb;
        for (Eigen::Index j = 0; j < N; ++j)
            if (adj(i, j)) nb.push_back(j);
        const auto deg = static_cast<double>(nb.size());
        st.degrees[i] = static_cast<int>(nb.size());
        if (nb.size() < 2) continue;
        double triangles = 0.0;
        for (std::size_t a = 0; a < nb.size(); ++a)
            for (std::size_t b = a + 1; b < nb.size(); ++b)
                if (adj(nb[a], nb[b])) triangles += 1.0;
        st.clustering[i] = triangles / (deg * (deg - 1.0) / 2.0);
    }
    return st;
}

std::string to_string(CorrelationMode mode) {
    return mode == CorrelationMode::kEnsemble ? "ensemble" : "per-realization";
}

namespace {

std::vector<double> polarizations(std::span<const Summary> summaries, bool sort_by_s) {
    std::vector<double> s;
    s.reserve(summaries.size());
    for (const auto& m : summaries) s.push_back(m.S);
    if (sort_by_s) std::stable_sort(s.begin(), s.end());
    return s;
}

}  // namespace

CorrelationMatrix correlation_matrix(std::span<const Summary> summaries, bool sort_by_s,
                                     int realization) {
    const auto s = polarizations(summaries, sort_by_s);
    const auto N = static_cast<Eigen::Index>(s.size());
    CorrelationMatrix c;
    c.values.resize(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j) c.values(i, j) = s[i] * s[j];
    c.mode = CorrelationMode::kPerRealization;
    c.sorted = sort_by_s;
    c.realization = realization;
    c.samples = 1;
    return c;
}

CorrelationMatrix ensemble_correlation_matrix(const std::vector<std::vector<Summary>>& per_real) {
    if (per_real.empty()) throw std::invalid_argument("correlation matrix needs at least one realization");
    const auto N = static_cast<Eigen::Index>(per_real.front().size());
    CorrelationMatrix c;
    c.values = Eigen::MatrixXd::Zero(N, N);
    for (const auto& summaries : per_real) {
        if (static_cast<Eigen::Index>(summaries.size()) != N)
            throw std::invalid_argument("ensemble correlation needs equal agent counts");
        c.values += correlation_matrix(summaries, true).values;
    }
    c.values /= static_cast<double>(per_real.size());
    c.mode = CorrelationMode::kEnsemble;
    c.sorted = true;
    c.samples = static_cast<int>(per_real.size());
    return c;
}

namespace {

// Three-point first-derivative weights at point i of the grid x.
std::array<double, 3> derivative_weights(std::span<const double> x, std::size_t i,
                                         std::size_t& first) {
    const std::size_t n = x.size();
    if (i == 0) {
        first = 0;
        const double h1 = x[1] - x[0], h2 = x[2] - x[1];
        return {-(2 * h1 + h2) / (h1 * (h1 + h2)), (h1 + h2) / (h1 * h2), -h1 / (h2 * (h1 + h2))};
    }
    if (i == n - 1) {
        first = n - 3;
        const double h1 = x[n - 2] - x[n - 3], h2 = x[n - 1] - x[n - 2];
        return {h2 / (h1 * (h1 + h2)), -(h1 + h2) / (h1 * h2), (2 * h2 + h1) / (h2 * (h1 + h2))};
    }
    first = i - 1;
    const double h1 = x[i] - x[i - 1], h2 = x[i + 1] - x[i];
    return {-h2 / (h1 * (h1 + h2)), (h2 - h1) / (h1 * h2), h1 / (h2 * (h1 + h2))};
}

void check_grid(std::span<const double> x) {
    if (x.size() < 3) throw std::invalid_argument("susceptibility needs at least 3 points");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            throw std::invalid_argument("susceptibility needs strictly increasing Gamma values");
}

}  // namespace

std::vector<std::pair<double, double>> susceptibility(
    std::span<const std::pair<double, double>> values_vs_gamma) {
    std::vector<double> x, y;
    for (const auto& [g, v] : values_vs_gamma) {
        x.push_back(g);
        y.push_back(v);
    }
    check_grid(x);
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        std::size_t first = 0;
        const auto c = derivative_weights(x, i, first);
        const double d = c[0] * y[first] + c[1] * y[first + 1] + c[2] * y[first + 2];
        out.emplace_back(x[i], -d);
    }
    return out;
}

std::vector<double> susceptibility_errors(std::span<const double> gammas,
                                          std::span<const double> standard_errors) {
    check_grid(gammas);
    if (standard_errors.size() != gammas.size())
        throw std::invalid_argument("one standard error per Gamma point required");
    std::vector<double> out;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        std::size_t first = 0;
        const auto c = derivative_weights(gammas, i, first);
        double var = 0.0;
        for (int k = 0; k < 3; ++k) var += c[k] * c[k] * standard_errors[first + k] * standard_errors[first + k];
        out.push_back(std::sqrt(var));
    }
    return out;
}

std::optional<double> binder_cumulant(std::span<const double> samples) {
    if (samples.size() < 2) throw std::invalid_argument("Binder cumulant needs at least 2 samples");
    double m2 = 0.0, m4 = 0.0;
    for (double m : samples) {
        const double sq = m * m;
        m2 += sq;
        m4 += sq * sq;
    }
    m2 /= static_cast<double>(samples.size());
    m4 /= static_cast<double>(samples.size());
    if (m2 == 0.0) return std::nullopt;
    return 1.0 - m4 / (3.0 * m2 * m2);
}

std::optional<double> binder_cumulant_error(std::span<const double> samples) {
    const std::size_t R = samples.size();
    if (R < 3) return std::nullopt;
    std::vector<double> loo;
    std::vector<double> rest(R - 1);
    for (std::size_t skip = 0; skip < R; ++skip) {
        for (std::size_t i = 0, k = 0; i < R; ++i)
            if (i != skip) rest[k++] = samples[i];
        const auto u = binder_cumulant(rest);
        if (!u) return std::nullopt;
        loo.push_back(*u);
    }
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(R);
    double ss = 0.0;
    for (double v : loo) ss += (v - mean) * (v - mean);
    return std::sqrt(ss * static_cast<double>(R - 1) / static_cast<double>(R));
}

}  // namespace aqia
