#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "aqia/diagnostics.hpp"
#include "helpers.hpp"

using namespace aqia;

namespace {

Eigen::MatrixXd two_cliques(int size, double inside, double across) {
    const int N = 2 * size;
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(N, N, across);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            if (i / size == j / size) w(i, j) = inside;
    w.diagonal().setZero();
    return w;
}

// Best modularity over every partition, enumerated as restricted growth strings.
double exhaustive_best_q(const Eigen::MatrixXd& w) {
    const int N = static_cast<int>(w.rows());
    std::vector<int> labels(N, 0);
    double best = -1.0;
    std::function<void(int, int)> rec = [&](int pos, int used) {
        if (pos == N) {
            best = std::max(best, modularity(w, labels));
            return;
        }
        for (int c = 0; c <= used; ++c) {
            labels[pos] = c;
            rec(pos + 1, std::max(used, c + 1));
        }
    };
    labels[0] = 0;
    rec(1, 1);
    return best;
}

Eigen::MatrixXd random_weights(std::mt19937_64& rng, int N) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j) w(i, j) = w(j, i) = unit(rng) < 0.5 ? 0.0 : unit(rng);
    return w;
}

}  // namespace

TEST_CASE("modularity, worked cases") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
    w(0, 1) = w(1, 0) = w(2, 3) = w(3, 2) = 1.0;
    CHECK(modularity(w, std::vector<int>{0, 0, 1, 1}) == doctest::Approx(0.75));
    // self-pairs are excluded, so singletons score exactly 0
    CHECK(modularity(w, std::vector<int>{0, 1, 2, 3}) == 0.0);
    CHECK(modularity(Eigen::MatrixXd::Zero(3, 3), std::vector<int>{0, 0, 0}) == 0.0);
    CHECK_THROWS_AS(modularity(w, std::vector<int>{0, 1}), std::invalid_argument);
}

TEST_CASE("positive part") {
    Eigen::MatrixXd w(2, 2);
    w << 0.5, -1.0, -1.0, 2.0;
    const auto p = positive_part(w);
    CHECK(p(0, 0) == 0.5);
    CHECK(p(0, 1) == 0.0);
    CHECK(p(1, 1) == 2.0);
}

TEST_CASE("community detection") {
    SUBCASE("two cliques") {
        const auto w = two_cliques(4, 1.0, 0.05);
        const auto c = detect_communities(w);
        CHECK(c.labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 1});
        CHECK(c.Q == doctest::Approx(modularity(w, c.labels)));
        CHECK(c.Q == doctest::Approx(exhaustive_best_q(w)));
    }
    SUBCASE("complete graph") {
        const auto w = two_cliques(3, 1.0, 1.0);
        const auto c = detect_communities(w);
        CHECK(c.Q == doctest::Approx(exhaustive_best_q(w)));
    }
    SUBCASE("no weight") {
        const auto c = detect_communities(Eigen::MatrixXd::Zero(5, 5));
        CHECK(c.Q == 0.0);
        CHECK(c.labels == std::vector<int>{0, 1, 2, 3, 4});
    }
    SUBCASE("never beats the exhaustive optimum and reports its own Q") {
        std::mt19937_64 rng(13);
        for (int t = 0; t < 30; ++t) {
            const int N = 3 + t % 6;
            const auto w = random_weights(rng, N);
            const auto c = detect_communities(w);
            CHECK(c.Q == doctest::Approx(modularity(w, c.labels)).epsilon(1e-12));
            CHECK(c.Q <= exhaustive_best_q(w) + 1e-12);
            CHECK(c.Q >= -1e-12);
            // labels are contiguous from 0
            const int top = *std::max_element(c.labels.begin(), c.labels.end());
            for (int l = 0; l <= top; ++l)
                CHECK(std::find(c.labels.begin(), c.labels.end(), l) != c.labels.end());
        }
    }
    SUBCASE("Q is invariant under relabelling") {
        std::mt19937_64 rng(4);
        const auto w = random_weights(rng, 7);
        const std::vector<int> labels{0, 1, 0, 2, 1, 2, 0};
        const std::vector<int> renamed{5, 3, 5, 9, 3, 9, 5};
        CHECK(modularity(w, labels) == doctest::Approx(modularity(w, renamed)));
    }
}

TEST_CASE("network statistics") {
    SUBCASE("star") {
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
        for (int j = 1; j < 4; ++j) w(0, j) = w(j, 0) = 1.0;
        const auto st = network_stats(w, 0.1);
        CHECK(st.strengths[0] == 3.0);
        CHECK(st.strengths[1] == 1.0);
        CHECK(st.degrees == std::vector<int>{3, 1, 1, 1});
        CHECK(st.clustering.cwiseAbs().maxCoeff() == 0.0);
        CHECK(st.threshold == doctest::Approx(0.1));
    }
    SUBCASE("complete graph") {
        const auto st = network_stats(two_cliques(2, 1.0, 1.0), 0.1);
        for (int i = 0; i < 4; ++i) {
            CHECK(st.clustering[i] == doctest::Approx(1.0));
            CHECK(st.degrees[i] == 3);
        }
    }
    SUBCASE("threshold drops weak links") {
        const auto st = network_stats(two_cliques(3, 1.0, 0.05), 0.1);
        for (int i = 0; i < 6; ++i) {
            CHECK(st.degrees[i] == 2);
            CHECK(st.clustering[i] == doctest::Approx(1.0));
        }
    }
}

TEST_CASE("correlation matrices") {
    std::vector<Summary> m{{0.5, 0, 0}, {-1.0, 0, 0}, {0.25, 0, 0}};
    const auto raw = correlation_matrix(m, false, 2);
    CHECK(raw.values(0, 1) == doctest::Approx(-0.5));
    CHECK(raw.values(2, 2) == doctest::Approx(0.0625));
    CHECK(raw.realization == 2);
    CHECK(raw.mode == CorrelationMode::kPerRealization);
    const auto sorted = correlation_matrix(m, true);
    CHECK(sorted.values(0, 0) == doctest::Approx(1.0));
    CHECK(sorted.values(0, 2) == doctest::Approx(-0.5));
    CHECK(sorted.values == sorted.values.transpose());

    std::vector<Summary> other{{1.0, 0, 0}, {1.0, 0, 0}, {1.0, 0, 0}};
    const auto ens = ensemble_correlation_matrix({m, other});
    CHECK(ens.samples == 2);
    CHECK(ens.mode == CorrelationMode::kEnsemble);
    CHECK(ens.values(0, 0) == doctest::Approx(1.0));
    CHECK(ens.values(0, 2) == doctest::Approx(0.25));
    CHECK(to_string(CorrelationMode::kEnsemble) == "ensemble");
    CHECK_THROWS_AS(ensemble_correlation_matrix({}), std::invalid_argument);
}

TEST_CASE("susceptibility") {
    SUBCASE("linear data on a non-uniform grid") {
        std::vector<std::pair<double, double>> v{{0.5, 2.0}, {0.7, 1.6}, {1.2, 0.6}, {1.3, 0.4}};
        for (const auto& [g, chi] : susceptibility(v)) CHECK(chi == doctest::Approx(2.0));
    }
    SUBCASE("quadratics are differentiated exactly, ends included") {
        const std::vector<double> g{0.5, 0.6, 0.8, 1.1, 1.5};
        std::vector<std::pair<double, double>> v;
        for (double x : g) v.emplace_back(x, 3 * x * x - x + 0.2);
        const auto chi = susceptibility(v);
        for (std::size_t i = 0; i < g.size(); ++i)
            CHECK(chi[i].second == doctest::Approx(-(6 * g[i] - 1)).epsilon(1e-12));
    }
    SUBCASE("error propagation on a uniform grid") {
        const std::vector<double> g{0.0, 0.1, 0.2, 0.3};
        const std::vector<double> se{0.01, 0.01, 0.01, 0.01};
        const auto err = susceptibility_errors(g, se);
        CHECK(err[1] == doctest::Approx(std::sqrt(2.0) * 0.01 / 0.2));
        CHECK(err[0] == doctest::Approx(std::sqrt(1.5 * 1.5 + 4 + 0.25) * 0.01 / 0.1));
    }
    SUBCASE("grid checks") {
        std::vector<std::pair<double, double>> two{{0.0, 1.0}, {1.0, 2.0}};
        CHECK_THROWS_AS(susceptibility(two), std::invalid_argument);
        std::vector<std::pair<double, double>> unsorted{{0.0, 1.0}, {2.0, 2.0}, {1.0, 0.0}};
        CHECK_THROWS_AS(susceptibility(unsorted), std::invalid_argument);
    }
}

TEST_CASE("Binder cumulant") {
    CHECK(*binder_cumulant(std::vector<double>{0.5, -0.5, 0.5}) == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(binder_cumulant(std::vector<double>{0.0, 0.0}).has_value());
    CHECK_THROWS_AS(binder_cumulant(std::vector<double>{1.0}), std::invalid_argument);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> gauss(200000);
    for (auto& x : gauss) x = normal(rng);
    CHECK(std::abs(*binder_cumulant(gauss)) < 0.01);

    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        std::vector<double> s(3 + t % 10);
        for (auto& x : s) x = unit(rng);
        CHECK(*binder_cumulant(s) <= 2.0 / 3.0 + 1e-12);
        const auto e = binder_cumulant_error(s);
        REQUIRE(e.has_value());
        CHECK(*e >= 0.0);
    }
    CHECK(*binder_cumulant_error(std::vector<double>{0.3, -0.3, 0.3, 0.3}) == doctest::Approx(0.0));
}
