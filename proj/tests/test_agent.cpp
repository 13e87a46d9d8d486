#include <doctest.h>

#include <cmath>
#include <random>

#include "aqia/agent.hpp"
#include "helpers.hpp"

using namespace aqia;

namespace {

AgentParams agent(int n, std::vector<double> h, std::vector<double> J, double gamma) {
    AgentParams p;
    p.n = n;
    p.bonds = chain_bonds(n);
    p.h = std::move(h);
    p.J = std::move(J);
    p.gamma = gamma;
    return p;
}

}  // namespace

TEST_CASE("bare Hamiltonian matrices") {
    SUBCASE("single diagonal qubit") {
        const auto H = build_hamiltonian(agent(1, {0.5}, {}, 0.0)).entries;
        CHECK(H(0, 0) == -0.5);
        CHECK(H(1, 1) == 0.5);
        CHECK(H(0, 1) == 0.0);
    }
    SUBCASE("pure transverse field") {
        const auto H = build_hamiltonian(agent(1, {0.0}, {}, 1.0)).entries;
        Eigen::Matrix2d expect;
        expect << 0, -1, -1, 0;
        CHECK(H.isApprox(expect, 0.0));
    }
    SUBCASE("two-qubit chain, enumerated by hand") {
        const auto H = build_hamiltonian(agent(2, {0.0, 0.0}, {1.0}, 1.0)).entries;
        Eigen::Matrix4d expect;
        expect << -1, -1, -1, 0,
                  -1, 1, 0, -1,
                  -1, 0, 1, -1,
                  0, -1, -1, -1;
        CHECK((H - expect).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("parameter validation names the problem") {
    auto p = agent(2, {0.0, 0.0}, {1.0}, 1.0);
    p.n = 15;
    CHECK_THROWS_WITH_AS(build_hamiltonian(p), doctest::Contains("outside [1, 14]"), std::invalid_argument);
    p = agent(3, {0, 0, 0}, {1.0, 1.0}, 1.0);
    p.bonds = {{0, 1}, {0, 1}};
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("duplicate bond (0,1)"), std::invalid_argument);
    p.bonds = {{1, 0}, {1, 2}};
    CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("bond (1,0)"), std::invalid_argument);
    p = agent(1, {0.0}, {}, -0.5);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = agent(1, {NAN}, {}, 1.0);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("ground states") {
    SUBCASE("single qubit: -sqrt(h^2 + Gamma^2)") {
        const auto gs = ground_state(build_hamiltonian(agent(1, {1.0}, {}, 1.0)));
        CHECK(gs.energy == doctest::Approx(-std::sqrt(2.0)).epsilon(1e-14));
    }
    SUBCASE("two-qubit chain: -sqrt(5)") {
        const auto gs = ground_state(build_hamiltonian(agent(2, {0.0, 0.0}, {1.0}, 1.0)));
        CHECK(gs.energy == doctest::Approx(-2.23606797749979).epsilon(1e-14));
    }
    SUBCASE("diagonal matrix picks its smallest entry") {
        DenseHamiltonian H{Eigen::Vector4d(3, 1, 2, 5).asDiagonal()};
        const auto gs = ground_state(H);
        CHECK(gs.energy == doctest::Approx(1.0));
        CHECK(std::abs(gs.amplitudes[1]) == doctest::Approx(1.0));
        CHECK(gs.amplitudes.norm() == doctest::Approx(1.0));
    }
    SUBCASE("normalized, below the whole spectrum") {
        std::mt19937_64 rng(11);
        for (int trial = 0; trial < 20; ++trial) {
            const auto p = testing::random_agent(rng, 1 + trial % 6);
            const auto H = build_hamiltonian(p);
            const auto gs = ground_state(H);
            CHECK(std::abs(gs.amplitudes.squaredNorm() - 1.0) < 1e-12);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> full(H.entries);
            CHECK(gs.energy <= full.eigenvalues().minCoeff() + 1e-10);
            CHECK(gs.energy == doctest::Approx(full.eigenvalues()[0]).epsilon(1e-12));
        }
    }
}

TEST_CASE("summary measurements") {
    SUBCASE("classical ferromagnet |up up>") {
        const auto p = agent(2, {0.5, 0.5}, {1.0}, 0.0);
        const auto m = measure_summaries(p, ground_state(build_hamiltonian(p)));
        CHECK(m.S == doctest::Approx(1.0));
        CHECK(m.B == doctest::Approx(1.0));
        CHECK(m.U == doctest::Approx(-1.0));
    }
    SUBCASE("transverse-only qubit") {
        const auto p = agent(1, {0.0}, {}, 1.0);
        const auto m = measure_summaries(p, ground_state(build_hamiltonian(p)));
        CHECK(m.S == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(m.B == 0.0);
        CHECK(m.U == doctest::Approx(-1.0));
    }
    SUBCASE("two-qubit chain closed form") {
        const auto p = agent(2, {0.0, 0.0}, {1.0}, 1.0);
        const auto m = measure_summaries(p, ground_state(build_hamiltonian(p)));
        CHECK(std::abs(m.S) < 1e-12);
        CHECK(m.B == doctest::Approx(0.4472135954999579).epsilon(1e-12));
        CHECK(m.U == doctest::Approx(-1.118033988749895).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch") {
        const auto p = agent(2, {0.0, 0.0}, {1.0}, 1.0);
        GroundState gs{0.0, Eigen::VectorXd::Ones(2)};
        CHECK_THROWS_AS(measure_summaries(p, gs), std::invalid_argument);
    }
}

TEST_CASE("analytic single-qubit and two-qubit laws over parameter grids") {
    for (double h = -2.0; h <= 2.0; h += 0.25)
        for (double g = 0.1; g <= 2.0; g += 0.3) {
            const auto p = agent(1, {h}, {}, g);
            const auto m = measure_summaries(p, ground_state(build_hamiltonian(p)));
            CHECK(std::abs(m.S - h / std::sqrt(h * h + g * g)) < 1e-10);
        }
    for (double J = -2.0; J <= 2.0; J += 0.25)
        for (double g = 0.1; g <= 2.0; g += 0.3) {
            const auto p = agent(2, {0.0, 0.0}, {J}, g);
            const auto gs = ground_state(build_hamiltonian(p));
            const auto m = measure_summaries(p, gs);
            const double r = std::sqrt(J * J + 4 * g * g);
            CHECK(std::abs(gs.energy + r) < 1e-10);
            CHECK(std::abs(m.B - J / r) < 1e-10);
        }
}

TEST_CASE("mean-field Hamiltonian") {
    SUBCASE("zero fields reproduce the bare matrix") {
        std::mt19937_64 rng(3);
        const auto p = testing::random_agent(rng, 4);
        CHECK(build_mf_hamiltonian(p, {}).entries == build_hamiltonian(p).entries);
    }
    SUBCASE("polarization field on one qubit") {
        const auto H = build_mf_hamiltonian(agent(1, {0.0}, {}, 1.0), {2.0, 0.0, 0.0}).entries;
        Eigen::Matrix2d expect;
        expect << -2, -1, -1, 2;
        CHECK((H - expect).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("energy channel with phiU = n zeroes the matrix") {
        const auto H = build_mf_hamiltonian(agent(2, {0.3, -0.2}, {0.7}, 1.0), {0.0, 0.0, 2.0}).entries;
        CHECK(H.cwiseAbs().maxCoeff() == 0.0);
    }
    SUBCASE("bond field shifts the ZZ diagonal") {
        const auto p = agent(2, {0.0, 0.0}, {1.0}, 1.0);
        const auto H = build_mf_hamiltonian(p, {0.0, 0.5, 0.0}).entries;
        const auto H0 = build_hamiltonian(p).entries;
        // ZZ = (+1, -1, -1, +1) on the four basis states
        const Eigen::Vector4d zz(1, -1, -1, 1);
        CHECK(((H - H0).diagonal() + 0.5 * zz).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("non-finite fields rejected") {
        CHECK_THROWS_AS(build_mf_hamiltonian(agent(1, {0.0}, {}, 1.0), {NAN, 0, 0}), std::invalid_argument);
    }
}

TEST_CASE("properties over random agents and fields") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 3.0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = testing::random_agent(rng, 1 + trial % 7);
        const FeedbackFields f{normal(rng), normal(rng), normal(rng)};
        const auto H = build_mf_hamiltonian(p, f);
        CHECK(H.entries == H.entries.transpose());

        const auto gs = ground_state(H);
        for (int v = 0; v < 100; ++v) {
            Eigen::VectorXd x(H.dim());
            for (auto& c : x) c = normal(rng);
            x.normalize();
            CHECK(gs.energy <= x.dot(H.entries * x) + 1e-12);
        }

        const auto m = measure_summaries(p, gs);
        const auto H0 = build_hamiltonian(p).entries;
        CHECK(std::abs(m.U * p.n - gs.amplitudes.dot(H0 * gs.amplitudes)) < 1e-10);
        CHECK(std::abs(m.S) <= 1.0 + 1e-12);
        CHECK(std::abs(m.B) <= 1.0 + 1e-12);
    }
}

TEST_CASE("ring topology and bond helpers") {
    CHECK(chain_bonds(1).empty());
    CHECK(chain_bonds(3) == std::vector<Bond>{{0, 1}, {1, 2}});
    CHECK(ring_bonds(3) == std::vector<Bond>{{0, 1}, {1, 2}, {0, 2}});
    CHECK(ring_bonds(2) == std::vector<Bond>{{0, 1}});
}
