#include <doctest.h>

#include <cmath>
#include <random>

#include "aqia/ensemble.hpp"
#include "helpers.hpp"

using namespace aqia;

namespace {

RegimePreset small(const std::string& name, int N = 8, int R = 4) {
    auto p = preset_by_name(name);
    p.N = N;
    p.n = 4;
    p.R = R;
    return p;
}

}  // namespace

TEST_CASE("regime presets") {
    const auto c = preset_by_name("critical");
    CHECK(c.N == 30);
    CHECK(c.n == 6);
    CHECK(c.R == 50);
    CHECK(c.meanJ == 1.0);
    CHECK(c.sigmaJ == 0.01);
    CHECK(c.meanH == 1.0);
    CHECK(c.sigmaH == 0.1);
    CHECK(c.gamma == 1.0);
    CHECK(c.edge_density == 1.0);

    const auto g = preset_by_name("glassy");
    CHECK(g.meanJ == 0.5);
    CHECK(g.sigmaJ == 0.15);
    CHECK(g.sigmaH == 0.2);
    CHECK(g.gamma == 0.6);

    const auto m = preset_by_name("community");
    CHECK(m.meanJ == 0.5);
    CHECK(m.sigmaJ == 0.1);
    CHECK(m.sigmaH == 0.1);
    CHECK(m.gamma == 1.0);
    CHECK(m.edge_density == 0.3);

    CHECK_THROWS_AS(preset_by_name("ferro"), std::invalid_argument);
    CHECK(preset_names().size() == 3);
}

TEST_CASE("disorder sampling") {
    auto p = small("critical");
    p.sigmaJ = p.sigmaH = 0.0;
    const auto real = sample_realization(p, 5);
    for (const auto& a : real.agents) {
        CHECK(a.h == real.agents[0].h);
        CHECK(a.J == real.agents[0].J);
        CHECK(a.gamma == p.gamma);
        CHECK(a.bonds == chain_bonds(p.n));
    }

    const auto glassy = small("glassy");
    const auto r1 = sample_realization(glassy, 9);
    const auto r2 = sample_realization(glassy, 9);
    for (std::size_t i = 0; i < r1.agents.size(); ++i) {
        CHECK(r1.agents[i].h == r2.agents[i].h);
        CHECK(r1.agents[i].J == r2.agents[i].J);
    }
    CHECK(r1.mask == r2.mask);
    CHECK(sample_realization(glassy, 10).agents[0].h != r1.agents[0].h);

    // agents are the preset's affine image of the stored standard-normal draws
    const auto draw = draw_disorder(glassy, 9);
    auto shifted = glassy;
    shifted.meanJ = 2.0;
    const auto moved = agents_from(shifted, draw);
    for (std::size_t i = 0; i < moved.size(); ++i)
        for (std::size_t b = 0; b < moved[i].J.size(); ++b)
            CHECK(moved[i].J[b] == doctest::Approx(2.0 + glassy.sigmaJ * draw.J_noise[i][b]));

    auto ring = glassy;
    ring.topology = Topology::kRing;
    CHECK(sample_realization(ring, 1).agents[0].bonds == ring_bonds(ring.n));

    CHECK(realization_seed(1, 0) != realization_seed(1, 1));
    CHECK(realization_seed(1, 0) != realization_seed(2, 0));
}

TEST_CASE("order parameters") {
    std::vector<Summary> m{{0.5, 0, 0}, {-0.5, 0, 0}, {1.0, 0, 0}, {0.0, 0, 0}};
    CHECK(edwards_anderson(m) == doctest::Approx(0.375));
    CHECK(mean_abs_polarization(m) == doctest::Approx(0.5));
    CHECK(mean_polarization(m) == doctest::Approx(0.25));
    std::vector<Summary> full(3, Summary{1.0, 0, 0});
    CHECK(edwards_anderson(full) == 1.0);
    CHECK_THROWS_AS(edwards_anderson(std::vector<Summary>{}), std::invalid_argument);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 50; ++t) {
        const auto s = testing::random_summaries(rng, 1 + t % 9);
        const double q = edwards_anderson(s);
        CHECK(q >= 0.0);
        CHECK(q <= 1.0);
        CHECK(mean_abs_polarization(s) * mean_abs_polarization(s) <= q + 1e-15);
    }
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto ms = mean_and_se(v);
    CHECK(ms.mean == 2.5);
    CHECK(ms.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
    CHECK(mean_and_se(std::vector<double>{7.0}).se == 0.0);
    CHECK(coefficient_of_variation(std::vector<double>{7.0}) == 0.0);
    CHECK(coefficient_of_variation(v) == doctest::Approx(std::sqrt(1.25) / 2.5));
}

TEST_CASE("ensembles are reproducible and thread-count independent") {
    const auto p = small("community", 10, 5);
    EnsembleOptions one;
    one.compute_jacobian = true;
    EnsembleOptions many = one;
    many.threads = 3;
    const auto a = run_ensemble(p, 77, one);
    const auto b = run_ensemble(p, 77, many);
    REQUIRE(a.realizations.size() == 5);
    CHECK(a.qEA.mean == b.qEA.mean);
    CHECK(a.mean_absS.mean == b.mean_absS.mean);
    CHECK(a.modularity.mean == b.modularity.mean);
    for (std::size_t r = 0; r < a.realizations.size(); ++r) {
        const auto& x = a.realizations[r];
        const auto& y = b.realizations[r];
        CHECK(x.seed == realization_seed(77, static_cast<int>(r)));
        CHECK(x.fixed_point.summaries == y.fixed_point.summaries);
        CHECK(x.communities == y.communities);
        CHECK(x.spectral_radius == y.spectral_radius);
        CHECK(x.qEA >= 0.0);
        CHECK(x.qEA <= 1.0);
        CHECK(x.mean_absS <= 1.0);
        CHECK(x.modularity >= -0.5);
        CHECK(x.modularity <= 1.0);
    }
    // a different master seed gives different disorder
    const auto c = run_ensemble(p, 78, one);
    CHECK(c.realizations[0].fixed_point.summaries != a.realizations[0].fixed_point.summaries);

    auto single = p;
    single.R = 1;
    CHECK(run_ensemble(single, 77, one).cv_qEA == 0.0);
}

TEST_CASE("parameter grid") {
    const auto p = small("critical", 6, 2);
    EnsembleOptions opts;
    const auto lone = sweep_grid(p, {1.0}, {1.0}, 3, opts);
    const auto ens = run_ensemble(p, 3, opts);
    CHECK(lone.mean_absS(0, 0) == ens.mean_absS.mean);
    CHECK(lone.qEA(0, 0) == ens.qEA.mean);
    CHECK(std::isnan(lone.chi(0, 0)));
    CHECK(lone.status[0][0] == "ok");

    const std::vector<double> gammas{0.8, 1.0, 1.2};
    opts.threads = 2;
    const auto g = sweep_grid(p, {0.5, 1.0}, gammas, 3, opts);
    for (int j = 0; j < 2; ++j) {
        CHECK(g.chi(j, 1) == doctest::Approx(-(g.mean_absS(j, 2) - g.mean_absS(j, 0)) / 0.4));
        for (int k = 0; k < 3; ++k) CHECK(g.status[j][k] == "ok");
    }
    CHECK(g.mean_absS(1, 1) == lone.mean_absS(0, 0));
    CHECK_THROWS_AS(sweep_grid(p, {}, gammas, 3, opts), std::invalid_argument);
}
