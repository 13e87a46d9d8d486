#include "aqia/ensemble.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "aqia/diagnostics.hpp"
#include "aqia/parallel.hpp"
#include "aqia/random.hpp"

namespace aqia {

void RegimePreset::validate() const {
    if (N < 2) throw std::invalid_argument("n_agents must be at least 2");
    if (n < 1 || n > kMaxQubits)
        throw std::invalid_argument("n_qubits must lie in [1, " + std::to_string(kMaxQubits) + "]");
    if (sigmaJ < 0.0) throw std::invalid_argument("sigma_j must be non-negative");
    if (sigmaH < 0.0) throw std::invalid_argument("sigma_h must be non-negative");
    if (!(gamma >= 0.0)) throw std::invalid_argument("gamma must be non-negative");
    if (!(edge_density > 0.0 && edge_density <= 1.0))
        throw std::invalid_argument("edge_density must lie in (0, 1]");
    if (R < 1) throw std::invalid_argument("realizations must be at least 1");
}

RegimePreset preset_by_name(const std::string& name) {
    RegimePreset p;
    p.name = name;
    p.N = 30;
    p.n = 6;
    p.R = 50;
    if (name == "critical") {
        p.meanJ = 1.0, p.sigmaJ = 0.01;
        p.meanH = 1.0, p.sigmaH = 0.1;
        p.gamma = 1.0;
        p.edge_density = 1.0;
    } else if (name == "glassy") {
        p.meanJ = 0.5, p.sigmaJ = 0.15;
        p.meanH = 1.0, p.sigmaH = 0.2;
        p.gamma = 0.6;
        p.edge_density = 1.0;
    } else if (name == "community") {
        p.meanJ = 0.5, p.sigmaJ = 0.1;
        p.meanH = 1.0, p.sigmaH = 0.1;
        p.gamma = 1.0;
        p.edge_density = 0.3;
    } else {
        throw std::invalid_argument("unknown preset '" + name +
                                    "' (expected critical, glassy or community)");
    }
    return p;
}

std::vector<std::string> preset_names() { return {"critical", "glassy", "community"}; }

namespace {

std::vector<Bond> bonds_for(const RegimePreset& p) {
    return p.topology == Topology::kRing ? ring_bonds(p.n) : chain_bonds(p.n);
}

}  // namespace

DisorderDraw draw_disorder(const RegimePreset& preset, std::uint64_t seed) {
    preset.validate();
    Rng rng(derive_seed(seed, {0}));
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto n_bonds = bonds_for(preset).size();
    DisorderDraw d;
    d.h_noise.resize(static_cast<std::size_t>(preset.N));
    d.J_noise.resize(static_cast<std::size_t>(preset.N));
    for (int i = 0; i < preset.N; ++i) {
        for (int k = 0; k < preset.n; ++k) d.h_noise[i].push_back(normal(rng));
        for (std::size_t b = 0; b < n_bonds; ++b) d.J_noise[i].push_back(normal(rng));
    }
    d.mask = sample_mask(preset.N, preset.edge_density, derive_seed(seed, {1}));
    return d;
}

std::vector<AgentParams> agents_from(const RegimePreset& preset, const DisorderDraw& draw) {
    const auto bonds = bonds_for(preset);
    std::vector<AgentParams> agents(static_cast<std::size_t>(preset.N));
    for (int i = 0; i < preset.N; ++i) {
        AgentParams& a = agents[i];
        a.n = preset.n;
        a.bonds = bonds;
        a.gamma = preset.gamma;
        for (double z : draw.h_noise[i]) a.h.push_back(preset.meanH + preset.sigmaH * z);
        for (double z : draw.J_noise[i]) a.J.push_back(preset.meanJ + preset.sigmaJ * z);
    }
    return agents;
}

Realization sample_realization(const RegimePreset& preset, std::uint64_t seed) {
    auto draw = draw_disorder(preset, seed);
    return {agents_from(preset, draw), std::move(draw.mask)};
}

std::uint64_t realization_seed(std::uint64_t master_seed, int r) {
    return derive_seed(master_seed, {static_cast<std::uint64_t>(r)});
}

double edwards_anderson(std::span<const Summary> summaries) {
    if (summaries.empty()) throw std::invalid_argument("q_EA needs at least one agent");
    double q = 0.0;
    for (const auto& m : summaries) q += m.S * m.S;
    return q / static_cast<double>(summaries.size());
}

double mean_abs_polarization(std::span<const Summary> summaries) {
    if (summaries.empty()) throw std::invalid_argument("<|S|> needs at least one agent");
    double s = 0.0;
    for (const auto& m : summaries) s += std::abs(m.S);
    return s / static_cast<double>(summaries.size());
}

double mean_polarization(std::span<const Summary> summaries) {
    if (summaries.empty()) throw std::invalid_argument("<S> needs at least one agent");
    double s = 0.0;
    for (const auto& m : summaries) s += m.S;
    return s / static_cast<double>(summaries.size());
}

MeanSe mean_and_se(std::span<const double> values) {
    MeanSe out;
    if (values.empty()) return out;
    const auto R = static_cast<double>(values.size());
    out.mean = std::accumulate(values.begin(), values.end(), 0.0) / R;
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.se = std::sqrt(ss / (R - 1.0)) / std::sqrt(R);
    return out;
}

double coefficient_of_variation(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    const auto R = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / R;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    if (mean == 0.0) return 0.0;
    return std::sqrt(ss / R) / std::abs(mean);
}

namespace {

std::vector<Summary> random_summaries(std::span<const AgentParams> agents, std::uint64_t seed) {
    // U drawn between the bare energy per qubit and its negation.
    Rng rng(derive_seed(seed, {2}));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto bare = bare_summaries(agents);
    std::vector<Summary> out(agents.size());
    for (std::size_t i = 0; i < agents.size(); ++i) {
        out[i].S = unit(rng);
        out[i].B = unit(rng);
        out[i].U = std::abs(bare[i].U) * unit(rng);
    }
    return out;
}

}  // namespace

RealizationResult run_realization(const Realization& real, const EnsembleOptions& options,
                                  int index, std::uint64_t seed) {
    RealizationResult res;
    res.index = index;
    res.seed = seed;
    try {
        auto init = options.random_init ? random_summaries(real.agents, seed)
                                        : bare_summaries(real.agents);
        auto loop = run_to_convergence(real.agents, real.mask, options.loop, std::move(init));
        res.fixed_point = std::move(loop.fixed_point);
        res.trace = std::move(loop.trace);
        const auto& m = res.fixed_point.summaries;
        res.qEA = edwards_anderson(m);
        res.mean_absS = mean_abs_polarization(m);
        res.meanS = mean_polarization(m);
        const auto communities = detect_communities(positive_part(res.fixed_point.weights.aggregate));
        res.modularity = communities.Q;
        res.communities = communities.labels;
        if (options.compute_jacobian && res.fixed_point.converged)
            res.spectral_radius = jacobian(real.agents, real.mask, options.loop, res.fixed_point,
                                           options.jacobian_step)
                                      .spectral_radius();
        res.ok = true;
    } catch (const std::exception& e) {
        res.ok = false;
        res.error = e.what();
    }
    return res;
}

EnsembleRecord run_ensemble(const RegimePreset& preset, std::uint64_t master_seed,
                            const EnsembleOptions& options) {
    preset.validate();
    options.loop.validate();
    EnsembleRecord rec;
    rec.preset = preset;
    rec.master_seed = master_seed;
    rec.realizations.resize(static_cast<std::size_t>(preset.R));
    parallel_for(rec.realizations.size(), options.threads, [&](std::size_t r) {
        const int idx = static_cast<int>(r);
        const auto seed = realization_seed(master_seed, idx);
        const auto real = sample_realization(preset, seed);
        rec.realizations[r] = run_realization(real, options, idx, seed);
    });

    std::vector<double> q, s, mod;
    for (const auto& r : rec.realizations) {
        if (!r.ok) {
            ++rec.excluded;
            continue;
        }
        if (!r.fixed_point.converged) ++rec.not_converged;
        q.push_back(r.qEA);
        s.push_back(r.mean_absS);
        mod.push_back(r.modularity);
    }
    if (q.empty())
        throw std::runtime_error("every realization failed (first error: " +
                                 rec.realizations.front().error + ")");
    rec.qEA = mean_and_se(q);
    rec.mean_absS = mean_and_se(s);
    rec.modularity = mean_and_se(mod);
    rec.cv_qEA = coefficient_of_variation(q);
    return rec;
}

GridResult sweep_grid(const RegimePreset& base, const std::vector<double>& J_values,
                      const std::vector<double>& gamma_values, std::uint64_t master_seed,
                      const EnsembleOptions& options) {
    if (J_values.empty() || gamma_values.empty())
        throw std::invalid_argument("sweep grid axes must be non-empty");
    const auto nJ = static_cast<Eigen::Index>(J_values.size());
    const auto nG = static_cast<Eigen::Index>(gamma_values.size());
    GridResult g;
    g.J_values = J_values;
    g.gamma_values = gamma_values;
    g.cells.assign(J_values.size(), std::vector<EnsembleRecord>(gamma_values.size()));
    g.status.assign(J_values.size(), std::vector<std::string>(gamma_values.size(), "ok"));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    g.mean_absS = g.qEA = g.chi = g.modularity = Eigen::MatrixXd::Constant(nJ, nG, nan);

    // Cells share the master seed, so every cell sees the same disorder draws.
    EnsembleOptions cell_options = options;
    cell_options.threads = 1;
    const std::size_t cells = J_values.size() * gamma_values.size();
    parallel_for(cells, options.threads, [&](std::size_t c) {
        const std::size_t j = c / gamma_values.size(), k = c % gamma_values.size();
        RegimePreset p = base;
        p.meanJ = J_values[j];
        p.gamma = gamma_values[k];
        try {
            g.cells[j][k] = run_ensemble(p, master_seed, cell_options);
            if (g.cells[j][k].excluded > 0)
                g.status[j][k] = "partial: " + std::to_string(g.cells[j][k].excluded) +
                                 " realizations excluded";
        } catch (const std::exception& e) {
            g.status[j][k] = std::string("failed: ") + e.what();
        }
    });

    auto cell_ok = [&](std::size_t j, std::size_t k) { return g.status[j][k].rfind("failed", 0) != 0; };
    for (std::size_t j = 0; j < J_values.size(); ++j) {
        for (std::size_t k = 0; k < gamma_values.size(); ++k) {
            if (!cell_ok(j, k)) continue;
            g.mean_absS(j, k) = g.cells[j][k].mean_absS.mean;
            g.qEA(j, k) = g.cells[j][k].qEA.mean;
            g.modularity(j, k) = g.cells[j][k].modularity.mean;
        }
        bool row_ok = gamma_values.size() >= 3;
        for (std::size_t k = 0; k < gamma_values.size() && row_ok; ++k) row_ok = cell_ok(j, k);
        if (!row_ok) continue;
        std::vector<std::pair<double, double>> row;
        for (std::size_t k = 0; k < gamma_values.size(); ++k)
            row.emplace_back(gamma_values[k], g.mean_absS(j, k));
        const auto chi = susceptibility(row);
        for (std::size_t k = 0; k < chi.size(); ++k) g.chi(j, k) = chi[k].second;
    }
    return g;
}

}  // namespace aqia
