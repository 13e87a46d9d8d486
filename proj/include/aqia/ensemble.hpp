#pragma once

// Disorder sampling, regime presets, multi-realization runs and (J, Gamma)
// phase-diagram grids.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "aqia/agent.hpp"
#include "aqia/kernels.hpp"
#include "aqia/meanfield.hpp"

namespace aqia {

enum class Topology { kChain, kRing };

struct RegimePreset {
    std::string name;
    int N = 30;
    int n = 6;
    double meanJ = 1.0, sigmaJ = 0.0;
    double meanH = 1.0, sigmaH = 0.0;
    double gamma = 1.0;
    double edge_density = 1.0;
    int R = 50;
    Topology topology = Topology::kChain;

    void validate() const;
};

/// "critical", "glassy" or "community"; throws std::invalid_argument otherwise.
RegimePreset preset_by_name(const std::string& name);
std::vector<std::string> preset_names();

/// Standard-normal draws behind one realization. Rescaling these by a preset's
/// means and widths gives the agents, so sweeps can move meanJ or gamma while
/// keeping the disorder fixed.
struct DisorderDraw {
    std::vector<std::vector<double>> h_noise;  // [agent][qubit]
    std::vector<std::vector<double>> J_noise;  // [agent][bond]
    EdgeMask mask;
};

DisorderDraw draw_disorder(const RegimePreset& preset, std::uint64_t seed);
std::vector<AgentParams> agents_from(const RegimePreset& preset, const DisorderDraw& draw);

struct Realization {
    std::vector<AgentParams> agents;
    EdgeMask mask;
};

Realization sample_realization(const RegimePreset& preset, std::uint64_t seed);

/// Seed of realization r under a master seed.
std::uint64_t realization_seed(std::uint64_t master_seed, int r);

double edwards_anderson(std::span<const Summary> summaries);
double mean_abs_polarization(std::span<const Summary> summaries);
double mean_polarization(std::span<const Summary> summaries);

struct RealizationResult {
    int index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    FixedPoint fixed_point;
    IterationTrace trace;
    double qEA = 0.0;
    double mean_absS = 0.0;
    double meanS = 0.0;
    double modularity = 0.0;
    std::vector<int> communities;
    std::optional<double> spectral_radius;
};

struct EnsembleOptions {
    LoopConfig loop;
    bool compute_jacobian = false;
    double jacobian_step = 1e-5;
    bool random_init = false;  // uniform random summaries instead of the bare solve
    int threads = 1;
};

struct MeanSe {
    double mean = 0.0;
    double se = 0.0;
};

struct EnsembleRecord {
    RegimePreset preset;
    std::uint64_t master_seed = 0;
    MeanSe qEA, mean_absS, modularity;
    double cv_qEA = 0.0;
    int excluded = 0;
    int not_converged = 0;
    std::vector<RealizationResult> realizations;
};

/// Solves one realization and fills its diagnostics.
RealizationResult run_realization(const Realization& real, const EnsembleOptions& options,
                                  int index, std::uint64_t seed);

EnsembleRecord run_ensemble(const RegimePreset& preset, std::uint64_t master_seed,
                            const EnsembleOptions& options);

/// Mean and standard error (sample std / sqrt(R)).
MeanSe mean_and_se(std::span<const double> values);
/// Population standard deviation over mean; 0 for a single value.
double coefficient_of_variation(std::span<const double> values);

struct GridResult {
    std::vector<double> J_values, gamma_values;
    // [j][g] row-major over J (rows) and Gamma (columns)
    std::vector<std::vector<EnsembleRecord>> cells;
    std::vector<std::vector<std::string>> status;  // "ok" or an error message
    Eigen::MatrixXd mean_absS, qEA, chi, modularity;
};

GridResult sweep_grid(const RegimePreset& base, const std::vector<double>& J_values,
                      const std::vector<double>& gamma_values, std::uint64_t master_seed,
                      const EnsembleOptions& options);

}  // namespace aqia
