#pragma once

// Command-line configuration and the command pipelines behind `aqia`.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "aqia/ensemble.hpp"
#include "aqia/meanfield.hpp"

namespace aqia {

/// Usage or configuration problem; maps to exit status 1.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitRuntime = 2, kExitWarnings = 3 };

struct RunConfig {
    std::string command;
    std::string preset_name = "critical";
    RegimePreset preset;
    LoopConfig loop;
    bool compute_jacobian = true;
    double jacobian_step = 1e-5;
    bool random_init = false;
    std::uint64_t seed = 1;
    std::filesystem::path out = "aqia_out";
    int threads = 1;  // never affects results, so it is left out of metadata

    std::vector<double> grid_j{0.5, 0.75, 1.0, 1.25, 1.5};
    std::vector<double> grid_gamma{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    std::vector<double> ratios{0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5};
    int iters_per_step = 1;
    std::vector<int> sizes{20, 30, 40, 50};
    int resamples = 500;
    int bins = 20;
    std::string binder_samples = "realization";  // or "agent"
    double cluster_threshold = 0.1;
    std::filesystem::path input;
};

const std::vector<std::string>& command_names();

/// Resolves defaults, then the preset, then the --config file, then flags.
/// Throws ConfigError naming the offending key or flag. Returns false if
/// only help was requested (already printed).
bool parse_config(int argc, const char* const* argv, RunConfig& config);

/// Applies one JSON object of config keys; unknown keys are errors.
void apply_config_json(const nlohmann::json& j, RunConfig& config);

/// The fully resolved configuration, in the --config file format.
nlohmann::json config_to_json(const RunConfig& config);

void validate_config(const RunConfig& config);

/// Runs config.command and writes its files under config.out.
int run_command(const RunConfig& config);

}  // namespace aqia
