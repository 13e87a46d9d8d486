#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "aqia/cli.hpp"

namespace aqia {

using nlohmann::json;

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"run", "sweep", "hysteresis", "fss", "bootstrap", "diagnose"};
    return names;
}

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& what) {
    throw ConfigError("config key '" + key + "' " + what);
}

double get_number(const json& v, const std::string& key) {
    if (!v.is_number()) bad_key(key, "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad_key(key, "must be finite");
    return x;
}

long long get_integer(const json& v, const std::string& key) {
    if (!v.is_number_integer()) bad_key(key, "must be an integer");
    return v.get<long long>();
}

int get_int(const json& v, const std::string& key) {
    const long long x = get_integer(v, key);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        bad_key(key, "is out of range");
    return static_cast<int>(x);
}

bool get_bool(const json& v, const std::string& key) {
    if (!v.is_boolean()) bad_key(key, "must be true or false");
    return v.get<bool>();
}

std::string get_string(const json& v, const std::string& key) {
    if (!v.is_string()) bad_key(key, "must be a string");
    return v.get<std::string>();
}

std::vector<double> get_numbers(const json& v, const std::string& key) {
    if (!v.is_array()) bad_key(key, "must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(get_number(e, key));
    return out;
}

std::vector<int> get_ints(const json& v, const std::string& key) {
    if (!v.is_array()) bad_key(key, "must be an array of integers");
    std::vector<int> out;
    for (const auto& e : v) out.push_back(get_int(e, key));
    return out;
}

std::string topology_name(Topology t) { return t == Topology::kRing ? "ring" : "chain"; }

void require(bool ok, const std::string& key, const std::string& what) {
    if (!ok) bad_key(key, what);
}

template <class T>
bool strictly_increasing(const std::vector<T>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (!(v[i] > v[i - 1])) return false;
    return true;
}

}  // namespace

void apply_config_json(const json& j, RunConfig& c) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    if (j.contains("preset")) {
        c.preset_name = get_string(j.at("preset"), "preset");
        try {
            c.preset = preset_by_name(c.preset_name);
        } catch (const std::invalid_argument& e) {
            bad_key("preset", std::string("is invalid: ") + e.what());
        }
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "preset") continue;
        else if (key == "seed") {
            if (!v.is_number_unsigned()) bad_key(key, "must be a non-negative integer");
            c.seed = v.get<std::uint64_t>();
        } else if (key == "out") c.out = get_string(v, key);
        else if (key == "threads") c.threads = get_int(v, key);
        else if (key == "gamma") c.preset.gamma = get_number(v, key);
        else if (key == "mean_j") c.preset.meanJ = get_number(v, key);
        else if (key == "sigma_j") c.preset.sigmaJ = get_number(v, key);
        else if (key == "mean_h") c.preset.meanH = get_number(v, key);
        else if (key == "sigma_h") c.preset.sigmaH = get_number(v, key);
        else if (key == "n_agents") c.preset.N = get_int(v, key);
        else if (key == "n_qubits") c.preset.n = get_int(v, key);
        else if (key == "realizations") c.preset.R = get_int(v, key);
        else if (key == "edge_density") c.preset.edge_density = get_number(v, key);
        else if (key == "topology") {
            const auto t = get_string(v, key);
            if (t == "chain") c.preset.topology = Topology::kChain;
            else if (t == "ring") c.preset.topology = Topology::kRing;
            else bad_key(key, "must be \"chain\" or \"ring\", got \"" + t + "\"");
        } else if (key == "tol") c.loop.tol = get_number(v, key);
        else if (key == "max_iters") c.loop.max_iters = get_int(v, key);
        else if (key == "mixing") c.loop.mixing = get_number(v, key);
        else if (key == "feedback") c.loop.feedback = get_bool(v, key);
        else if (key == "descent_guard") c.loop.descent_guard = get_bool(v, key);
        else if (key == "centered_u_field") c.loop.kernel.centered_u_field = get_bool(v, key);
        else if (key == "epsilon") c.loop.kernel.epsilon = get_number(v, key);
        else if (key == "random_init") c.random_init = get_bool(v, key);
        else if (key == "jacobian") c.compute_jacobian = get_bool(v, key);
        else if (key == "jacobian_step") c.jacobian_step = get_number(v, key);
        else if (key == "grid_j") c.grid_j = get_numbers(v, key);
        else if (key == "grid_gamma") c.grid_gamma = get_numbers(v, key);
        else if (key == "ratios") c.ratios = get_numbers(v, key);
        else if (key == "iters_per_step") c.iters_per_step = get_int(v, key);
        else if (key == "sizes") c.sizes = get_ints(v, key);
        else if (key == "resamples") c.resamples = get_int(v, key);
        else if (key == "bins") c.bins = get_int(v, key);
        else if (key == "binder_samples") c.binder_samples = get_string(v, key);
        else if (key == "cluster_threshold") c.cluster_threshold = get_number(v, key);
        else if (key == "input") c.input = get_string(v, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
}

json config_to_json(const RunConfig& c) {
    json j;
    j["preset"] = c.preset_name;
    j["seed"] = c.seed;
    j["out"] = c.out.string();
    j["gamma"] = c.preset.gamma;
    j["mean_j"] = c.preset.meanJ;
    j["sigma_j"] = c.preset.sigmaJ;
    j["mean_h"] = c.preset.meanH;
    j["sigma_h"] = c.preset.sigmaH;
    j["n_agents"] = c.preset.N;
    j["n_qubits"] = c.preset.n;
    j["realizations"] = c.preset.R;
    j["edge_density"] = c.preset.edge_density;
    j["topology"] = topology_name(c.preset.topology);
    j["tol"] = c.loop.tol;
    j["max_iters"] = c.loop.max_iters;
    j["mixing"] = c.loop.mixing;
    j["feedback"] = c.loop.feedback;
    j["descent_guard"] = c.loop.descent_guard;
    j["centered_u_field"] = c.loop.kernel.centered_u_field;
    j["epsilon"] = c.loop.kernel.epsilon;
    j["random_init"] = c.random_init;
    j["jacobian"] = c.compute_jacobian;
    j["jacobian_step"] = c.jacobian_step;
    j["grid_j"] = c.grid_j;
    j["grid_gamma"] = c.grid_gamma;
    j["ratios"] = c.ratios;
    j["iters_per_step"] = c.iters_per_step;
    j["sizes"] = c.sizes;
    j["resamples"] = c.resamples;
    j["bins"] = c.bins;
    j["binder_samples"] = c.binder_samples;
    j["cluster_threshold"] = c.cluster_threshold;
    j["input"] = c.input.string();
    return j;
}

void validate_config(const RunConfig& c) {
    const auto& p = c.preset;
    require(p.N >= 2, "n_agents", "must be at least 2");
    require(p.n >= 1 && p.n <= kMaxQubits, "n_qubits", "must lie in [1, " + std::to_string(kMaxQubits) + "]");
    require(p.R >= 1, "realizations", "must be at least 1");
    require(p.sigmaJ >= 0.0, "sigma_j", "must be non-negative");
    require(p.sigmaH >= 0.0, "sigma_h", "must be non-negative");
    require(p.gamma >= 0.0, "gamma", "must be non-negative");
    require(p.edge_density > 0.0 && p.edge_density <= 1.0, "edge_density", "must lie in (0, 1]");
    require(c.loop.tol > 0.0, "tol", "must be positive");
    require(c.loop.max_iters >= 1, "max_iters", "must be at least 1");
    require(c.loop.mixing > 0.0 && c.loop.mixing <= 1.0, "mixing", "must lie in (0, 1]");
    require(c.loop.kernel.epsilon > 0.0, "epsilon", "must be positive");
    require(c.jacobian_step > 0.0, "jacobian_step", "must be positive");
    require(c.threads >= 1, "threads", "must be at least 1");
    require(!c.grid_j.empty(), "grid_j", "must not be empty");
    require(!c.grid_gamma.empty(), "grid_gamma", "must not be empty");
    require(strictly_increasing(c.grid_gamma), "grid_gamma", "must be strictly increasing");
    for (double g : c.grid_gamma) require(g >= 0.0, "grid_gamma", "values must be non-negative");
    require(!c.ratios.empty() && strictly_increasing(c.ratios), "ratios", "must be non-empty and strictly increasing");
    require(c.iters_per_step >= 1, "iters_per_step", "must be at least 1");
    require(!c.sizes.empty() && strictly_increasing(c.sizes), "sizes", "must be non-empty and strictly increasing");
    for (int N : c.sizes) require(N >= 2, "sizes", "values must be at least 2");
    require(c.resamples == 0 || c.resamples >= 100, "resamples", "must be 0 (skip) or at least 100");
    require(c.bins >= 5, "bins", "must be at least 5");
    require(c.binder_samples == "realization" || c.binder_samples == "agent", "binder_samples",
            "must be \"realization\" or \"agent\"");
    require(c.cluster_threshold >= 0.0 && c.cluster_threshold <= 1.0, "cluster_threshold", "must lie in [0, 1]");
    if (c.command == "bootstrap" || c.command == "diagnose")
        require(!c.input.empty(), "input", "is required by '" + c.command + "'");
    if (c.command == "bootstrap") require(c.resamples >= 100, "resamples", "must be at least 100 for bootstrap");
}

namespace {

enum class Kind { kNumber, kInteger, kUnsigned, kString, kNumbers, kIntegers, kSetTrue, kSetFalse };

struct FlagSpec {
    const char* flag;
    const char* key;
    Kind kind;
    const char* help;
};

const FlagSpec kFlags[] = {
    {"--preset", "preset", Kind::kString, "critical, glassy or community"},
    {"--seed", "seed", Kind::kUnsigned, "master seed"},
    {"--out", "out", Kind::kString, "output directory"},
    {"--threads", "threads", Kind::kInteger, "worker threads (fallback: AQIA_THREADS)"},
    {"--gamma", "gamma", Kind::kNumber, "transverse field"},
    {"--mean-j", "mean_j", Kind::kNumber, "mean intra-agent coupling"},
    {"--sigma-j", "sigma_j", Kind::kNumber, "coupling disorder width"},
    {"--mean-h", "mean_h", Kind::kNumber, "mean longitudinal field"},
    {"--sigma-h", "sigma_h", Kind::kNumber, "field disorder width"},
    {"--n-agents", "n_agents", Kind::kInteger, "agents per ensemble"},
    {"--n-qubits", "n_qubits", Kind::kInteger, "qubits per agent"},
    {"--realizations", "realizations", Kind::kInteger, "disorder realizations"},
    {"--edge-density", "edge_density", Kind::kNumber, "probability of each agent-agent edge"},
    {"--topology", "topology", Kind::kString, "agent bond graph: chain or ring"},
    {"--tol", "tol", Kind::kNumber, "energy convergence threshold"},
    {"--max-iters", "max_iters", Kind::kInteger, "iteration cap"},
    {"--mixing", "mixing", Kind::kNumber, "linear mixing eta in (0, 1]"},
    {"--epsilon", "epsilon", Kind::kNumber, "kernel regularizer"},
    {"--no-feedback", "feedback", Kind::kSetFalse, "force every feedback weight to zero"},
    {"--no-descent-guard", "descent_guard", Kind::kSetFalse, "never retry energy-raising steps"},
    {"--centered-u-field", "centered_u_field", Kind::kSetTrue, "use U - mean(U) in the U-channel fields"},
    {"--random-init", "random_init", Kind::kSetTrue, "start from random summaries"},
    {"--no-jacobian", "jacobian", Kind::kSetFalse, "skip the fixed-point Jacobian"},
    {"--grid-j", "grid_j", Kind::kNumbers, "comma-separated J values (sweep)"},
    {"--grid-gamma", "grid_gamma", Kind::kNumbers, "comma-separated Gamma values (sweep, fss)"},
    {"--ratios", "ratios", Kind::kNumbers, "comma-separated J/Gamma values (hysteresis)"},
    {"--iters-per-step", "iters_per_step", Kind::kInteger, "map applications per sweep step"},
    {"--sizes", "sizes", Kind::kIntegers, "comma-separated agent counts (fss)"},
    {"--resamples", "resamples", Kind::kInteger, "bootstrap resamples (0 skips in fss)"},
    {"--bins", "bins", Kind::kInteger, "collapse bins"},
    {"--binder-samples", "binder_samples", Kind::kString, "realization or agent"},
    {"--cluster-threshold", "cluster_threshold", Kind::kNumber, "clustering cut as a fraction of max |w|"},
    {"--input", "input", Kind::kString, "input file or run directory (bootstrap, diagnose)"},
};

[[noreturn]] void bad_flag(const std::string& flag, const std::string& text, const char* what) {
    throw ConfigError("flag " + flag + ": '" + text + "' is not " + what);
}

double parse_number(const std::string& flag, const std::string& s) {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(x)) bad_flag(flag, s, "a number");
    return x;
}

long long parse_integer(const std::string& flag, const std::string& s) {
    long long x = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size()) bad_flag(flag, s, "an integer");
    return x;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

json flag_value(const FlagSpec& f, const std::string& text) {
    switch (f.kind) {
        case Kind::kNumber: return parse_number(f.flag, text);
        case Kind::kInteger: return parse_integer(f.flag, text);
        case Kind::kUnsigned: {
            std::uint64_t x = 0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), x);
            if (ec != std::errc() || ptr != text.data() + text.size())
                bad_flag(f.flag, text, "a non-negative integer");
            return x;
        }
        case Kind::kString: return text;
        case Kind::kNumbers: {
            json a = json::array();
            for (const auto& s : split_list(text)) a.push_back(parse_number(f.flag, s));
            return a;
        }
        case Kind::kIntegers: {
            json a = json::array();
            for (const auto& s : split_list(text)) a.push_back(parse_integer(f.flag, s));
            return a;
        }
        case Kind::kSetTrue: return true;
        case Kind::kSetFalse: return false;
    }
    return nullptr;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file '" + path.string() + "' cannot be opened");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file '" + path.string() + "' is malformed: " + e.what());
    }
}

}  // namespace

bool parse_config(int argc, const char* const* argv, RunConfig& config) {
    CLI::App app{"Adaptive ensembles of transverse-field Ising agents", "aqia"};
    std::string command, config_path;
    app.add_option("command", command, "run | sweep | hysteresis | fss | bootstrap | diagnose")->required();
    app.add_option("--config", config_path, "JSON configuration file");
    constexpr std::size_t n_flags = std::size(kFlags);
    std::vector<std::string> text(n_flags);
    std::vector<CLI::Option*> opts(n_flags);
    for (std::size_t i = 0; i < n_flags; ++i) {
        const auto& f = kFlags[i];
        if (f.kind == Kind::kSetTrue || f.kind == Kind::kSetFalse)
            opts[i] = app.add_flag(f.flag, f.help);
        else
            opts[i] = app.add_option(f.flag, text[i], f.help);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        std::cout << app.help();
        return false;
    } catch (const CLI::ParseError& e) {
        throw ConfigError(e.what());
    }
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end())
        throw ConfigError("unknown command '" + command + "'");

    json file = json::object();
    if (!config_path.empty()) file = read_json_file(config_path);
    if (!file.is_object()) throw ConfigError("config file '" + config_path + "' must hold a JSON object");
    json flags = json::object();
    for (std::size_t i = 0; i < n_flags; ++i)
        if (opts[i]->count() > 0) flags[kFlags[i].key] = flag_value(kFlags[i], text[i]);

    RunConfig c;
    c.command = command;
    std::string preset = "critical";
    if (file.contains("preset")) preset = get_string(file.at("preset"), "preset");
    if (flags.contains("preset")) preset = flags.at("preset").get<std::string>();
    apply_config_json(json{{"preset", preset}}, c);
    file.erase("preset");
    flags.erase("preset");

    if (const char* env = std::getenv("AQIA_THREADS"); env && *env) {
        const std::string s(env);
        c.threads = static_cast<int>(parse_integer("AQIA_THREADS", s));
    }
    apply_config_json(file, c);
    apply_config_json(flags, c);
    validate_config(c);
    config = std::move(c);
    return true;
}

}  // namespace aqia
