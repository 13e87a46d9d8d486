#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "aqia/cli.hpp"
#include "aqia/diagnostics.hpp"
#include "aqia/scaling.hpp"

namespace aqia {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---- writing --------------------------------------------------------------

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(std::uint64_t x) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%" PRIu64, x);
    return buf;
}

std::string fmt(int x) { return std::to_string(x); }
std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

class Csv {
  public:
    explicit Csv(std::vector<std::string> columns) : columns_(std::move(columns)) {
        line(columns_);
    }
    template <class... T>
    void row(const T&... v) {
        std::vector<std::string> cells{fmt(v)...};
        line(cells);
    }
    std::string str() const { return out_.str(); }
    const std::vector<std::string>& columns() const { return columns_; }

  private:
    void line(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }
    std::vector<std::string> columns_;
    std::ostringstream out_;
};

struct Artifacts {
    explicit Artifacts(const RunConfig& c) : config(c) {}

    const RunConfig& config;
    std::vector<std::string> warnings;
    bool partial = false;

    void write_text(const std::string& name, const std::string& content, const json& extra = {}) {
        const fs::path path = config.out / name;
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + path.string());
        f << content;
        if (!f) throw std::runtime_error("write failed for " + path.string());
        json meta;
        meta["file"] = name;
        meta["command"] = config.command;
        meta["seed"] = config.seed;
        meta["config"] = config_to_json(config);
        meta["partial"] = partial;
        meta["warnings"] = warnings;
        if (!extra.is_null()) meta.update(extra);
        std::ofstream m(fs::path(path.string() + ".meta.json"), std::ios::binary);
        m << meta.dump(2) << '\n';
        if (!m) throw std::runtime_error("write failed for " + path.string() + ".meta.json");
    }
    void write_csv(const std::string& name, const Csv& csv) {
        write_text(name, csv.str(), json{{"columns", csv.columns()}});
    }
    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }
    int status() const { return warnings.empty() ? kExitOk : kExitWarnings; }
};

// ---- reading --------------------------------------------------------------

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    std::size_t index(const std::string& name, const std::string& file) const {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw std::runtime_error(file + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - columns.begin());
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Table read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open input file '" + path.string() + "'");
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
    t.columns = split(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split(line);
        if (cells.size() != t.columns.size())
            throw std::runtime_error(path.string() + ": row with " + std::to_string(cells.size()) +
                                     " cells, expected " + std::to_string(t.columns.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

template <class T>
T parse_cell(const std::string& s, const std::string& what) {
    T x{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error("cannot parse '" + s + "' in column " + what);
    return x;
}

fs::path resolve_input(const fs::path& input, const std::string& default_name) {
    if (fs::is_directory(input)) return input / default_name;
    return input;
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    return json::parse(in);
}

// ---- JSON views -----------------------------------------------------------

json to_json(const MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }

json to_json(const ScalingFit& f) {
    json j;
    j["method"] = f.method;
    j["ok"] = f.ok;
    if (!f.message.empty()) j["message"] = f.message;
    if (f.ok) {
        j["gamma_c"] = f.params.gamma_c;
        j["nu"] = f.params.nu;
        j["beta_over_nu"] = f.params.beta_over_nu;
        j["collapse_variance"] = f.collapse_variance;
    }
    auto ci = [](const std::optional<Interval>& i) { return json::array({i->low, i->high}); };
    if (f.ci_gamma_c) j["ci95_gamma_c"] = ci(f.ci_gamma_c);
    if (f.ci_nu) j["ci95_nu"] = ci(f.ci_nu);
    if (f.ci_beta_over_nu) j["ci95_beta_over_nu"] = ci(f.ci_beta_over_nu);
    if (f.peak_height_exponent) j["peak_height_exponent"] = *f.peak_height_exponent;
    j["warnings"] = f.warnings;
    return j;
}

EnsembleOptions ensemble_options(const RunConfig& c, bool jacobian) {
    EnsembleOptions o;
    o.loop = c.loop;
    o.compute_jacobian = jacobian;
    o.jacobian_step = c.jacobian_step;
    o.random_init = c.random_init;
    o.threads = c.threads;
    return o;
}

// ---- commands -------------------------------------------------------------

int cmd_run(const RunConfig& c) {
    Artifacts out(c);
    const auto rec = run_ensemble(c.preset, c.seed, ensemble_options(c, c.compute_jacobian));
    if (rec.excluded > 0) {
        out.partial = true;
        out.warnings.push_back(std::to_string(rec.excluded) + " realizations failed and were excluded");
    }
    if (rec.not_converged > 0)
        out.warnings.push_back(std::to_string(rec.not_converged) + " realizations hit max_iters");

    Csv summaries({"realization", "seed", "agent", "S", "B", "U"});
    Csv trace({"realization", "iteration", "energy", "residual"});
    Csv edges({"realization", "i", "j", "weight"});
    json reals = json::array();
    for (const auto& r : rec.realizations) {
        json jr{{"index", r.index}, {"seed", r.seed}, {"ok", r.ok}};
        if (!r.ok) {
            jr["error"] = r.error;
            reals.push_back(jr);
            continue;
        }
        const auto& fp = r.fixed_point;
        for (std::size_t i = 0; i < fp.summaries.size(); ++i)
            summaries.row(r.index, r.seed, static_cast<int>(i), fp.summaries[i].S, fp.summaries[i].B,
                          fp.summaries[i].U);
        for (std::size_t k = 0; k < r.trace.energies.size(); ++k)
            trace.row(r.index, static_cast<int>(k), r.trace.energies[k],
                      k == 0 ? std::optional<double>() : std::optional<double>(r.trace.residuals[k - 1]));
        const auto& w = fp.weights;
        for (int i = 0; i < w.size(); ++i)
            for (int j = i + 1; j < w.size(); ++j)
                if (w.mask(i, j)) edges.row(r.index, i, j, w.aggregate(i, j));
        jr["converged"] = fp.converged;
        jr["iterations"] = fp.iterations;
        jr["energy"] = fp.energy;
        jr["final_residual"] = fp.final_residual;
        jr["guard_retries"] = fp.guard_retries;
        jr["energy_increases"] = fp.energy_increases;
        jr["q_ea"] = r.qEA;
        jr["mean_abs_s"] = r.mean_absS;
        jr["mean_s"] = r.meanS;
        jr["modularity"] = r.modularity;
        jr["communities"] = r.communities;
        jr["spectral_radius"] = r.spectral_radius ? json(*r.spectral_radius) : json(nullptr);
        reals.push_back(jr);
    }
    json stats;
    stats["preset"] = c.preset_name;
    stats["master_seed"] = c.seed;
    stats["q_ea"] = to_json(rec.qEA);
    stats["mean_abs_s"] = to_json(rec.mean_absS);
    stats["modularity"] = to_json(rec.modularity);
    stats["cv_q_ea"] = rec.cv_qEA;
    stats["excluded"] = rec.excluded;
    stats["not_converged"] = rec.not_converged;
    stats["realizations"] = reals;

    out.write_csv("summaries.csv", summaries);
    out.write_csv("energy_trace.csv", trace);
    out.write_csv("network_edges.csv", edges);
    out.write_json("stats.json", stats);
    return out.status();
}

int cmd_sweep(const RunConfig& c) {
    Artifacts out(c);
    const auto g = sweep_grid(c.preset, c.grid_j, c.grid_gamma, c.seed, ensemble_options(c, false));
    Csv csv({"J", "gamma", "status", "mean_abs_s", "mean_abs_s_se", "q_ea", "q_ea_se", "cv_q_ea", "chi",
             "modularity", "modularity_se", "excluded", "not_converged"});
    for (std::size_t j = 0; j < g.J_values.size(); ++j)
        for (std::size_t k = 0; k < g.gamma_values.size(); ++k) {
            const auto& st = g.status[j][k];
            const auto& cell = g.cells[j][k];
            const bool failed = st.rfind("failed", 0) == 0;
            const int code = st == "ok" ? 0 : failed ? 2 : 1;
            if (st != "ok") {
                out.partial = true;
                out.warnings.push_back("J=" + fmt(g.J_values[j]) + " gamma=" + fmt(g.gamma_values[k]) + ": " + st);
            }
            const auto ji = static_cast<Eigen::Index>(j), ki = static_cast<Eigen::Index>(k);
            csv.row(g.J_values[j], g.gamma_values[k], code, g.mean_absS(ji, ki), cell.mean_absS.se,
                    g.qEA(ji, ki), cell.qEA.se, cell.cv_qEA, g.chi(ji, ki), g.modularity(ji, ki),
                    cell.modularity.se, cell.excluded, cell.not_converged);
        }
    out.write_text("grid.csv", csv.str(),
                   json{{"columns", csv.columns()}, {"status_codes", {{"0", "ok"}, {"1", "partial"}, {"2", "failed"}}}});
    return out.status();
}

int cmd_hysteresis(const RunConfig& c) {
    Artifacts out(c);
    const auto res = hysteresis_sweep(c.preset, c.ratios, c.iters_per_step, c.seed, c.loop, c.threads);
    if (res.excluded > 0) {
        out.partial = true;
        out.warnings.push_back(std::to_string(res.excluded) + " realizations failed and were excluded");
    }
    Csv csv({"ratio", "forward", "backward"});
    for (std::size_t k = 0; k < res.ratios.size(); ++k) csv.row(res.ratios[k], res.forward[k], res.backward[k]);
    out.write_csv("hysteresis.csv", csv);
    out.write_json("hysteresis.json", json{{"loop_area", res.loop_area},
                                           {"iters_per_step", c.iters_per_step},
                                           {"realizations", res.realizations},
                                           {"excluded", res.excluded}});
    return out.status();
}

Csv fss_raw_csv(const FssDataset& d) {
    Csv csv({"N", "gamma", "R", "mean_abs_s", "mean_abs_s_sem", "chi", "chi_err", "U4", "U4_err"});
    for (const auto& r : d.rows) csv.row(r.N, r.gamma, r.R, r.mean_absS, r.sem, r.chi, r.chi_err, r.U4, r.U4_err);
    return csv;
}

void write_fits(const RunConfig& c, Artifacts& out, const FssDataset& data) {
    CollapseStarts starts;
    json fits;
    auto note = [&](const ScalingFit& f) {
        if (!f.ok) out.warnings.push_back(f.method + ": " + f.message);
    };
    const auto collapse = collapse_fit(data, starts, c.bins);
    const auto binder = binder_crossing_fit(data, starts, c.bins);
    const auto peak = peak_scaling_fit(data, c.bins);
    note(collapse);
    note(binder);
    note(peak);
    fits["collapse"] = to_json(collapse);
    fits["binder_crossing"] = to_json(binder);
    fits["peak_scaling"] = to_json(peak);
    fits["bins"] = c.bins;
    if (c.resamples > 0) {
        const auto boot = bootstrap_fit(data.samples, c.resamples, c.seed, starts, c.bins, c.threads);
        json jb = to_json(boot.fit);
        jb["resamples"] = c.resamples;
        jb["failed"] = boot.failed;
        fits["bootstrap"] = jb;
        if (boot.failed > 0) out.warnings.push_back(std::to_string(boot.failed) + " bootstrap resamples failed");
        Csv dist({"resample", "gamma_c", "nu", "beta_over_nu", "collapse_variance"});
        for (std::size_t b = 0; b < boot.params.size(); ++b)
            dist.row(static_cast<int>(b), boot.params[b].gamma_c, boot.params[b].nu, boot.params[b].beta_over_nu,
                     boot.variances[b]);
        out.write_csv("bootstrap_dist.csv", dist);
    }
    out.write_json("fss_fit.json", fits);
}

int cmd_fss(const RunConfig& c) {
    Artifacts out(c);
    const auto binder = c.binder_samples == "agent" ? BinderSamples::kPooledAgents : BinderSamples::kRealizationMean;
    const auto data = simulate_fss(c.preset, c.sizes, c.grid_gamma, c.seed, ensemble_options(c, false), binder);
    const std::size_t expected = c.sizes.size() * c.grid_gamma.size() * static_cast<std::size_t>(c.preset.R);
    if (data.samples.size() < expected) {
        out.partial = true;
        out.warnings.push_back(std::to_string(expected - data.samples.size()) + " realizations failed and were excluded");
    }
    int unconverged = 0;
    for (const auto& s : data.samples) unconverged += s.converged ? 0 : 1;
    if (unconverged > 0) out.warnings.push_back(std::to_string(unconverged) + " realizations hit max_iters");

    Csv reals({"N", "gamma", "realization", "mean_abs_s", "mean_s", "converged"});
    for (const auto& s : data.samples) reals.row(s.N, s.gamma, s.realization, s.mean_absS, s.meanS, s.converged ? 1 : 0);
    out.write_csv("fss_realizations.csv", reals);
    out.write_csv("fss_raw.csv", fss_raw_csv(data));
    write_fits(c, out, data);
    return out.status();
}

int cmd_bootstrap(const RunConfig& c) {
    if (c.binder_samples == "agent")
        throw ConfigError("config key 'binder_samples' = \"agent\" needs per-agent data; bootstrap reads realization means");
    Artifacts out(c);
    const auto path = resolve_input(c.input, "fss_realizations.csv");
    const auto t = read_csv(path);
    const auto iN = t.index("N", path.string()), iG = t.index("gamma", path.string()),
               iR = t.index("realization", path.string()), iA = t.index("mean_abs_s", path.string()),
               iS = t.index("mean_s", path.string());
    const auto iC = std::find(t.columns.begin(), t.columns.end(), "converged") != t.columns.end()
                        ? std::optional<std::size_t>(t.index("converged", path.string()))
                        : std::nullopt;
    std::vector<FssSample> samples;
    for (const auto& r : t.rows) {
        FssSample s;
        s.N = parse_cell<int>(r[iN], "N");
        s.gamma = parse_cell<double>(r[iG], "gamma");
        s.realization = parse_cell<int>(r[iR], "realization");
        s.mean_absS = parse_cell<double>(r[iA], "mean_abs_s");
        s.meanS = parse_cell<double>(r[iS], "mean_s");
        if (iC) s.converged = parse_cell<int>(r[*iC], "converged") != 0;
        samples.push_back(s);
    }
    const auto data = dataset_from_samples(std::move(samples));
    out.write_csv("fss_raw.csv", fss_raw_csv(data));
    write_fits(c, out, data);
    return out.status();
}

int cmd_diagnose(const RunConfig& c) {
    Artifacts out(c);
    const auto path = resolve_input(c.input, "summaries.csv");
    const auto meta = read_json(fs::path(path.string() + ".meta.json"));
    // Rebuild the producing run's configuration from its sidecar.
    RunConfig src;
    src.command = "run";
    apply_config_json(meta.at("config"), src);

    const auto t = read_csv(path);
    const auto iR = t.index("realization", path.string()), iSeed = t.index("seed", path.string()),
               iA = t.index("agent", path.string()), iS = t.index("S", path.string()),
               iB = t.index("B", path.string()), iU = t.index("U", path.string());
    std::map<int, std::pair<std::uint64_t, std::vector<Summary>>> runs;
    for (const auto& r : t.rows) {
        const int real = parse_cell<int>(r[iR], "realization");
        auto& entry = runs[real];
        entry.first = parse_cell<std::uint64_t>(r[iSeed], "seed");
        if (parse_cell<int>(r[iA], "agent") != static_cast<int>(entry.second.size()))
            throw std::runtime_error(path.string() + ": agents of realization " + std::to_string(real) + " out of order");
        entry.second.push_back({parse_cell<double>(r[iS], "S"), parse_cell<double>(r[iB], "B"),
                                parse_cell<double>(r[iU], "U")});
    }
    if (runs.empty()) throw std::runtime_error(path.string() + ": no summaries");

    json reals = json::array();
    Csv network({"realization", "agent", "strength", "degree", "clustering", "community"});
    std::vector<std::vector<Summary>> per_real;
    for (const auto& [real, entry] : runs) {
        const auto& [seed, m] = entry;
        const auto mask = sample_realization(src.preset, seed).mask;
        const auto w = weights_for(m, mask, src.loop);
        const auto comm = detect_communities(positive_part(w.aggregate));
        const auto net = network_stats(w.aggregate, c.cluster_threshold);
        for (int i = 0; i < w.size(); ++i)
            network.row(real, i, net.strengths[i], net.degrees[static_cast<std::size_t>(i)], net.clustering[i],
                        comm.labels[static_cast<std::size_t>(i)]);
        reals.push_back({{"index", real},
                         {"seed", seed},
                         {"modularity", comm.Q},
                         {"communities", comm.labels},
                         {"q_ea", edwards_anderson(m)},
                         {"mean_abs_s", mean_abs_polarization(m)},
                         {"mean_clustering", net.clustering.mean()},
                         {"threshold", net.threshold}});
        per_real.push_back(m);
    }

    auto matrix_csv = [](const CorrelationMatrix& cm) {
        std::vector<std::string> cols{"row"};
        for (Eigen::Index j = 0; j < cm.values.cols(); ++j) cols.push_back("c" + std::to_string(j));
        std::ostringstream s;
        for (std::size_t i = 0; i < cols.size(); ++i) s << (i ? "," : "") << cols[i];
        s << '\n';
        for (Eigen::Index i = 0; i < cm.values.rows(); ++i) {
            s << i;
            for (Eigen::Index j = 0; j < cm.values.cols(); ++j) s << ',' << fmt(cm.values(i, j));
            s << '\n';
        }
        return s.str();
    };
    auto matrix_meta = [](const CorrelationMatrix& cm) {
        return json{{"mode", to_string(cm.mode)}, {"sorted_by_s", cm.sorted}, {"realization", cm.realization},
                    {"samples", cm.samples}};
    };
    const auto first = correlation_matrix(per_real.front(), true, runs.begin()->first);
    const auto ensemble = ensemble_correlation_matrix(per_real);

    out.write_json("diagnostics.json", json{{"source", path.string()}, {"realizations", reals}});
    out.write_csv("network_stats.csv", network);
    out.write_text("correlation_per_realization.csv", matrix_csv(first), matrix_meta(first));
    out.write_text("correlation_ensemble.csv", matrix_csv(ensemble), matrix_meta(ensemble));
    return out.status();
}

}  // namespace

int run_command(const RunConfig& config) {
    validate_config(config);
    std::error_code ec;
    fs::create_directories(config.out, ec);
    if (ec || !fs::is_directory(config.out))
        throw ConfigError("config key 'out': cannot create directory '" + config.out.string() + "'");
    if (config.command == "run") return cmd_run(config);
    if (config.command == "sweep") return cmd_sweep(config);
    if (config.command == "hysteresis") return cmd_hysteresis(config);
    if (config.command == "fss") return cmd_fss(config);
    if (config.command == "bootstrap") return cmd_bootstrap(config);
    if (config.command == "diagnose") return cmd_diagnose(config);
    throw ConfigError("unknown command '" + config.command + "'");
}

}  // namespace aqia
