#include "aqia/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_fit.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_sort.h>
#include <gsl/gsl_statistics_double.h>

#include "aqia/diagnostics.hpp"
#include "aqia/parallel.hpp"
#include "aqia/random.hpp"

namespace aqia {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWall = 1e100;

void require_increasing(std::span<const double> x, const char* what) {
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1])) throw std::invalid_argument(std::string(what) + " must be strictly increasing");
}

}  // namespace

// ---- hysteresis -----------------------------------------------------------

double loop_area(std::span<const double> x, std::span<const double> forward,
                 std::span<const double> backward) {
    if (forward.size() != x.size() || backward.size() != x.size())
        throw std::invalid_argument("loop_area: branch lengths must match the grid");
    double area = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double d0 = forward[i - 1] - backward[i - 1], d1 = forward[i] - backward[i];
        area += 0.5 * (d0 + d1) * (x[i] - x[i - 1]);
    }
    return std::abs(area);
}

SweepResult hysteresis_sweep(const RegimePreset& base, std::span<const double> ratios,
                             int iters_per_step, std::uint64_t master_seed,
                             const LoopConfig& loop, int threads) {
    base.validate();
    loop.validate();
    if (ratios.empty()) throw std::invalid_argument("hysteresis needs at least one ratio");
    require_increasing(ratios, "ratio grid");
    if (iters_per_step < 1) throw std::invalid_argument("iters_per_step must be at least 1");
    if (base.gamma <= 0.0) throw std::invalid_argument("hysteresis sweep needs gamma > 0");

    const std::size_t K = ratios.size();
    struct Branches {
        std::vector<double> up, down;
        bool ok = false;
    };
    std::vector<Branches> per_real(static_cast<std::size_t>(base.R));
    parallel_for(per_real.size(), threads, [&](std::size_t r) {
        Branches& out = per_real[r];
        try {
            const auto draw = draw_disorder(base, realization_seed(master_seed, static_cast<int>(r)));
            auto agents_at = [&](double ratio) {
                RegimePreset p = base;
                p.meanJ = ratio * base.gamma;
                return agents_from(p, draw);
            };
            std::vector<Summary> state = bare_summaries(agents_at(ratios[0]));
            auto step = [&](double ratio) {
                const auto agents = agents_at(ratio);
                for (int it = 0; it < iters_per_step; ++it)
                    state = apply_map(agents, state, draw.mask, loop).summaries;
                return mean_polarization(state);
            };
            for (std::size_t k = 0; k < K; ++k) out.up.push_back(step(ratios[k]));
            out.down.resize(K);
            for (std::size_t k = K; k-- > 0;) out.down[k] = step(ratios[k]);
            out.ok = true;
        } catch (const std::exception&) {
            out.ok = false;
        }
    });

    SweepResult res;
    res.ratios.assign(ratios.begin(), ratios.end());
    res.forward.assign(K, 0.0);
    res.backward.assign(K, 0.0);
    for (const auto& b : per_real) {
        if (!b.ok) {
            ++res.excluded;
            continue;
        }
        ++res.realizations;
        for (std::size_t k = 0; k < K; ++k) {
            res.forward[k] += b.up[k];
            res.backward[k] += b.down[k];
        }
    }
    if (res.realizations == 0) throw std::runtime_error("every hysteresis realization failed");
    for (std::size_t k = 0; k < K; ++k) {
        res.forward[k] /= res.realizations;
        res.backward[k] /= res.realizations;
    }
    res.loop_area = loop_area(res.ratios, res.forward, res.backward);
    return res;
}

// ---- finite-size-scaling data ---------------------------------------------

std::vector<int> FssDataset::sizes() const {
    std::vector<int> out;
    for (const auto& r : rows)
        if (out.empty() || out.back() != r.N) out.push_back(r.N);
    return out;
}

FssDataset dataset_from_samples(std::vector<FssSample> samples, BinderSamples binder) {
    std::stable_sort(samples.begin(), samples.end(), [](const FssSample& a, const FssSample& b) {
        if (a.N != b.N) return a.N < b.N;
        if (a.gamma != b.gamma) return a.gamma < b.gamma;
        return a.realization < b.realization;
    });
    FssDataset data;
    std::size_t i = 0;
    while (i < samples.size()) {
        std::size_t j = i;
        std::vector<double> abs_s, signed_s;
        while (j < samples.size() && samples[j].N == samples[i].N &&
               samples[j].gamma == samples[i].gamma) {
            abs_s.push_back(samples[j].mean_absS);
            if (binder == BinderSamples::kPooledAgents) {
                if (samples[j].agentS.empty())
                    throw std::invalid_argument("pooled Binder moments need per-agent S values");
                signed_s.insert(signed_s.end(), samples[j].agentS.begin(), samples[j].agentS.end());
            } else {
                signed_s.push_back(samples[j].meanS);
            }
            ++j;
        }
        FssRow row;
        row.N = samples[i].N;
        row.gamma = samples[i].gamma;
        row.R = static_cast<int>(abs_s.size());
        const auto ms = mean_and_se(abs_s);
        row.mean_absS = ms.mean;
        row.sem = ms.se;
        if (signed_s.size() >= 2) {
            row.U4 = binder_cumulant(signed_s);
            row.U4_err = binder_cumulant_error(signed_s);
        }
        data.rows.push_back(row);
        i = j;
    }
    // chi along each size's Gamma grid
    std::size_t a = 0;
    while (a < data.rows.size()) {
        std::size_t b = a;
        while (b < data.rows.size() && data.rows[b].N == data.rows[a].N) ++b;
        if (b - a >= 3) {
            std::vector<std::pair<double, double>> curve;
            std::vector<double> g, se;
            for (std::size_t k = a; k < b; ++k) {
                curve.emplace_back(data.rows[k].gamma, data.rows[k].mean_absS);
                g.push_back(data.rows[k].gamma);
                se.push_back(data.rows[k].sem);
            }
            const auto chi = susceptibility(curve);
            const auto err = susceptibility_errors(g, se);
            for (std::size_t k = a; k < b; ++k) {
                data.rows[k].chi = chi[k - a].second;
                data.rows[k].chi_err = err[k - a];
            }
        }
        a = b;
    }
    data.samples = std::move(samples);
    return data;
}

FssDataset simulate_fss(const RegimePreset& base, std::span<const int> sizes,
                        std::span<const double> gammas, std::uint64_t master_seed,
                        const EnsembleOptions& options, BinderSamples binder) {
    if (sizes.empty() || gammas.empty()) throw std::invalid_argument("fss needs sizes and gammas");
    require_increasing(gammas, "fss Gamma grid");
    for (int N : sizes) {
        RegimePreset p = base;
        p.N = N;
        p.validate();
    }
    const std::size_t nG = gammas.size(), R = static_cast<std::size_t>(base.R);
    const std::size_t per_size = nG * R;
    std::vector<FssSample> samples(sizes.size() * per_size);
    std::vector<char> ok(samples.size(), 0);
    EnsembleOptions one = options;
    one.threads = 1;
    parallel_for(samples.size(), options.threads, [&](std::size_t t) {
        const std::size_t s = t / per_size, g = (t % per_size) / R, r = t % R;
        RegimePreset p = base;
        p.N = sizes[s];
        p.gamma = gammas[g];
        // disorder keyed by (N, r) only: common random numbers across Gamma
        const auto seed = derive_seed(master_seed, {static_cast<std::uint64_t>(p.N), r});
        const auto draw = draw_disorder(p, seed);
        const Realization real{agents_from(p, draw), draw.mask};
        const auto res = run_realization(real, one, static_cast<int>(r), seed);
        FssSample& out = samples[t];
        out.N = p.N;
        out.gamma = p.gamma;
        out.realization = static_cast<int>(r);
        if (res.ok) {
            out.mean_absS = res.mean_absS;
            out.meanS = res.meanS;
            out.converged = res.fixed_point.converged;
            if (binder == BinderSamples::kPooledAgents)
                for (const auto& m : res.fixed_point.summaries) out.agentS.push_back(m.S);
            ok[t] = 1;
        }
    });
    std::vector<FssSample> kept;
    for (std::size_t t = 0; t < samples.size(); ++t)
        if (ok[t]) kept.push_back(samples[t]);
    if (kept.empty()) throw std::runtime_error("every fss realization failed");
    return dataset_from_samples(std::move(kept), binder);
}

// ---- collapse -------------------------------------------------------------

std::vector<CollapsePoint> collapse_points(const FssDataset& data) {
    std::vector<CollapsePoint> pts;
    for (const auto& r : data.rows) pts.push_back({r.N, r.gamma, r.mean_absS});
    return pts;
}

double interpolate(std::span<const double> x, std::span<const double> y, double x0) {
    if (x.empty()) throw std::invalid_argument("interpolate: empty table");
    if (x0 <= x.front()) return y.front();
    if (x0 >= x.back()) return y.back();
    const auto it = std::upper_bound(x.begin(), x.end(), x0);
    const std::size_t k = static_cast<std::size_t>(it - x.begin());
    const double t = (x0 - x[k - 1]) / (x[k] - x[k - 1]);
    return y[k - 1] + t * (y[k] - y[k - 1]);
}

double collapse_variance(std::span<const CollapsePoint> points, const CollapseParams& p, int bins) {
    if (bins < 1) throw std::invalid_argument("collapse needs at least one bin");
    if (points.empty()) throw std::invalid_argument("collapse needs data points");
    const std::size_t n = points.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double N = points[i].N;
        xs[i] = (points[i].gamma - p.gamma_c) * std::pow(N, 1.0 / p.nu);
        ys[i] = points[i].y * std::pow(N, p.beta_over_nu);
    }
    const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!std::isfinite(lo) || !std::isfinite(hi)) return kInf;

    std::vector<double> sx(bins, 0.0), sy(bins, 0.0);
    std::vector<int> count(bins, 0);
    const double width = (hi - lo) / bins;
    for (std::size_t i = 0; i < n; ++i) {
        int b = width > 0.0 ? static_cast<int>((xs[i] - lo) / width) : 0;
        b = std::clamp(b, 0, bins - 1);
        sx[b] += xs[i];
        sy[b] += ys[i];
        ++count[b];
    }
    std::vector<double> nx, ny;
    for (int b = 0; b < bins; ++b)
        if (count[b] > 0) {
            nx.push_back(sx[b] / count[b]);
            ny.push_back(sy[b] / count[b]);
        }
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = ys[i] - interpolate(nx, ny, xs[i]);
        v += d * d;
    }
    return v / static_cast<double>(n);
}

SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> start, std::vector<double> step, double xtol,
                          int max_iters) {
    const std::size_t d = start.size();
    if (d == 0 || step.size() != d) throw std::invalid_argument("nelder_mead: bad dimensions");
    static const bool quiet = (gsl_set_error_handler_off(), true);
    (void)quiet;
    SimplexResult res;
    struct Ctx {
        const std::function<double(std::span<const double>)>* f;
        SimplexResult* res;
    } ctx{&f, &res};
    gsl_multimin_function fn;
    fn.n = d;
    fn.params = &ctx;
    fn.f = [](const gsl_vector* v, void* params) {
        auto* c = static_cast<Ctx*>(params);
        ++c->res->evaluations;
        const double val = (*c->f)(std::span<const double>(v->data, v->size));
        // the simplex rejects non-finite values; walls become a large plateau
        return std::isfinite(val) ? val : kWall;
    };
    gsl_vector* x = gsl_vector_alloc(d);
    gsl_vector* ss = gsl_vector_alloc(d);
    for (std::size_t k = 0; k < d; ++k) {
        gsl_vector_set(x, k, start[k]);
        gsl_vector_set(ss, k, step[k]);
    }
    gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, d);
    gsl_multimin_fminimizer_set(s, &fn, x, ss);
    for (int it = 0; it < max_iters; ++it) {
        if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s), xtol) == GSL_SUCCESS) {
            res.converged = true;
            break;
        }
    }
    res.x.assign(s->x->data, s->x->data + d);
    res.value = s->fval >= kWall ? kInf : s->fval;
    gsl_multimin_fminimizer_free(s);
    gsl_vector_free(ss);
    gsl_vector_free(x);
    return res;
}

namespace {

// Search domain: nu in [0.05, 20], beta/nu in [0, 5]; outside it the
// objective is +inf so the simplex stays inside.
constexpr double kNuMin = 0.05, kNuMax = 20.0, kBetaMax = 5.0;

bool in_domain(double nu, double beta_over_nu) {
    return nu >= kNuMin && nu <= kNuMax && beta_over_nu >= 0.0 && beta_over_nu <= kBetaMax;
}

void require_sizes(std::span<const CollapsePoint> points, std::size_t minimum) {
    std::vector<int> sizes;
    for (const auto& p : points) sizes.push_back(p.N);
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    if (sizes.size() < minimum)
        throw std::invalid_argument("scaling fit needs at least " + std::to_string(minimum) +
                                    " system sizes, got " + std::to_string(sizes.size()));
}

}  // namespace

ScalingFit collapse_fit(std::span<const CollapsePoint> points, const CollapseStarts& starts, int bins) {
    require_sizes(points, 3);
    if (bins < 5) throw std::invalid_argument("collapse fit needs bins >= 5");
    auto objective = [&](std::span<const double> v) {
        if (!in_domain(v[1], v[2])) return kInf;
        return collapse_variance(points, {v[0], v[1], v[2]}, bins);
    };
    ScalingFit fit;
    fit.method = "collapse";
    double best = kInf;
    double best_start = kInf;
    for (double g : starts.gamma_c)
        for (double nu : starts.nu)
            for (double b : starts.beta_over_nu) {
                best_start = std::min(best_start, objective(std::vector<double>{g, nu, b}));
                const auto r = nelder_mead(objective, {g, nu, b}, {0.1, 0.2, 0.1});
                if (r.value < best) {
                    best = r.value;
                    fit.params = {r.x[0], r.x[1], r.x[2]};
                }
            }
    fit.collapse_variance = best;
    fit.ok = std::isfinite(best);
    if (!(best < best_start)) fit.warnings.push_back("simplex did not improve on any starting point");
    if (!fit.ok) fit.message = "collapse objective not finite at any start";
    return fit;
}

ScalingFit collapse_fit(const FssDataset& data, const CollapseStarts& starts, int bins) {
    return collapse_fit(collapse_points(data), starts, bins);
}

ScalingFit collapse_fit_fixed_gamma(std::span<const CollapsePoint> points, double gamma_c,
                                    const CollapseStarts& starts, int bins) {
    require_sizes(points, 2);
    if (bins < 5) throw std::invalid_argument("collapse fit needs bins >= 5");
    auto objective = [&](std::span<const double> v) {
        if (!in_domain(v[0], v[1])) return kInf;
        return collapse_variance(points, {gamma_c, v[0], v[1]}, bins);
    };
    ScalingFit fit;
    fit.method = "collapse";
    double best = kInf;
    for (double nu : starts.nu)
        for (double b : starts.beta_over_nu) {
            const auto r = nelder_mead(objective, {nu, b}, {0.2, 0.1});
            if (r.value < best) {
                best = r.value;
                fit.params = {gamma_c, r.x[0], r.x[1]};
            }
        }
    fit.collapse_variance = best;
    fit.ok = std::isfinite(best);
    return fit;
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("percentile of an empty set");
    gsl_sort(values.data(), 1, values.size());
    return gsl_stats_quantile_from_sorted_data(values.data(), 1, values.size(), q);
}

BootstrapResult bootstrap_fit(std::span<const FssSample> samples, int resamples, std::uint64_t seed,
                              const CollapseStarts& starts, int bins, int threads) {
    if (resamples < 1) throw std::invalid_argument("bootstrap needs at least one resample");
    // Group realizations by (N, Gamma).
    std::map<std::pair<int, double>, std::vector<double>> groups;
    for (const auto& s : samples) groups[{s.N, s.gamma}].push_back(s.mean_absS);
    if (groups.empty()) throw std::invalid_argument("bootstrap needs samples");

    struct Draw {
        bool ok = false;
        CollapseParams p;
        double variance = 0.0;
    };
    std::vector<Draw> draws(static_cast<std::size_t>(resamples));
    parallel_for(draws.size(), threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, {b}));
        std::vector<CollapsePoint> pts;
        pts.reserve(groups.size());
        for (const auto& [key, values] : groups) {
            std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
            double sum = 0.0;
            for (std::size_t k = 0; k < values.size(); ++k) sum += values[pick(rng)];
            pts.push_back({key.first, key.second, sum / static_cast<double>(values.size())});
        }
        try {
            const auto fit = collapse_fit(pts, starts, bins);
            draws[b] = {fit.ok, fit.params, fit.collapse_variance};
        } catch (const std::exception&) {
            draws[b].ok = false;
        }
    });

    BootstrapResult out;
    std::vector<double> g, nu, bn;
    for (const auto& d : draws) {
        if (!d.ok) {
            ++out.failed;
            continue;
        }
        out.params.push_back(d.p);
        out.variances.push_back(d.variance);
        g.push_back(d.p.gamma_c);
        nu.push_back(d.p.nu);
        bn.push_back(d.p.beta_over_nu);
    }
    out.fit.method = "collapse";
    if (g.empty()) {
        out.fit.ok = false;
        out.fit.message = "every bootstrap resample failed";
        return out;
    }
    out.fit.ok = true;
    out.fit.params = {percentile(g, 0.5), percentile(nu, 0.5), percentile(bn, 0.5)};
    out.fit.collapse_variance = percentile(out.variances, 0.5);
    out.fit.ci_gamma_c = Interval{percentile(g, 0.025), percentile(g, 0.975)};
    out.fit.ci_nu = Interval{percentile(nu, 0.025), percentile(nu, 0.975)};
    out.fit.ci_beta_over_nu = Interval{percentile(bn, 0.025), percentile(bn, 0.975)};
    if (out.failed > 0)
        out.fit.warnings.push_back(std::to_string(out.failed) + " bootstrap resamples failed");
    return out;
}

// ---- Binder crossing ------------------------------------------------------

std::optional<double> curve_crossing(std::span<const double> x, std::span<const double> a,
                                     std::span<const double> b) {
    if (a.size() != x.size() || b.size() != x.size())
        throw std::invalid_argument("curve_crossing: curves must match the grid");
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d1 = a[k] - b[k];
        if (d1 == 0.0) return x[k];
        if (k == 0) continue;
        const double d0 = a[k - 1] - b[k - 1];
        if ((d0 < 0.0) != (d1 < 0.0)) return x[k - 1] + d0 / (d0 - d1) * (x[k] - x[k - 1]);
    }
    return std::nullopt;
}

namespace {

struct Curve {
    int N = 0;
    std::vector<double> gamma, value;
};

// One curve per size; rows where `get` yields nothing are dropped.
template <class Get>
std::vector<Curve> curves_by_size(const FssDataset& data, Get get) {
    std::vector<Curve> out;
    for (const auto& r : data.rows) {
        if (out.empty() || out.back().N != r.N) out.push_back({r.N, {}, {}});
        if (const std::optional<double> v = get(r)) {
            out.back().gamma.push_back(r.gamma);
            out.back().value.push_back(*v);
        }
    }
    return out;
}

}  // namespace

ScalingFit binder_crossing_fit(const FssDataset& data, const CollapseStarts& starts, int bins) {
    ScalingFit fit;
    fit.method = "binder-crossing";
    const auto curves = curves_by_size(data, [](const FssRow& r) { return r.U4; });
    if (curves.size() < 2) {
        fit.message = "Binder crossing needs U4 curves for at least 2 sizes";
        return fit;
    }
    std::vector<double> crossings;
    for (std::size_t a = 0; a < curves.size(); ++a)
        for (std::size_t b = a + 1; b < curves.size(); ++b) {
            // compare on the Gamma values both curves share
            std::vector<double> x, ya, yb;
            for (std::size_t i = 0; i < curves[a].gamma.size(); ++i) {
                const auto it = std::find(curves[b].gamma.begin(), curves[b].gamma.end(), curves[a].gamma[i]);
                if (it == curves[b].gamma.end()) continue;
                x.push_back(curves[a].gamma[i]);
                ya.push_back(curves[a].value[i]);
                yb.push_back(curves[b].value[static_cast<std::size_t>(it - curves[b].gamma.begin())]);
            }
            if (const auto c = curve_crossing(x, ya, yb)) crossings.push_back(*c);
            else
                fit.warnings.push_back("no U4 crossing between N=" + std::to_string(curves[a].N) +
                                       " and N=" + std::to_string(curves[b].N));
        }
    if (crossings.empty()) {
        fit.message = "missing: no Binder cumulant crossing in range";
        return fit;
    }
    const double gc = std::accumulate(crossings.begin(), crossings.end(), 0.0) /
                      static_cast<double>(crossings.size());
    const auto collapse = collapse_fit_fixed_gamma(collapse_points(data), gc, starts, bins);
    fit.params = collapse.params;
    fit.collapse_variance = collapse.collapse_variance;
    fit.ok = collapse.ok;
    return fit;
}

// ---- peak scaling ---------------------------------------------------------

std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                                          double y2) {
    // Newton form: y = y0 + d1 (x - x0) + d2 (x - x0)(x - x1)
    const double d01 = (y1 - y0) / (x1 - x0), d12 = (y2 - y1) / (x2 - x1);
    const double d2 = (d12 - d01) / (x2 - x0);
    if (d2 == 0.0) return {x1, y1};
    const double xv = 0.5 * (x0 + x1) - d01 / (2.0 * d2);
    const double yv = y0 + d01 * (xv - x0) + d2 * (xv - x0) * (xv - x1);
    return {xv, yv};
}

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0;
};

LineFit least_squares_line(std::span<const double> x, std::span<const double> y) {
    LineFit f;
    double c00, c01, c11, sumsq;
    gsl_fit_linear(x.data(), 1, y.data(), 1, x.size(), &f.intercept, &f.slope, &c00, &c01, &c11, &sumsq);
    return f;
}

}  // namespace

ScalingFit peak_scaling_fit(const FssDataset& data, int bins) {
    ScalingFit fit;
    fit.method = "peak-scaling";
    const auto chi_curves = curves_by_size(data, [](const FssRow& r) { return std::optional<double>(r.chi); });
    std::vector<double> sizes, peak_at, peak_height;
    for (const auto& c : chi_curves) {
        if (c.gamma.size() < 3) {
            fit.warnings.push_back("N=" + std::to_string(c.N) + ": fewer than 3 Gamma points");
            continue;
        }
        const auto k = static_cast<std::size_t>(std::max_element(c.value.begin(), c.value.end()) - c.value.begin());
        if (k == 0 || k + 1 == c.gamma.size()) {
            fit.warnings.push_back("N=" + std::to_string(c.N) + ": susceptibility peak on grid boundary, excluded");
            continue;
        }
        const auto [xv, yv] = parabola_vertex(c.gamma[k - 1], c.value[k - 1], c.gamma[k], c.value[k],
                                              c.gamma[k + 1], c.value[k + 1]);
        sizes.push_back(c.N);
        peak_at.push_back(xv);
        peak_height.push_back(yv);
    }
    if (sizes.size() < 3) {
        fit.message = "peak scaling needs interior susceptibility peaks for at least 3 sizes";
        return fit;
    }

    // Gamma*(N) = gamma_c + a N^(-1/nu): linear in (gamma_c, a) for fixed nu,
    // so only nu is searched.
    auto solve_linear = [&](double nu) {
        std::vector<double> u(sizes.size());
        for (std::size_t i = 0; i < sizes.size(); ++i) u[i] = std::pow(sizes[i], -1.0 / nu);
        const auto line = least_squares_line(u, peak_at);
        double sse = 0.0;
        for (std::size_t i = 0; i < sizes.size(); ++i) {
            const double r = peak_at[i] - line.intercept - line.slope * u[i];
            sse += r * r;
        }
        return std::pair<LineFit, double>{line, sse};
    };
    auto objective = [&](std::span<const double> v) {
        const double nu = std::exp(v[0]);
        if (nu < kNuMin || nu > kNuMax) return kInf;
        return solve_linear(nu).second;
    };
    double best = kInf, best_nu = 1.0;
    for (double nu0 : {0.5, 1.0, 1.5}) {
        const auto r = nelder_mead(objective, {std::log(nu0)}, {0.3}, 1e-10);
        if (r.value < best) {
            best = r.value;
            best_nu = std::exp(r.x[0]);
        }
    }
    const auto line = solve_linear(best_nu).first;
    fit.params.nu = best_nu;
    fit.params.gamma_c = line.intercept;

    // beta/nu from <|S|>(gamma_c) ~ N^(-beta/nu); peak height chi_max ~ N^x.
    const auto s_curves = curves_by_size(data, [](const FssRow& r) { return std::optional<double>(r.mean_absS); });
    std::vector<double> logN, logS;
    for (const auto& c : s_curves) {
        if (c.gamma.empty()) continue;
        const double s = interpolate(c.gamma, c.value, fit.params.gamma_c);
        if (s <= 0.0) continue;
        logN.push_back(std::log(static_cast<double>(c.N)));
        logS.push_back(std::log(s));
    }
    if (logN.size() >= 2) fit.params.beta_over_nu = -least_squares_line(logN, logS).slope;
    std::vector<double> logNp, logChi;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        if (peak_height[i] > 0.0) {
            logNp.push_back(std::log(sizes[i]));
            logChi.push_back(std::log(peak_height[i]));
        }
    if (logNp.size() >= 2) fit.peak_height_exponent = least_squares_line(logNp, logChi).slope;
    fit.collapse_variance = collapse_variance(collapse_points(data), fit.params, bins);
    fit.ok = true;
    return fit;
}

}  // namespace aqia
