#pragma once

// Hysteresis sweeps over J/Gamma, finite-size-scaling datasets, collapse
// fitting with bootstrap intervals, Binder-crossing and peak-shift fits.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aqia/ensemble.hpp"

namespace aqia {

// ---- hysteresis -----------------------------------------------------------

struct SweepResult {
    std::vector<double> ratios;    // <J>/Gamma, increasing
    std::vector<double> forward;   // ensemble-mean signed <S> on the way up
    std::vector<double> backward;  // same ratios, recorded on the way down
    double loop_area = 0.0;
    int realizations = 0;
    int excluded = 0;
};

/// Sweeps <J> = ratio * Gamma up then down. Each realization keeps its state
/// between steps and takes exactly iters_per_step map applications per step.
SweepResult hysteresis_sweep(const RegimePreset& base, std::span<const double> ratios,
                             int iters_per_step, std::uint64_t master_seed,
                             const LoopConfig& loop, int threads = 1);

/// |trapezoid integral of (forward - backward) over x|.
double loop_area(std::span<const double> x, std::span<const double> forward,
                 std::span<const double> backward);

// ---- finite-size-scaling data ---------------------------------------------

struct FssSample {
    int N = 0;
    double gamma = 0.0;
    int realization = 0;
    double mean_absS = 0.0;  // (1/N) sum |S_i|
    double meanS = 0.0;      // (1/N) sum S_i, the Binder sample
    bool converged = true;
    std::vector<double> agentS;  // per-agent S, kept only for pooled Binder moments
};

struct FssRow {
    int N = 0;
    double gamma = 0.0;
    double mean_absS = 0.0, sem = 0.0;
    double chi = 0.0, chi_err = 0.0;
    std::optional<double> U4, U4_err;
    int R = 0;
};

struct FssDataset {
    std::vector<FssRow> rows;        // sorted by (N, gamma)
    std::vector<FssSample> samples;  // per-realization values behind the rows
    std::vector<int> sizes() const;
};

enum class BinderSamples { kRealizationMean, kPooledAgents };

/// Aggregates samples into rows: means, SEM, chi along each size's Gamma grid
/// (needs >= 3 Gamma points per size), Binder cumulant with jackknife error.
/// Binder moments use the per-realization mean S by default, or every agent's
/// S pooled over realizations.
FssDataset dataset_from_samples(std::vector<FssSample> samples,
                                BinderSamples binder = BinderSamples::kRealizationMean);

/// Runs the base preset at every (N, Gamma). Realization r of size N uses the
/// same disorder at every Gamma.
FssDataset simulate_fss(const RegimePreset& base, std::span<const int> sizes,
                        std::span<const double> gammas, std::uint64_t master_seed,
                        const EnsembleOptions& options,
                        BinderSamples binder = BinderSamples::kRealizationMean);

// ---- fitting --------------------------------------------------------------

struct CollapseParams {
    double gamma_c = 1.0;
    double nu = 1.0;
    double beta_over_nu = 0.125;
};

struct CollapsePoint {
    int N = 0;
    double gamma = 0.0;
    double y = 0.0;  // <|S|>
};

std::vector<CollapsePoint> collapse_points(const FssDataset& data);

/// Mean squared distance of the rescaled points from the piecewise-linear
/// interpolant of their bin averages.
double collapse_variance(std::span<const CollapsePoint> points, const CollapseParams& p,
                         int bins = 20);

struct Interval {
    double low = 0.0, high = 0.0;
};

struct ScalingFit {
    std::string method;  // collapse, binder-crossing, peak-scaling
    bool ok = false;
    std::string message;
    CollapseParams params;
    double collapse_variance = 0.0;
    std::optional<Interval> ci_gamma_c, ci_nu, ci_beta_over_nu;
    std::optional<double> peak_height_exponent;
    std::vector<std::string> warnings;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Nelder-Mead simplex (GSL nmsimplex2). Stops when the simplex size drops
/// below xtol; non-finite objective values act as walls.
SimplexResult nelder_mead(const std::function<double(std::span<const double>)>& f,
                          std::vector<double> start, std::vector<double> step,
                          double xtol = 1e-8, int max_iters = 2000);

struct CollapseStarts {
    std::vector<double> gamma_c{0.8, 1.0, 1.2};
    std::vector<double> nu{0.5, 1.0, 1.5};
    std::vector<double> beta_over_nu{0.1, 0.3, 0.5};
};

ScalingFit collapse_fit(std::span<const CollapsePoint> points, const CollapseStarts& starts = {},
                        int bins = 20);
ScalingFit collapse_fit(const FssDataset& data, const CollapseStarts& starts = {}, int bins = 20);

/// collapse_fit over (nu, beta/nu) with gamma_c held fixed.
ScalingFit collapse_fit_fixed_gamma(std::span<const CollapsePoint> points, double gamma_c,
                                    const CollapseStarts& starts = {}, int bins = 20);

struct BootstrapResult {
    ScalingFit fit;  // medians, with ci from 2.5/97.5 percentiles
    std::vector<CollapseParams> params;
    std::vector<double> variances;
    int failed = 0;
};

BootstrapResult bootstrap_fit(std::span<const FssSample> samples, int resamples,
                              std::uint64_t seed, const CollapseStarts& starts = {},
                              int bins = 20, int threads = 1);

/// Crossing of two curves sampled on one grid, by linear interpolation
/// between grid points; the first sign change in increasing x.
std::optional<double> curve_crossing(std::span<const double> x, std::span<const double> a,
                                     std::span<const double> b);

ScalingFit binder_crossing_fit(const FssDataset& data, const CollapseStarts& starts = {},
                               int bins = 20);

/// Vertex of the parabola through three points.
std::pair<double, double> parabola_vertex(double x0, double y0, double x1, double y1, double x2,
                                          double y2);

ScalingFit peak_scaling_fit(const FssDataset& data, int bins = 20);

/// Linear-interpolated value of y(x) at x0, clamped to the end values.
double interpolate(std::span<const double> x, std::span<const double> y, double x0);

/// q-th quantile (0..1) with linear interpolation between order statistics.
double percentile(std::vector<double> values, double q);

}  // namespace aqia
