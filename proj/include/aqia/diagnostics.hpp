#pragma once

// Network and statistical observables on converged ensembles.

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "aqia/agent.hpp"

namespace aqia {

struct CommunityAssignment {
    std::vector<int> labels;  // contiguous from 0
    double Q = 0.0;
};

struct NetworkStats {
    Eigen::VectorXd strengths;
    Eigen::VectorXd clustering;
    std::vector<int> degrees;  // on the thresholded graph
    double threshold = 0.0;    // absolute cut actually applied
};

/// Elementwise max(w, 0).
Eigen::MatrixXd positive_part(const Eigen::MatrixXd& w);

/// Q = (1/2W) sum_{i != j} (w_ij - k_i k_j / 2W) delta(c_i, c_j); 0 when W = 0.
double modularity(const Eigen::MatrixXd& w, std::span<const int> labels);

/// Greedy agglomerative modularity maximization from singletons.
CommunityAssignment detect_communities(const Eigen::MatrixXd& w);

NetworkStats network_stats(const Eigen::MatrixXd& w, double threshold_fraction = 0.1);

enum class CorrelationMode { kPerRealization, kEnsemble };

struct CorrelationMatrix {
    Eigen::MatrixXd values;
    CorrelationMode mode = CorrelationMode::kPerRealization;
    bool sorted = false;
    int realization = -1;  // source realization for per-realization mode
    int samples = 0;
};

std::string to_string(CorrelationMode mode);

/// C_ij = S_i S_j, rows optionally ordered by ascending S_i.
CorrelationMatrix correlation_matrix(std::span<const Summary> summaries, bool sort_by_s,
                                     int realization = -1);

/// Average over realizations of sorted per-realization products.
CorrelationMatrix ensemble_correlation_matrix(const std::vector<std::vector<Summary>>& per_real);

/// chi = -d<|S|>/dGamma: second-order three-point differences (exact for
/// quadratics on any grid), one-sided at the ends.
std::vector<std::pair<double, double>> susceptibility(
    std::span<const std::pair<double, double>> values_vs_gamma);

/// Error bars for chi from independent per-point standard errors.
std::vector<double> susceptibility_errors(std::span<const double> gammas,
                                          std::span<const double> standard_errors);

/// U4 = 1 - <m^4> / (3 <m^2>^2); empty when every sample is zero.
std::optional<double> binder_cumulant(std::span<const double> samples);

/// Leave-one-out jackknife standard error of the Binder cumulant.
std::optional<double> binder_cumulant_error(std::span<const double> samples);

}  // namespace aqia
