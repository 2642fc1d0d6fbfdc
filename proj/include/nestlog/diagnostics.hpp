#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nestlog/model.hpp"
#include "nestlog/posterior.hpp"
#include "nestlog/tree.hpp"

namespace nestlog {

/// Potential scale reduction factor over equal-length chains:
/// sqrt(((n-1)/n W + B/n) / W). Defined as 1 when every chain is constant.
/// Throws std::invalid_argument for fewer than 2 chains, chains shorter
/// than 10 or unequal lengths.
double gelman_rubin(std::span<const std::vector<double>> chains);

/// The statistic over the first `n` iterations for n = step, 2*step, ...
/// (and the full length last). Checkpoints shorter than 10 are skipped.
struct RunningValue {
  std::size_t length = 0;
  double value = 0.0;
};
std::vector<RunningValue> gelman_rubin_running(std::span<const std::vector<double>> chains, std::size_t step);

/// Sample autocorrelations at lags 0..max_lag, normalized by the lag-0
/// autocovariance. A constant chain gives 1, 0, 0, ...
/// Throws std::invalid_argument unless chain.size() > max_lag.
std::vector<double> autocorrelation(std::span<const double> chain, std::size_t max_lag);

/// Moment estimator N / sum_i 1/max_{d in subset} m_{i,d}: the maximum of a
/// unit-Frechet max-stable vector is Frechet with scale theta, so its
/// reciprocal is exponential with mean 1/theta. `subset` is 1-based.
/// Throws std::invalid_argument for |subset| < 2 or bad indices.
double empirical_extremal_coefficient(const MaximaDataset& data, std::span<const int> subset);

/// Monte Carlo standard error of the estimator above, theta_hat / sqrt(N).
double extremal_coefficient_standard_error(double theta_hat, std::size_t rows);

/// For every cluster of `truth`, the fraction of replicates whose modal
/// tree contains exactly that cluster.
std::vector<double> true_positive_rate(std::span<const PosteriorSummary> replicates, const TwoLayerTree& truth);

}  // namespace nestlog
