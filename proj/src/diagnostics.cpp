#include "nestlog/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nestlog {

namespace {

double gelman_rubin_prefix(std::span<const std::vector<double>> chains, std::size_t n) {
  const double m = static_cast<double>(chains.size());
  const double nd = static_cast<double>(n);
  std::vector<double> means;
  double within = 0.0;
  for (const auto& c : chains) {
    // Shifting by the first value keeps the mean exact for constant chains.
    double shift = 0.0;
    for (std::size_t t = 0; t < n; ++t) shift += c[t] - c[0];
    const double mean = c[0] + shift / nd;
    double ss = 0.0;
    for (std::size_t t = 0; t < n; ++t) ss += (c[t] - mean) * (c[t] - mean);
    within += ss / (nd - 1.0);
    means.push_back(mean);
  }
  within /= m;
  if (within == 0.0) return 1.0;
  double grand = 0.0;
  for (double x : means) grand += x;
  grand /= m;
  double between = 0.0;
  for (double x : means) between += (x - grand) * (x - grand);
  between *= nd / (m - 1.0);
  const double pooled = (nd - 1.0) / nd * within + between / nd;
  return std::sqrt(pooled / within);
}

void check_chains(std::span<const std::vector<double>> chains) {
  if (chains.size() < 2) throw std::invalid_argument("gelman_rubin: need at least two chains");
  const std::size_t n = chains.front().size();
  for (const auto& c : chains) {
    if (c.size() != n) throw std::invalid_argument("gelman_rubin: chains differ in length");
  }
  if (n < 10) throw std::invalid_argument("gelman_rubin: chains must have at least 10 iterations");
}

}  // namespace

double gelman_rubin(std::span<const std::vector<double>> chains) {
  check_chains(chains);
  return gelman_rubin_prefix(chains, chains.front().size());
}

std::vector<RunningValue> gelman_rubin_running(std::span<const std::vector<double>> chains, std::size_t step) {
  check_chains(chains);
  if (step == 0) throw std::invalid_argument("gelman_rubin_running: step must be positive");
  const std::size_t n = chains.front().size();
  std::vector<RunningValue> out;
  for (std::size_t len = step; len < n; len += step) {
    if (len >= 10) out.push_back({len, gelman_rubin_prefix(chains, len)});
  }
  out.push_back({n, gelman_rubin_prefix(chains, n)});
  return out;
}

std::vector<double> autocorrelation(std::span<const double> chain, std::size_t max_lag) {
  if (chain.size() <= max_lag) throw std::invalid_argument("autocorrelation: chain shorter than max_lag + 1");
  const double n = static_cast<double>(chain.size());
  double shift = 0.0;
  for (double x : chain) shift += x - chain[0];
  const double mean = chain[0] + shift / n;
  std::vector<double> centered(chain.size());
  for (std::size_t t = 0; t < chain.size(); ++t) centered[t] = chain[t] - mean;
  double c0 = 0.0;
  for (double x : centered) c0 += x * x;
  std::vector<double> out(max_lag + 1, 0.0);
  out[0] = 1.0;
  if (c0 == 0.0) return out;
  for (std::size_t lag = 1; lag <= max_lag; ++lag) {
    double c = 0.0;
    for (std::size_t t = 0; t + lag < centered.size(); ++t) c += centered[t] * centered[t + lag];
    out[lag] = c / c0;
  }
  return out;
}

double empirical_extremal_coefficient(const MaximaDataset& data, std::span<const int> subset) {
  if (subset.size() < 2) throw std::invalid_argument("extremal coefficient: subset needs at least two members");
  for (int v : subset) {
    if (v < 1 || static_cast<std::size_t>(v) > data.cols()) {
      throw std::invalid_argument("extremal coefficient: variable index out of range");
    }
  }
  if (data.rows() == 0) throw std::invalid_argument("extremal coefficient: empty dataset");
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    double top = 0.0;
    for (int v : subset) top = std::max(top, data(i, static_cast<std::size_t>(v - 1)));
    total += 1.0 / top;
  }
  return static_cast<double>(data.rows()) / total;
}

double extremal_coefficient_standard_error(double theta_hat, std::size_t rows) {
  return theta_hat / std::sqrt(static_cast<double>(rows));
}

std::vector<double> true_positive_rate(std::span<const PosteriorSummary> replicates, const TwoLayerTree& truth) {
  if (replicates.empty()) throw std::invalid_argument("true_positive_rate: no replicates");
  std::vector<double> rates;
  for (const auto& cluster : truth.clusters()) {
    std::size_t hits = 0;
    for (const auto& rep : replicates) hits += rep.modal().tree.contains_cluster(cluster) ? 1 : 0;
    rates.push_back(static_cast<double>(hits) / static_cast<double>(replicates.size()));
  }
  return rates;
}

}  // namespace nestlog
