#include "nestlog/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <boost/math/distributions/students_t.hpp>

namespace nestlog {

BlockSpec::BlockSpec(std::size_t n, std::size_t count) : block_size(n), block_count(count) {
  if (n < 1 || count < 1) throw std::invalid_argument("block spec: n and N must be >= 1");
}

ClaytonConfig::ClaytonConfig(double theta0_value, std::vector<double> theta_values, double base)
    : theta0(theta0_value), thetas(std::move(theta_values)), base_theta(base) {
  if (!(theta0 >= 1.0) || !std::isfinite(theta0)) throw std::domain_error("clayton: theta0 must be >= 1");
  if (!(base_theta > 0.0)) throw std::domain_error("clayton: base parameter must be positive");
  for (double t : thetas) {
    if (!(t >= theta0) || !std::isfinite(t)) {
      throw std::domain_error("clayton: nesting condition theta0 <= theta_k violated");
    }
  }
}

ClaytonConfig ClaytonConfig::from_params(const DependenceParams& params, double base) {
  std::vector<double> thetas;
  for (std::size_t k = 0; k < params.cluster_count(); ++k) thetas.push_back(1.0 / params.within(k));
  return ClaytonConfig(1.0 / params.alpha0, std::move(thetas), base);
}

StudentTConfig::StudentTConfig(double df, double rho0, std::vector<double> rhos, TwoLayerTree tree)
    : df_(df), rho0_(rho0), rhos_(std::move(rhos)), tree_(std::move(tree)) {
  if (!(df_ > 0.0)) throw std::domain_error("student-t: df must be positive");
  if (rhos_.size() != static_cast<std::size_t>(tree_.cluster_count())) {
    throw std::invalid_argument("student-t: one rho per cluster required");
  }
  auto valid = [](double r) { return r >= 0.0 && r < 1.0; };
  if (!valid(rho0_)) throw std::domain_error("student-t: rho0 must lie in [0, 1)");
  for (double r : rhos_) {
    if (!valid(r)) throw std::domain_error("student-t: rho_k must lie in [0, 1)");
  }
  const auto d = static_cast<Eigen::Index>(dimension());
  const auto scale = scale_matrix();
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> sigma(
      scale.data(), d, d);
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::domain_error("student-t: scale matrix is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();
  chol_.resize(scale.size());
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) chol_[static_cast<std::size_t>(r * d + c)] = lower(r, c);
  }
}

std::vector<double> StudentTConfig::scale_matrix() const {
  const std::size_t d = dimension();
  std::vector<double> out(d * d, rho0_);
  for (std::size_t r = 0; r < d; ++r) {
    const int kr = tree_.cluster_of(static_cast<int>(r) + 1);
    for (std::size_t c = 0; c < d; ++c) {
      if (r == c) {
        out[r * d + c] = 1.0;
      } else if (kr == tree_.cluster_of(static_cast<int>(c) + 1)) {
        out[r * d + c] = rhos_[static_cast<std::size_t>(kr)];
      }
    }
  }
  return out;
}

double sample_log_positive_stable(double alpha, Rng& rng) {
  if (!in_unit_interval(alpha)) throw std::domain_error("positive stable: alpha must lie in (0, 1]");
  if (alpha == 1.0) return 0.0;
  const double u = std::numbers::pi * uniform_open(rng);
  const double w = unit_exponential(rng);
  return std::log(std::sin(alpha * u)) - std::log(std::sin(u)) / alpha +
         (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * u)) - std::log(w));
}

double sample_positive_stable(double alpha, Rng& rng) {
  if (alpha == 1.0) return 1.0;
  return std::exp(sample_log_positive_stable(alpha, rng));
}

void sample_nested_logistic_row(const TwoLayerTree& tree, const DependenceParams& params, Rng& rng,
                                std::span<double> out) {
  check_consistent(tree, params);
  if (out.size() != static_cast<std::size_t>(tree.dimension())) {
    throw std::invalid_argument("nested logistic: output length mismatch");
  }
  const double log_s0 = sample_log_positive_stable(params.alpha0, rng);
  for (int k = 0; k < tree.cluster_count(); ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double a_k = params.alphas[ku];
    const double log_t = log_s0 / a_k + sample_log_positive_stable(a_k, rng);
    const double power = params.within(ku);
    for (int v : tree.cluster(k)) {
      const double log_w = std::log(unit_exponential(rng));
      out[static_cast<std::size_t>(v - 1)] = std::exp(power * (log_t - log_w));
    }
  }
}

MaximaDataset sample_nested_logistic(const TwoLayerTree& tree, const DependenceParams& params,
                                     std::size_t count, Rng& rng) {
  const auto d = static_cast<std::size_t>(tree.dimension());
  std::vector<double> values(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    sample_nested_logistic_row(tree, params, rng, std::span<double>(values.data() + i * d, d));
  }
  return MaximaDataset(count, d, std::move(values));
}

MaximaDataset sample_nested_clayton(const TwoLayerTree& tree, const ClaytonConfig& config,
                                    std::size_t count, Rng& rng) {
  if (config.thetas.size() != static_cast<std::size_t>(tree.cluster_count())) {
    throw std::invalid_argument("clayton: one theta per cluster required");
  }
  const auto d = static_cast<std::size_t>(tree.dimension());
  std::gamma_distribution<double> base_frailty(1.0 / config.base_theta, 1.0);
  std::vector<double> values(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    // Outer frailty of psi_0: V0 = G^{theta0} * S with G ~ Gamma(1/base),
    // S ~ PS(1/theta0).
    double g = 0.0;
    do {
      g = base_frailty(rng);
    } while (g <= 0.0);
    const double log_v0 = config.theta0 * std::log(g) + sample_log_positive_stable(1.0 / config.theta0, rng);
    for (int k = 0; k < tree.cluster_count(); ++k) {
      const double theta_k = config.thetas[static_cast<std::size_t>(k)];
      // Inner frailty given V0 has Laplace transform exp(-V0 t^{theta0/theta_k}).
      const double ratio = config.theta0 / theta_k;
      const double log_v0k = log_v0 / ratio + sample_log_positive_stable(ratio, rng);
      for (int v : tree.cluster(k)) {
        const double log_t = std::log(unit_exponential(rng)) - log_v0k;
        // -log u = (1/base) log(1 + t^{1/theta_k})
        const double neg_log_u = std::log1p(std::exp(log_t / theta_k)) / config.base_theta;
        values[i * d + static_cast<std::size_t>(v - 1)] = 1.0 / neg_log_u;
      }
    }
  }
  return MaximaDataset(count, d, std::move(values));
}

MaximaDataset sample_student_t(const StudentTConfig& config, std::size_t count, Rng& rng) {
  const std::size_t d = config.dimension();
  const auto& chol = config.cholesky();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::chi_squared_distribution<double> chi2(config.df());
  const boost::math::students_t_distribution<double> t_dist(config.df());
  std::vector<double> gauss(d);
  std::vector<double> values(count * d);
  for (std::size_t i = 0; i < count; ++i) {
    for (auto& g : gauss) g = normal(rng);
    double w = 0.0;
    do {
      w = chi2(rng);
    } while (w <= 0.0);
    const double scale = std::sqrt(config.df() / w);
    for (std::size_t r = 0; r < d; ++r) {
      double x = 0.0;
      for (std::size_t c = 0; c <= r; ++c) x += chol[r * d + c] * gauss[c];
      x *= scale;
      const double log_u = x > 0.0 ? std::log1p(-boost::math::cdf(boost::math::complement(t_dist, x)))
                                   : std::log(boost::math::cdf(t_dist, x));
      values[i * d + r] = -1.0 / log_u;
    }
  }
  return MaximaDataset(count, d, std::move(values));
}

MaximaDataset block_maxima(const MaximaDataset& raw, const BlockSpec& spec, MaximaScale scale) {
  const std::size_t n = spec.block_size;
  if (raw.rows() != spec.raw_length()) {
    throw std::invalid_argument("block maxima: " + std::to_string(raw.rows()) + " rows is not N*n = " +
                                std::to_string(spec.block_count) + "*" + std::to_string(n));
  }
  const std::size_t d = raw.cols();
  const double divisor = scale == MaximaScale::unit_frechet ? static_cast<double>(n) : 1.0;
  std::vector<double> values(spec.block_count * d);
  std::vector<TwoLayerTree> partitions;
  partitions.reserve(spec.block_count);
  std::vector<std::size_t> argmax(d);
  for (std::size_t b = 0; b < spec.block_count; ++b) {
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t best = b * n;
      for (std::size_t t = b * n + 1; t < (b + 1) * n; ++t) {
        if (raw(t, c) > raw(best, c)) best = t;
      }
      argmax[c] = best;
      values[b * d + c] = raw(best, c) / divisor;
    }
    // With one observation per block every component shares the time index,
    // which carries no occurrence information; only exact value ties are
    // grouped then.
    std::vector<std::vector<int>> groups;
    std::vector<std::size_t> group_key;
    for (std::size_t c = 0; c < d; ++c) {
      const auto same = [&](std::size_t first) {
        return n == 1 ? values[b * d + first] == values[b * d + c] : argmax[first] == argmax[c];
      };
      const auto it = std::find_if(group_key.begin(), group_key.end(), same);
      if (it == group_key.end()) {
        group_key.push_back(c);
        groups.push_back({static_cast<int>(c) + 1});
      } else {
        groups[static_cast<std::size_t>(it - group_key.begin())].push_back(static_cast<int>(c) + 1);
      }
    }
    partitions.push_back(TwoLayerTree::from_clusters(std::move(groups)));
  }
  return MaximaDataset(spec.block_count, d, std::move(values), std::move(partitions), raw.names());
}

std::vector<double> to_unit_frechet(std::span<const double> column) {
  const std::size_t n = column.size();
  if (n < 2) throw std::invalid_argument("rank transform: need at least two values");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return column[a] < column[b]; });
  if (column[order.front()] == column[order.back()]) {
    throw std::invalid_argument("rank transform: constant column");
  }
  std::vector<double> out(n);
  const double denom = static_cast<double>(n) + 1.0;
  std::size_t start = 0;
  while (start < n) {
    std::size_t stop = start + 1;
    while (stop < n && column[order[stop]] == column[order[start]]) ++stop;
    // Average of the 1-based ranks start+1..stop.
    const double rank = 0.5 * static_cast<double>(start + 1 + stop);
    const double frechet = -1.0 / std::log(rank / denom);
    for (std::size_t r = start; r < stop; ++r) out[order[r]] = frechet;
    start = stop;
  }
  return out;
}

MaximaDataset to_unit_frechet(const MaximaDataset& data) {
  const std::size_t rows = data.rows();
  const std::size_t cols = data.cols();
  std::vector<double> values(rows * cols);
  for (std::size_t c = 0; c < cols; ++c) {
    const auto transformed = to_unit_frechet(data.column(c));
    for (std::size_t i = 0; i < rows; ++i) values[i * cols + c] = transformed[i];
  }
  return MaximaDataset(rows, cols, std::move(values), data.partitions(), data.names());
}

}  // namespace nestlog
