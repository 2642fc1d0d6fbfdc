#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nestlog/tree.hpp"

namespace nestlog {

/// Between-cluster alpha0 and one within-cluster alpha per cluster, all in
/// (0, 1]. The within-cluster dependence of cluster k is alpha0 * alphas[k].
struct DependenceParams {
  double alpha0 = 1.0;
  std::vector<double> alphas;

  DependenceParams() = default;
  /// Throws std::domain_error if any entry lies outside (0, 1].
  DependenceParams(double alpha0_value, std::vector<double> alpha_values);

  std::size_t cluster_count() const { return alphas.size(); }
  /// Number of parameters, K + 1.
  std::size_t size() const { return alphas.size() + 1; }
  double within(std::size_t k) const { return alpha0 * alphas[k]; }
  /// Parameter p, where p == 0 is alpha0 and p == k + 1 is alphas[k].
  double get(std::size_t p) const { return p == 0 ? alpha0 : alphas[p - 1]; }
  void set(std::size_t p, double value);

  friend bool operator==(const DependenceParams&, const DependenceParams&) = default;
};

bool in_unit_interval(double alpha);

/// Throws std::invalid_argument if params and tree disagree on K.
void check_consistent(const TwoLayerTree& tree, const DependenceParams& params);

/// N x D block maxima on the unit-Frechet scale, row-major.
class MaximaDataset {
 public:
  MaximaDataset() = default;
  /// Validates values (finite, > 0), partitions (one per row, each over
  /// {1..D}) and names (empty or D labels).
  MaximaDataset(std::size_t rows, std::size_t cols, std::vector<double> values,
                std::optional<std::vector<TwoLayerTree>> partitions = std::nullopt,
                std::vector<std::string> names = {});

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double operator()(std::size_t i, std::size_t d) const { return values_[i * cols_ + d]; }
  std::span<const double> row(std::size_t i) const { return {values_.data() + i * cols_, cols_}; }
  std::span<const double> values() const { return values_; }
  std::vector<double> column(std::size_t d) const;

  bool has_partitions() const { return partitions_.has_value(); }
  const TwoLayerTree& partition(std::size_t i) const;
  const std::optional<std::vector<TwoLayerTree>>& partitions() const { return partitions_; }

  /// Variable labels; defaults to z1..zD when none were supplied.
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::optional<std::vector<TwoLayerTree>> partitions_;
  std::vector<std::string> names_;
};

std::vector<std::string> default_names(std::size_t dimension);

/// (sum_d z_d^{-1/alpha})^alpha. Throws std::domain_error for z_d <= 0 or
/// alpha outside (0, 1].
double v_logistic(std::span<const double> z, double alpha);
double log_v_logistic(std::span<const double> z, double alpha);

/// Nested logistic exponent function V(z), evaluated in log space.
double v_nested(std::span<const double> z, const TwoLayerTree& tree, const DependenceParams& params);
double log_v_nested(std::span<const double> z, const TwoLayerTree& tree,
                    const DependenceParams& params);

/// theta_D = V(1) = (sum_k D_k^{alpha_k})^{alpha0}.
double extremal_coefficient(const TwoLayerTree& tree, const DependenceParams& params);

/// Per-row log quantities shared by every likelihood route:
/// log z_d, log V_k (cluster terms) and log V.
struct ExponentTerms {
  std::vector<double> log_z;
  std::vector<double> log_vk;
  double log_v = 0.0;
};

/// Requires log_z.size() == tree.dimension(). Members of each cluster are
/// summed in sorted order so the result does not depend on labelling.
ExponentTerms exponent_terms(std::span<const double> log_z, const TwoLayerTree& tree,
                             const DependenceParams& params);

}  // namespace nestlog
