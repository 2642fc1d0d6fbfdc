#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nestlog/model.hpp"
#include "nestlog/rng.hpp"
#include "nestlog/tree.hpp"

namespace nestlog {

/// n observations per block, N blocks; raw series length M = N * n.
struct BlockSpec {
  std::size_t block_size = 1;
  std::size_t block_count = 1;

  BlockSpec() = default;
  BlockSpec(std::size_t n, std::size_t count);
  std::size_t raw_length() const { return block_size * block_count; }
};

/// Outer-power Clayton generators psi_p(t) = (1 + t^{1/theta_p})^{-1/base}
/// over a fixed Clayton base. theta0 is the between-cluster power and
/// thetas[k] the within-cluster power of cluster k.
struct ClaytonConfig {
  double theta0 = 1.0;
  std::vector<double> thetas;
  double base_theta = 1.0;

  ClaytonConfig() = default;
  /// Throws std::domain_error unless 1 <= theta0 <= thetas[k] and base > 0.
  ClaytonConfig(double theta0_value, std::vector<double> theta_values, double base = 1.0);

  /// theta0 = 1/alpha0, theta_k = 1/(alpha0 alpha_k).
  static ClaytonConfig from_params(const DependenceParams& params, double base = 1.0);
};

/// Multivariate Student-t with unit-diagonal scale matrix: rho_k between
/// members of cluster k, rho0 between members of different clusters.
class StudentTConfig {
 public:
  /// Throws std::domain_error for df <= 0, correlations outside [0, 1) or a
  /// scale matrix that is not positive definite.
  StudentTConfig(double df, double rho0, std::vector<double> rhos, TwoLayerTree tree);

  double df() const { return df_; }
  double rho0() const { return rho0_; }
  const std::vector<double>& rhos() const { return rhos_; }
  const TwoLayerTree& tree() const { return tree_; }
  std::size_t dimension() const { return static_cast<std::size_t>(tree_.dimension()); }

  /// Row-major D x D scale matrix.
  std::vector<double> scale_matrix() const;
  /// Row-major lower Cholesky factor of scale_matrix().
  const std::vector<double>& cholesky() const { return chol_; }

 private:
  double df_;
  double rho0_;
  std::vector<double> rhos_;
  TwoLayerTree tree_;
  std::vector<double> chol_;
};

/// Positive stable S with E[exp(-tS)] = exp(-t^alpha), by Kanter's
/// representation; S == 1 when alpha == 1.
double sample_positive_stable(double alpha, Rng& rng);
double sample_log_positive_stable(double alpha, Rng& rng);

/// One draw from the nested logistic distribution (unit-Frechet margins)
/// through the hierarchical positive-stable construction.
void sample_nested_logistic_row(const TwoLayerTree& tree, const DependenceParams& params, Rng& rng,
                                std::span<double> out);
MaximaDataset sample_nested_logistic(const TwoLayerTree& tree, const DependenceParams& params,
                                     std::size_t count, Rng& rng);

/// Raw draws from the nested outer-power Clayton copula, mapped to unit
/// Frechet margins by u -> -1/log u.
MaximaDataset sample_nested_clayton(const TwoLayerTree& tree, const ClaytonConfig& config,
                                    std::size_t count, Rng& rng);

/// Raw multivariate-t draws, each margin mapped through the t distribution
/// function and then u -> -1/log u.
MaximaDataset sample_student_t(const StudentTConfig& config, std::size_t count, Rng& rng);

enum class MaximaScale {
  raw,
  /// Divide each maximum by the block size; exact unit-Frechet margins when
  /// the raw series already has unit-Frechet margins.
  unit_frechet,
};

/// Componentwise block maxima with occurrence partitions: components whose
/// maxima share a time index within the block are grouped together. For
/// n == 1 the time index is shared trivially, so only components with
/// exactly equal values are grouped.
/// Throws std::invalid_argument unless raw.rows() == N * n.
MaximaDataset block_maxima(const MaximaDataset& raw, const BlockSpec& spec,
                           MaximaScale scale = MaximaScale::raw);

/// Rank transform r/(N+1) (average ranks for ties) followed by
/// u -> -1/log u. Throws std::invalid_argument for N < 2 or a constant
/// column.
std::vector<double> to_unit_frechet(std::span<const double> column);

/// Applies to_unit_frechet to every column; keeps partitions and names.
MaximaDataset to_unit_frechet(const MaximaDataset& data);

}  // namespace nestlog
