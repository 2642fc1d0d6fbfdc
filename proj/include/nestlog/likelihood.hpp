#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "nestlog/model.hpp"
#include "nestlog/numeric.hpp"
#include "nestlog/tree.hpp"

namespace nestlog {

/// Coefficients beta_{i_1..i_K; j} of the mixed partial of G = exp(-V) with
/// respect to the first d_k variables of every cluster k:
///
///   d^{sum d_k} G = G * prod z^{-1/(a0 a_k) - 1}
///                   * sum_{i,j} beta_{i;j} prod_k V_k^{i_k - d_k/a_k} V^{j - sum(i)/a0}.
///
/// The table is grown one variable at a time, cluster by cluster, using the
/// three-term recurrence obtained by differentiating G, V_k and V; the first
/// cluster starts from the empty derivative (beta = 1 at i = 0, j = 0). Each
/// coefficient is kept as log-magnitude plus sign.
class BetaTable {
 public:
  /// `params.alphas` must be aligned with `cluster_sizes`; every size >= 1.
  static BetaTable build(std::span<const int> cluster_sizes, const DependenceParams& params);

  const std::vector<int>& shape() const { return shape_; }

  /// Zero outside 1 <= i_k <= d_k, 1 <= j <= sum(i).
  SignedLog coefficient(std::span<const int> i, int j) const;

  /// Number of admissible entries of the finished table.
  std::size_t size() const { return coef_.size(); }

  /// Coefficients evaluated while growing cluster k (all steps h = 1..d_k).
  const std::vector<std::size_t>& stage_counts() const { return stage_counts_; }
  std::size_t computed_count() const;

  /// Admissible entries in the finished table, in row-major order.
  std::span<const int> term_indices(std::size_t t) const {
    return {indices_.data() + t * shape_.size(), shape_.size()};
  }
  int term_j(std::size_t t) const { return j_[t]; }
  SignedLog term_coefficient(std::size_t t) const { return coef_[t]; }

 private:
  std::vector<int> shape_;
  std::vector<int> indices_;
  std::vector<int> j_;
  std::vector<SignedLog> coef_;
  std::vector<std::size_t> stage_counts_;
};

/// Coefficients gamma_{i_1..i_kappa} of the mixed partial of V itself with
/// respect to d_k variables in each of kappa clusters:
///
///   d^{sum d_k} V = prod z^{-1/(a0 a_k) - 1}
///                   * sum_i gamma_i prod_k V_k^{i_k - d_k/a_k} V^{1 - sum(i)/a0}.
///
/// Same growth scheme as BetaTable without the j index: differentiating V
/// never produces a fresh factor of V, so no power of V is regenerated.
class GammaTable {
 public:
  /// `params.alphas` must be aligned with `subset_sizes`; every size >= 1.
  static GammaTable build(std::span<const int> subset_sizes, const DependenceParams& params);

  const std::vector<int>& shape() const { return shape_; }
  SignedLog coefficient(std::span<const int> i) const;
  std::size_t size() const { return coef_.size(); }
  const std::vector<std::size_t>& stage_counts() const { return stage_counts_; }

  std::span<const int> term_indices(std::size_t t) const {
    return {indices_.data() + t * shape_.size(), shape_.size()};
  }
  SignedLog term_coefficient(std::size_t t) const { return coef_[t]; }

 private:
  std::vector<int> shape_;
  std::vector<int> indices_;
  std::vector<SignedLog> coef_;
  std::vector<std::size_t> stage_counts_;
};

BetaTable build_beta_table(std::span<const int> cluster_sizes, const DependenceParams& params);
GammaTable build_gamma_table(std::span<const int> subset_sizes, const DependenceParams& params);

/// Closed-form count of the coefficients computed while growing the last
/// cluster of `sizes`, given the earlier clusters complete.
std::size_t beta_stage_count_closed_form(std::span<const int> sizes);

/// Gamma tables keyed by (cluster, d_k) pairs. Valid for a single parameter
/// value only; callers create one per likelihood evaluation.
class GammaCache {
 public:
  const GammaTable& get(const std::vector<std::pair<int, int>>& key, const DependenceParams& params);

 private:
  std::map<std::vector<std::pair<int, int>>, GammaTable> tables_;
};

/// The mixed partial of V with respect to `variables` (1-based, distinct),
/// as SignedLog. Within a cluster only the number of selected members
/// matters for the coefficients.
SignedLog partial_v_from_terms(const ExponentTerms& terms, const TwoLayerTree& tree,
                               const DependenceParams& params, std::span<const int> variables,
                               GammaCache& cache);

double partial_v_derivative(std::span<const double> m, const TwoLayerTree& tree,
                            const DependenceParams& params, std::span<const int> variables);

/// Log of the single-observation density via the beta recursion.
double log_density_from_terms(const ExponentTerms& terms, const TwoLayerTree& tree,
                              const DependenceParams& params, const BetaTable& table);
double log_density_recursive(std::span<const double> m, const TwoLayerTree& tree,
                             const DependenceParams& params);

/// Log density as exp(-V) * sum over all B_D partitions of prod(-dV_S).
/// Reference evaluator; refuses D > cap with std::out_of_range.
double log_density_bruteforce(std::span<const double> m, const TwoLayerTree& tree,
                              const DependenceParams& params, int cap = kDefaultEnumerationCap);

/// One row of the occurrence-conditioned likelihood: -V + sum_S log(-dV_S).
double stephenson_tawn_row(std::span<const double> m, const TwoLayerTree& partition,
                           const TwoLayerTree& tree, const DependenceParams& params);

/// Sum of stephenson_tawn_row over the dataset. Requires partitions.
double stephenson_tawn_loglik(const MaximaDataset& data, const TwoLayerTree& tree,
                              const DependenceParams& params);

enum class LikelihoodKind { recursive, stephenson_tawn, flat };

std::string to_string(LikelihoodKind kind);
/// Accepts "recursive", "stephenson-tawn" and "flat".
LikelihoodKind parse_likelihood_kind(std::string_view text);

/// Dataset log-likelihood as a function of (tree, params). The flat kind
/// returns 0 everywhere and exists for prior-recovery checks.
class LogLikelihood {
 public:
  LogLikelihood(MaximaDataset data, LikelihoodKind kind);

  double operator()(const TwoLayerTree& tree, const DependenceParams& params) const;

  const MaximaDataset& data() const { return data_; }
  LikelihoodKind kind() const { return kind_; }

 private:
  double recursive(const TwoLayerTree& tree, const DependenceParams& params) const;
  double stephenson_tawn(const TwoLayerTree& tree, const DependenceParams& params) const;

  MaximaDataset data_;
  LikelihoodKind kind_;
  std::vector<double> log_values_;
};

}  // namespace nestlog
