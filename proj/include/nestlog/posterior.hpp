#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nestlog/inference.hpp"
#include "nestlog/model.hpp"
#include "nestlog/rng.hpp"
#include "nestlog/tree.hpp"

namespace nestlog {

/// Marginal posterior summary of one parameter over a sub-chain.
struct ParamSummary {
  double median = 0.0;
  /// Equal-tailed 95% interval.
  double lo = 0.0;
  double hi = 0.0;
  /// Fraction of records sitting exactly at 1.
  double spike = 0.0;
};

struct TreeSummary {
  TwoLayerTree tree;
  double prob = 0.0;
  std::size_t count = 0;
  ParamSummary alpha0;
  std::vector<ParamSummary> alphas;
  /// Summary of alpha0 * alphas[k]: the within-cluster dependence, which is
  /// what the likelihood identifies (for a singleton it is not identified).
  std::vector<ParamSummary> within;
};

struct PosteriorSummary {
  /// Sorted by decreasing probability; ties broken by canonical tree order.
  std::vector<TreeSummary> trees;
  std::size_t n_records = 0;

  /// Throws std::logic_error when empty.
  const TreeSummary& modal() const;
  double prob(const TwoLayerTree& tree) const;
};

/// Tree visit frequencies and per-tree parameter summaries over the records
/// with iter > burnin. Throws std::invalid_argument when nothing is left.
PosteriorSummary summarize(const ChainTrace& trace, std::size_t burnin);

/// Same, pooling several chains (each with its own burn-in removed).
PosteriorSummary summarize(std::span<const ChainTrace> traces, std::size_t burnin);

/// Posterior predictive draws: for every draw a post-burn-in record is chosen
/// uniformly and one nested logistic vector is simulated under it. With a
/// single record no index is drawn, so the output equals
/// sample_nested_logistic under that record for the same generator state.
MaximaDataset bma_predict(const ChainTrace& trace, std::size_t burnin, std::size_t count, Rng& rng);

/// Type-7 empirical quantiles. Throws std::invalid_argument for empty
/// samples or probabilities that are not strictly increasing in [0, 1].
std::vector<double> quantile_curve(std::span<const double> samples, std::span<const double> probs);

}  // namespace nestlog
