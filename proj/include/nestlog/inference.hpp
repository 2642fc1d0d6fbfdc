#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "nestlog/likelihood.hpp"
#include "nestlog/model.hpp"
#include "nestlog/rng.hpp"
#include "nestlog/tree.hpp"

namespace nestlog {

/// Log-likelihood of the data as a function of (tree, params).
using LogTarget = std::function<double(const TwoLayerTree&, const DependenceParams&)>;

/// Random-walk settings shared by both samplers.
struct ProposalConfig {
  /// Half-width used for every slot that has no explicit entry below.
  double initial_epsilon = 0.1;
  /// Optional per-slot starting half-widths (slot 0 is alpha0).
  std::vector<double> epsilons;
  double band_low = 0.20;
  double band_high = 0.50;
  std::size_t adapt_period = 100;
  /// Adaptation runs only while iteration <= burnin; the widths are frozen
  /// afterwards.
  std::size_t burnin = 0;
  bool adapt = true;

  /// Throws std::invalid_argument on non-positive widths or a bad band.
  void validate() const;
  double epsilon_for(std::size_t slot) const;
};

/// Reversible-jump settings for the tree-mixture sampler.
struct RjConfig {
  double eta = 0.4;
  /// Probabilities of split, merge and swap.
  std::array<double, 3> move_probabilities{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
  std::size_t iterations = 15000;
  std::size_t burnin = 3000;

  void validate() const;
};

enum class MoveType { mh, split, merge, swap };

std::string to_string(MoveType move);
MoveType parse_move_type(std::string_view text);

struct ModelState {
  TwoLayerTree tree;
  DependenceParams params;

  friend bool operator==(const ModelState&, const ModelState&) = default;
};

/// Builds a canonical state from clusters paired with their alphas; the
/// alphas follow their clusters through canonical reordering.
ModelState make_state(double alpha0, std::vector<std::pair<std::vector<int>, double>> clusters);

struct TraceRecord {
  std::size_t iter = 0;
  TwoLayerTree tree;
  DependenceParams params;
  double log_post = 0.0;
  MoveType move = MoveType::mh;
  bool accepted = false;
};

/// Run configuration stored next to the records.
struct ChainHeader {
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::size_t burnin = 0;
  double eta = 0.4;
  LikelihoodKind likelihood = LikelihoodKind::recursive;
  int dimension = 0;
  std::vector<std::string> names;
  /// "fixed-tree" or "tree-mixture".
  std::string mode = "tree-mixture";
};

struct ChainTrace {
  ChainHeader header;
  std::vector<TraceRecord> records;
};

/// 0.5 * point mass at 1 + 0.5 * Uniform(0, 1) for every parameter. Both the
/// atom and the interior contribute log 0.5 (mass and density with respect
/// to point mass + Lebesgue measure). Any entry outside (0, 1] gives -inf.
double log_prior(const DependenceParams& params);
double log_prior_alpha(double alpha);

struct AlphaProposal {
  double value = 1.0;
  double log_q_forward = 0.0;
  double log_q_reverse = 0.0;
};

/// Log proposal mass/density of moving from `from` to `to` with half-width
/// epsilon; -inf when `to` is unreachable.
double log_proposal_density(double from, double to, double epsilon);

/// Uniform window [max(0, c - eps), min(c + eps, 1)], mixed half and half
/// with a point mass at 1 whenever c != 1 and the window reaches 1.
AlphaProposal propose_alpha(double current, double epsilon, Rng& rng);

struct MoveProposal {
  bool feasible = false;
  ModelState state;
  double log_q_forward = 0.0;
  double log_q_reverse = 0.0;
  double log_jacobian = 0.0;
  /// Parameter and auxiliary counts on each side of the move; equal for
  /// every feasible proposal.
  std::size_t dim_current = 0;
  std::size_t dim_proposed = 0;
};

/// Number of non-trivial unordered bipartitions of a set of `size` items.
std::uint64_t bipartition_count(int size);

/// Deterministic split: cluster `k` is cut into members selected by `mask`
/// (bit b refers to the b-th member, bit 0 must be clear so the smallest
/// member stays on the first side) and the rest; the side holding the
/// smallest member gets alpha + u, the other alpha - u.
MoveProposal split_with(const ModelState& state, int k, std::uint64_t mask, double u, double eta);
/// Deterministic merge of clusters k1 < k2.
MoveProposal merge_with(const ModelState& state, int k1, int k2, double eta);
/// Deterministic swap of 1-based `variable` into cluster `destination`.
MoveProposal swap_with(const ModelState& state, int variable, int destination);

MoveProposal rj_split(const ModelState& state, double eta, Rng& rng);
MoveProposal rj_merge(const ModelState& state, double eta, Rng& rng);
MoveProposal rj_swap(const ModelState& state, Rng& rng);

/// Fixed-tree random-walk Metropolis-Hastings with single-site updates.
/// Records one entry per sweep (iterations 1..R).
ChainTrace mh_fixed_tree(const LogTarget& loglik, const TwoLayerTree& tree,
                         const DependenceParams& init, const ProposalConfig& config, std::size_t iterations,
                         Rng& rng);

/// Reversible-jump tree-mixture sampler started from the single cluster
/// with all parameters at 0.5. Each iteration makes one split/merge/swap
/// attempt followed by one within-tree sweep.
ChainTrace tm_mcmc(const LogTarget& loglik, int dimension, const RjConfig& rj,
                   const ProposalConfig& proposal, Rng& rng);

/// Convenience wrapper binding a LogLikelihood.
LogTarget make_target(const LogLikelihood& loglik);

}  // namespace nestlog
