#include "nestlog/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "nestlog/numeric.hpp"

namespace nestlog {

namespace {

const double kLogHalf = -std::numbers::ln2;

// Slack on the reverse-split window so that a merge of a freshly split pair
// is never rejected because of the last bit of (a1 - a2) / 2.
constexpr double kWindowSlack = 1e-12;

double split_window(double alpha, double eta) { return std::min({eta, alpha, 1.0 - alpha}); }

std::size_t uniform_index(std::size_t count, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, count - 1);
  return pick(rng);
}

double log_choose2(std::size_t n) {
  return std::log(static_cast<double>(n) * static_cast<double>(n - 1) / 2.0);
}

std::size_t splittable_count(const TwoLayerTree& tree) {
  std::size_t n = 0;
  for (const auto& c : tree.clusters()) n += c.size() >= 2 ? 1 : 0;
  return n;
}

std::size_t swap_eligible_count(const TwoLayerTree& tree) {
  std::size_t n = 0;
  for (const auto& c : tree.clusters()) n += c.size() >= 2 ? c.size() : 0;
  return n;
}

std::vector<std::pair<std::vector<int>, double>> paired_clusters(const ModelState& state) {
  std::vector<std::pair<std::vector<int>, double>> out;
  for (int k = 0; k < state.tree.cluster_count(); ++k) {
    out.emplace_back(state.tree.cluster(k), state.params.alphas[static_cast<std::size_t>(k)]);
  }
  return out;
}

// Epsilon slot of parameter p: one slot per parameter for a fixed tree,
// alpha0 plus one shared slot for cluster parameters when K changes.
std::size_t slot_of(std::size_t p, bool shared) { return shared ? std::min<std::size_t>(p, 1) : p; }

class Adapter {
 public:
  Adapter(const ProposalConfig& config, std::size_t slots) : config_(config), eps_(slots), acc_(slots), att_(slots) {
    for (std::size_t s = 0; s < slots; ++s) eps_[s] = config.epsilon_for(s);
  }

  double epsilon(std::size_t slot) const { return eps_[slot]; }

  void record(std::size_t slot, bool accepted) {
    ++att_[slot];
    acc_[slot] += accepted ? 1 : 0;
  }

  void end_iteration(std::size_t iter) {
    if (!config_.adapt || iter > config_.burnin || iter % config_.adapt_period != 0) return;
    for (std::size_t s = 0; s < eps_.size(); ++s) {
      if (att_[s] == 0) continue;
      const double rate = static_cast<double>(acc_[s]) / static_cast<double>(att_[s]);
      if (rate > config_.band_high) eps_[s] *= 1.5;
      if (rate < config_.band_low) eps_[s] *= 0.67;
      eps_[s] = std::clamp(eps_[s], 1e-4, 1.0);
      acc_[s] = 0;
      att_[s] = 0;
    }
  }

 private:
  const ProposalConfig& config_;
  std::vector<double> eps_;
  std::vector<std::size_t> acc_;
  std::vector<std::size_t> att_;
};

struct Current {
  ModelState state;
  double log_lik = 0.0;
  double log_post = 0.0;
};

bool accept(double log_ratio, Rng& rng) {
  if (std::isnan(log_ratio)) throw std::logic_error("acceptance ratio is NaN");
  if (log_ratio >= 0.0) return true;
  return std::log(uniform_open(rng)) < log_ratio;
}

// One single-site update per parameter; returns whether any move was taken.
bool mh_sweep(const LogTarget& loglik, Current& cur, Adapter& adapter, bool shared_slots, Rng& rng) {
  bool any = false;
  for (std::size_t p = 0; p < cur.state.params.size(); ++p) {
    const std::size_t slot = slot_of(p, shared_slots);
    const double old_value = cur.state.params.get(p);
    const AlphaProposal prop = propose_alpha(old_value, adapter.epsilon(slot), rng);
    bool ok = false;
    if (in_unit_interval(prop.value)) {
      DependenceParams candidate = cur.state.params;
      candidate.set(p, prop.value);
      const double ll = loglik(cur.state.tree, candidate);
      const double lp = ll + log_prior(candidate);
      const double log_ratio = lp - cur.log_post + prop.log_q_reverse - prop.log_q_forward;
      if (lp != kNegInf && accept(log_ratio, rng)) {
        cur.state.params = std::move(candidate);
        cur.log_lik = ll;
        cur.log_post = lp;
        ok = true;
      }
    }
    // Moves off the atom are accepted with probability of order epsilon
    // whatever the target, so they would drag the width towards the floor;
    // only attempts from interior values steer the adaptation.
    if (old_value != 1.0) adapter.record(slot, ok);
    any = any || ok;
  }
  return any;
}

Current initial_state(const LogTarget& loglik, ModelState state) {
  const double ll = loglik(state.tree, state.params);
  const double lp = ll + log_prior(state.params);
  if (!std::isfinite(lp)) throw std::runtime_error("log posterior is not finite at the initial state");
  return {std::move(state), ll, lp};
}

}  // namespace

void ProposalConfig::validate() const {
  if (!(initial_epsilon > 0.0)) throw std::invalid_argument("proposal: epsilon must be positive");
  for (double e : epsilons) {
    if (!(e > 0.0)) throw std::invalid_argument("proposal: epsilon must be positive");
  }
  if (!(band_low > 0.0 && band_low < band_high && band_high < 1.0)) {
    throw std::invalid_argument("proposal: acceptance band must satisfy 0 < low < high < 1");
  }
  if (adapt_period == 0) throw std::invalid_argument("proposal: adaptation period must be positive");
}

double ProposalConfig::epsilon_for(std::size_t slot) const {
  return slot < epsilons.size() ? epsilons[slot] : initial_epsilon;
}

void RjConfig::validate() const {
  if (!(eta > 0.0 && eta <= 1.0)) throw std::invalid_argument("rj: eta must lie in (0, 1]");
  double total = 0.0;
  for (double p : move_probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("rj: move probabilities must be non-negative");
    total += p;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("rj: move probabilities must sum to 1");
  if (burnin > iterations) throw std::invalid_argument("rj: burn-in exceeds iterations");
}

std::string to_string(MoveType move) {
  switch (move) {
    case MoveType::mh:
      return "mh";
    case MoveType::split:
      return "split";
    case MoveType::merge:
      return "merge";
    case MoveType::swap:
      return "swap";
  }
  return "mh";
}

MoveType parse_move_type(std::string_view text) {
  if (text == "mh") return MoveType::mh;
  if (text == "split") return MoveType::split;
  if (text == "merge") return MoveType::merge;
  if (text == "swap") return MoveType::swap;
  throw std::invalid_argument("unknown move type: " + std::string(text));
}

ModelState make_state(double alpha0, std::vector<std::pair<std::vector<int>, double>> clusters) {
  for (auto& c : clusters) std::sort(c.first.begin(), c.first.end());
  std::sort(clusters.begin(), clusters.end(), [](const auto& a, const auto& b) {
    return a.first.front() < b.first.front();
  });
  std::vector<std::vector<int>> members;
  std::vector<double> alphas;
  for (auto& [m, a] : clusters) {
    members.push_back(std::move(m));
    alphas.push_back(a);
  }
  return {TwoLayerTree::from_clusters(std::move(members)), DependenceParams(alpha0, std::move(alphas))};
}

double log_prior_alpha(double alpha) { return in_unit_interval(alpha) ? kLogHalf : kNegInf; }

double log_prior(const DependenceParams& params) {
  double total = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p) total += log_prior_alpha(params.get(p));
  return total;
}

double log_proposal_density(double from, double to, double epsilon) {
  const double lo = std::max(0.0, from - epsilon);
  const double hi = std::min(from + epsilon, 1.0);
  const bool spike = from != 1.0 && hi >= 1.0;
  if (spike && to == 1.0) return kLogHalf;
  if (to < lo || to > hi) return kNegInf;
  const double log_width = std::log(hi - lo);
  return spike ? kLogHalf - log_width : -log_width;
}

AlphaProposal propose_alpha(double current, double epsilon, Rng& rng) {
  const double lo = std::max(0.0, current - epsilon);
  const double hi = std::min(current + epsilon, 1.0);
  const bool spike = current != 1.0 && hi >= 1.0;
  AlphaProposal out;
  if (spike && uniform_open(rng) < 0.5) {
    out.value = 1.0;
  } else {
    std::uniform_real_distribution<double> window(lo, hi);
    out.value = window(rng);
  }
  out.log_q_forward = log_proposal_density(current, out.value, epsilon);
  out.log_q_reverse = log_proposal_density(out.value, current, epsilon);
  return out;
}

std::uint64_t bipartition_count(int size) {
  if (size < 2 || size > 63) throw std::out_of_range("bipartition count: size must lie in [2, 63]");
  return (std::uint64_t{1} << (size - 1)) - 1;
}

MoveProposal split_with(const ModelState& state, int k, std::uint64_t mask, double u, double eta) {
  MoveProposal out;
  const int K = state.tree.cluster_count();
  if (k < 0 || k >= K) throw std::out_of_range("split: cluster index out of range");
  const auto& members = state.tree.cluster(k);
  const int size = static_cast<int>(members.size());
  if (size < 2) return out;
  if ((mask & 1U) != 0 || mask == 0 || mask > bipartition_count(size) * 2) {
    throw std::invalid_argument("split: mask must select a proper subset without the first member");
  }
  std::vector<int> first;
  std::vector<int> second;
  for (int b = 0; b < size; ++b) {
    ((mask >> b) & 1U ? second : first).push_back(members[static_cast<std::size_t>(b)]);
  }
  if (second.empty()) throw std::invalid_argument("split: mask selects no member");

  const double a = state.params.alphas[static_cast<std::size_t>(k)];
  const bool atom = a == 1.0;
  const double w = split_window(a, eta);
  if (!atom && std::fabs(u) > w) return out;
  const double a_first = atom ? 1.0 : a + u;
  const double a_second = atom ? 1.0 : a - u;
  if (!in_unit_interval(a_first) || !in_unit_interval(a_second)) return out;

  auto clusters = paired_clusters(state);
  clusters[static_cast<std::size_t>(k)] = {first, a_first};
  clusters.emplace_back(second, a_second);
  out.state = make_state(state.params.alpha0, std::move(clusters));

  const double log_u_density = atom ? 0.0 : -std::log(2.0 * w);
  out.log_q_forward = -std::log(static_cast<double>(splittable_count(state.tree))) -
                      std::log(static_cast<double>(bipartition_count(size))) + log_u_density;
  out.log_q_reverse = -log_choose2(static_cast<std::size_t>(K + 1));
  out.log_jacobian = atom ? 0.0 : std::numbers::ln2;
  out.dim_current = state.params.size() + (atom ? 0 : 1);
  out.dim_proposed = out.state.params.size() - (atom ? 1 : 0);
  out.feasible = true;
  return out;
}

MoveProposal merge_with(const ModelState& state, int k1, int k2, double eta) {
  MoveProposal out;
  const int K = state.tree.cluster_count();
  if (K < 2) return out;
  if (k1 < 0 || k2 >= K || k1 >= k2) throw std::out_of_range("merge: need 0 <= k1 < k2 < K");
  const double a1 = state.params.alphas[static_cast<std::size_t>(k1)];
  const double a2 = state.params.alphas[static_cast<std::size_t>(k2)];
  const bool atom = a1 == 1.0 && a2 == 1.0;
  // Splits of a value below 1 never produce an exact 1, so a mixed pair
  // has no reverse move.
  if (!atom && (a1 == 1.0 || a2 == 1.0)) return out;
  const double merged = atom ? 1.0 : 0.5 * (a1 + a2);
  const double u = 0.5 * (a1 - a2);
  const double w = split_window(merged, eta);
  if (!atom && std::fabs(u) > w * (1.0 + kWindowSlack)) return out;

  std::vector<std::pair<std::vector<int>, double>> clusters;
  std::vector<int> joined = state.tree.cluster(k1);
  const auto& other = state.tree.cluster(k2);
  joined.insert(joined.end(), other.begin(), other.end());
  for (int k = 0; k < K; ++k) {
    if (k == k1) {
      clusters.emplace_back(joined, merged);
    } else if (k != k2) {
      clusters.emplace_back(state.tree.cluster(k), state.params.alphas[static_cast<std::size_t>(k)]);
    }
  }
  out.state = make_state(state.params.alpha0, std::move(clusters));

  const int size = static_cast<int>(joined.size());
  const double log_u_density = atom ? 0.0 : -std::log(2.0 * w);
  out.log_q_forward = -log_choose2(static_cast<std::size_t>(K));
  out.log_q_reverse = -std::log(static_cast<double>(splittable_count(out.state.tree))) -
                      std::log(static_cast<double>(bipartition_count(size))) + log_u_density;
  out.log_jacobian = atom ? 0.0 : -std::numbers::ln2;
  out.dim_current = state.params.size() - (atom ? 1 : 0);
  out.dim_proposed = out.state.params.size() + (atom ? 0 : 1);
  out.feasible = true;
  return out;
}

MoveProposal swap_with(const ModelState& state, int variable, int destination) {
  MoveProposal out;
  const int K = state.tree.cluster_count();
  if (K < 2) return out;
  const int source = state.tree.cluster_of(variable);
  if (destination < 0 || destination >= K || destination == source) {
    throw std::out_of_range("swap: destination must be another cluster");
  }
  if (state.tree.cluster_size(source) < 2) return out;
  auto clusters = paired_clusters(state);
  auto& from = clusters[static_cast<std::size_t>(source)].first;
  from.erase(std::find(from.begin(), from.end(), variable));
  clusters[static_cast<std::size_t>(destination)].first.push_back(variable);
  out.state = make_state(state.params.alpha0, std::move(clusters));
  const double log_other = std::log(static_cast<double>(K - 1));
  out.log_q_forward = -std::log(static_cast<double>(swap_eligible_count(state.tree))) - log_other;
  out.log_q_reverse = -std::log(static_cast<double>(swap_eligible_count(out.state.tree))) - log_other;
  out.log_jacobian = 0.0;
  out.dim_current = state.params.size();
  out.dim_proposed = out.state.params.size();
  out.feasible = true;
  return out;
}

MoveProposal rj_split(const ModelState& state, double eta, Rng& rng) {
  std::vector<int> candidates;
  for (int k = 0; k < state.tree.cluster_count(); ++k) {
    if (state.tree.cluster_size(k) >= 2) candidates.push_back(k);
  }
  if (candidates.empty()) return {};
  const int k = candidates[uniform_index(candidates.size(), rng)];
  const auto choices = bipartition_count(state.tree.cluster_size(k));
  std::uniform_int_distribution<std::uint64_t> pick(1, choices);
  // Bit 0 (the smallest member) always stays on the first side.
  const std::uint64_t mask = pick(rng) << 1;
  const double a = state.params.alphas[static_cast<std::size_t>(k)];
  double u = 0.0;
  if (a != 1.0) {
    const double w = split_window(a, eta);
    std::uniform_real_distribution<double> aux(-w, w);
    u = aux(rng);
  }
  return split_with(state, k, mask, u, eta);
}

MoveProposal rj_merge(const ModelState& state, double eta, Rng& rng) {
  const auto K = static_cast<std::size_t>(state.tree.cluster_count());
  if (K < 2) return {};
  std::size_t pair = uniform_index(K * (K - 1) / 2, rng);
  int k1 = 0;
  while (pair >= K - 1 - static_cast<std::size_t>(k1)) {
    pair -= K - 1 - static_cast<std::size_t>(k1);
    ++k1;
  }
  const int k2 = k1 + 1 + static_cast<int>(pair);
  return merge_with(state, k1, k2, eta);
}

MoveProposal rj_swap(const ModelState& state, Rng& rng) {
  const int K = state.tree.cluster_count();
  const std::size_t eligible = swap_eligible_count(state.tree);
  if (K < 2 || eligible == 0) return {};
  std::size_t index = uniform_index(eligible, rng);
  int variable = 0;
  for (const auto& c : state.tree.clusters()) {
    if (c.size() < 2) continue;
    if (index < c.size()) {
      variable = c[index];
      break;
    }
    index -= c.size();
  }
  const int source = state.tree.cluster_of(variable);
  int destination = static_cast<int>(uniform_index(static_cast<std::size_t>(K - 1), rng));
  if (destination >= source) ++destination;
  return swap_with(state, variable, destination);
}

ChainTrace mh_fixed_tree(const LogTarget& loglik, const TwoLayerTree& tree, const DependenceParams& init,
                         const ProposalConfig& config, std::size_t iterations, Rng& rng) {
  config.validate();
  check_consistent(tree, init);
  Current cur = initial_state(loglik, {tree, init});
  Adapter adapter(config, init.size());
  ChainTrace trace;
  trace.header.iterations = iterations;
  trace.header.burnin = config.burnin;
  trace.header.dimension = tree.dimension();
  trace.header.mode = "fixed-tree";
  trace.records.reserve(iterations);
  for (std::size_t iter = 1; iter <= iterations; ++iter) {
    const bool moved = mh_sweep(loglik, cur, adapter, false, rng);
    adapter.end_iteration(iter);
    trace.records.push_back({iter, cur.state.tree, cur.state.params, cur.log_post, MoveType::mh, moved});
  }
  return trace;
}

ChainTrace tm_mcmc(const LogTarget& loglik, int dimension, const RjConfig& rj, const ProposalConfig& proposal,
                   Rng& rng) {
  rj.validate();
  proposal.validate();
  ProposalConfig tuning = proposal;
  tuning.burnin = rj.burnin;
  Current cur = initial_state(loglik, {TwoLayerTree::single_cluster(dimension), DependenceParams(0.5, {0.5})});
  Adapter adapter(tuning, 2);
  ChainTrace trace;
  trace.header.iterations = rj.iterations;
  trace.header.burnin = rj.burnin;
  trace.header.eta = rj.eta;
  trace.header.dimension = dimension;
  trace.header.mode = "tree-mixture";
  trace.records.reserve(rj.iterations);
  std::discrete_distribution<int> pick_move(rj.move_probabilities.begin(), rj.move_probabilities.end());
  const auto& pm = rj.move_probabilities;
  for (std::size_t iter = 1; iter <= rj.iterations; ++iter) {
    const int choice = pick_move(rng);
    MoveProposal prop;
    MoveType move = MoveType::swap;
    double log_move_ratio = 0.0;
    if (choice == 0) {
      move = MoveType::split;
      prop = rj_split(cur.state, rj.eta, rng);
      log_move_ratio = std::log(pm[1]) - std::log(pm[0]);
    } else if (choice == 1) {
      move = MoveType::merge;
      prop = rj_merge(cur.state, rj.eta, rng);
      log_move_ratio = std::log(pm[0]) - std::log(pm[1]);
    } else {
      prop = rj_swap(cur.state, rng);
    }
    bool accepted = false;
    if (prop.feasible) {
      if (prop.dim_current != prop.dim_proposed) {
        throw std::logic_error("reversible jump: dimension matching violated");
      }
      const double ll = loglik(prop.state.tree, prop.state.params);
      const double lp = ll + log_prior(prop.state.params);
      const double log_ratio =
          lp - cur.log_post + prop.log_q_reverse - prop.log_q_forward + prop.log_jacobian + log_move_ratio;
      if (lp != kNegInf && accept(log_ratio, rng)) {
        cur.state = std::move(prop.state);
        cur.log_lik = ll;
        cur.log_post = lp;
        accepted = true;
      }
    }
    mh_sweep(loglik, cur, adapter, true, rng);
    adapter.end_iteration(iter);
    trace.records.push_back({iter, cur.state.tree, cur.state.params, cur.log_post, move, accepted});
  }
  return trace;
}

LogTarget make_target(const LogLikelihood& loglik) {
  return [&loglik](const TwoLayerTree& tree, const DependenceParams& params) { return loglik(tree, params); };
}

}  // namespace nestlog
