#include "nestlog/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace nestlog {

namespace {

// Dense storage over i_k in 0..dims[k] (and j in 0..j_extent-1). Entries
// outside the admissible ranges stay zero, so the recurrences can read
// neighbours without range checks.
struct DenseLayout {
  std::vector<int> dims;
  std::vector<std::size_t> stride;
  std::size_t j_extent = 1;
  std::size_t total = 0;

  DenseLayout(std::span<const int> sizes, std::size_t j_ext) : dims(sizes.begin(), sizes.end()), j_extent(j_ext) {
    stride.resize(dims.size());
    std::size_t s = j_extent;
    for (std::size_t k = dims.size(); k-- > 0;) {
      stride[k] = s;
      s *= static_cast<std::size_t>(dims[k] + 1);
    }
    total = s;
  }

  std::size_t index(std::span<const int> i, int j) const {
    std::size_t idx = static_cast<std::size_t>(j);
    for (std::size_t k = 0; k < i.size(); ++k) idx += static_cast<std::size_t>(i[k]) * stride[k];
    return idx;
  }
};

// Calls f(i) for every tuple with lo[k] <= i[k] <= hi[k], last index fastest.
template <class F>
void for_each_tuple(std::span<const int> lo, std::span<const int> hi, F&& f) {
  const std::size_t n = lo.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (lo[k] > hi[k]) return;
  }
  std::vector<int> i(lo.begin(), lo.end());
  while (true) {
    f(std::span<const int>(i));
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (i[k] < hi[k]) {
        ++i[k];
        for (std::size_t r = k + 1; r < n; ++r) i[r] = lo[r];
        break;
      }
      if (k == 0) return;
    }
    if (n == 0) return;
  }
}

int tuple_sum(std::span<const int> i) { return std::accumulate(i.begin(), i.end(), 0); }

void check_shape(std::span<const int> sizes, const DependenceParams& params, const char* who) {
  if (sizes.empty()) throw std::invalid_argument(std::string(who) + ": empty shape");
  if (sizes.size() != params.cluster_count()) {
    throw std::invalid_argument(std::string(who) + ": shape and params disagree on cluster count");
  }
  for (int d : sizes) {
    if (d < 1) throw std::invalid_argument(std::string(who) + ": cluster sizes must be >= 1");
  }
}

SignedLog combine3(SignedLog a, SignedLog b, double cb, SignedLog c, double cc) {
  SignedLogSum acc;
  acc.add(a);
  acc.add(b.scaled(cb));
  acc.add(c.scaled(cc));
  return acc.result();
}

}  // namespace

BetaTable BetaTable::build(std::span<const int> cluster_sizes, const DependenceParams& params) {
  check_shape(cluster_sizes, params, "build_beta_table");
  const std::size_t k_count = cluster_sizes.size();
  const int total_dim = tuple_sum(cluster_sizes);
  const DenseLayout layout(cluster_sizes, static_cast<std::size_t>(total_dim) + 1);
  const double inv_a0 = 1.0 / params.alpha0;

  std::vector<SignedLog> cur(layout.total), next(layout.total);
  std::vector<int> origin(k_count, 0);
  cur[layout.index(origin, 0)] = {0.0, 1};

  BetaTable table;
  table.shape_.assign(cluster_sizes.begin(), cluster_sizes.end());
  table.stage_counts_.assign(k_count, 0);

  std::vector<int> d(k_count, 0);
  std::vector<int> lo(k_count), hi(k_count), shifted(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double a_k = params.alphas[k];
    for (int step = 0; step < cluster_sizes[k]; ++step) {
      std::fill(next.begin(), next.end(), SignedLog{});
      const int dk = d[k];
      for (std::size_t m = 0; m < k_count; ++m) {
        lo[m] = m <= k ? 1 : 0;
        hi[m] = m < k ? d[m] : (m == k ? dk + 1 : 0);
      }
      std::size_t computed = 0;
      for_each_tuple(lo, hi, [&](std::span<const int> i) {
        const int s = tuple_sum(i);
        std::copy(i.begin(), i.end(), shifted.begin());
        --shifted[k];
        const double grow_vk = -inv_a0 * (i[k] - dk / a_k);
        for (int j = 1; j <= s; ++j) {
          next[layout.index(i, j)] =
              combine3(cur[layout.index(shifted, j - 1)], cur[layout.index(i, j)], grow_vk,
                       cur[layout.index(shifted, j)], -(j - (s - 1) * inv_a0));
          ++computed;
        }
      });
      table.stage_counts_[k] += computed;
      std::swap(cur, next);
      ++d[k];
    }
  }

  std::vector<int> ones(k_count, 1);
  for_each_tuple(ones, cluster_sizes, [&](std::span<const int> i) {
    const int s = tuple_sum(i);
    for (int j = 1; j <= s; ++j) {
      table.indices_.insert(table.indices_.end(), i.begin(), i.end());
      table.j_.push_back(j);
      table.coef_.push_back(cur[layout.index(i, j)]);
    }
  });
  return table;
}

SignedLog BetaTable::coefficient(std::span<const int> i, int j) const {
  if (i.size() != shape_.size()) throw std::invalid_argument("beta: index arity mismatch");
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (i[k] < 1 || i[k] > shape_[k]) return {};
  }
  if (j < 1 || j > tuple_sum(i)) return {};
  // Terms are stored in the same row-major order used by build().
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    if (j_[t] == j && std::equal(i.begin(), i.end(), term_indices(t).begin())) return coef_[t];
  }
  return {};
}

std::size_t BetaTable::computed_count() const {
  return std::accumulate(stage_counts_.begin(), stage_counts_.end(), std::size_t{0});
}

GammaTable GammaTable::build(std::span<const int> subset_sizes, const DependenceParams& params) {
  check_shape(subset_sizes, params, "build_gamma_table");
  const std::size_t k_count = subset_sizes.size();
  const DenseLayout layout(subset_sizes, 1);
  const double inv_a0 = 1.0 / params.alpha0;

  std::vector<SignedLog> cur(layout.total), next(layout.total);
  std::vector<int> origin(k_count, 0);
  cur[layout.index(origin, 0)] = {0.0, 1};

  GammaTable table;
  table.shape_.assign(subset_sizes.begin(), subset_sizes.end());
  table.stage_counts_.assign(k_count, 0);

  std::vector<int> d(k_count, 0);
  std::vector<int> lo(k_count), hi(k_count), shifted(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    const double a_k = params.alphas[k];
    for (int step = 0; step < subset_sizes[k]; ++step) {
      std::fill(next.begin(), next.end(), SignedLog{});
      const int dk = d[k];
      for (std::size_t m = 0; m < k_count; ++m) {
        lo[m] = m <= k ? 1 : 0;
        hi[m] = m < k ? d[m] : (m == k ? dk + 1 : 0);
      }
      std::size_t computed = 0;
      for_each_tuple(lo, hi, [&](std::span<const int> i) {
        const int s = tuple_sum(i);
        std::copy(i.begin(), i.end(), shifted.begin());
        --shifted[k];
        SignedLogSum acc;
        acc.add(cur[layout.index(i, 0)].scaled(-inv_a0 * (i[k] - dk / a_k)));
        acc.add(cur[layout.index(shifted, 0)].scaled(-(1.0 - (s - 1) * inv_a0)));
        next[layout.index(i, 0)] = acc.result();
        ++computed;
      });
      table.stage_counts_[k] += computed;
      std::swap(cur, next);
      ++d[k];
    }
  }

  std::vector<int> ones(k_count, 1);
  for_each_tuple(ones, subset_sizes, [&](std::span<const int> i) {
    table.indices_.insert(table.indices_.end(), i.begin(), i.end());
    table.coef_.push_back(cur[layout.index(i, 0)]);
  });
  return table;
}

SignedLog GammaTable::coefficient(std::span<const int> i) const {
  if (i.size() != shape_.size()) throw std::invalid_argument("gamma: index arity mismatch");
  for (std::size_t k = 0; k < i.size(); ++k) {
    if (i[k] < 1 || i[k] > shape_[k]) return {};
  }
  for (std::size_t t = 0; t < coef_.size(); ++t) {
    if (std::equal(i.begin(), i.end(), term_indices(t).begin())) return coef_[t];
  }
  return {};
}

BetaTable build_beta_table(std::span<const int> cluster_sizes, const DependenceParams& params) {
  return BetaTable::build(cluster_sizes, params);
}

GammaTable build_gamma_table(std::span<const int> subset_sizes, const DependenceParams& params) {
  return GammaTable::build(subset_sizes, params);
}

std::size_t beta_stage_count_closed_form(std::span<const int> sizes) {
  if (sizes.empty()) throw std::invalid_argument("beta_stage_count_closed_form: empty shape");
  const std::size_t last = sizes.size() - 1;
  const auto dl = static_cast<std::size_t>(sizes[last]);
  std::size_t prefix = 1;
  for (std::size_t k = 0; k < last; ++k) prefix *= static_cast<std::size_t>(sizes[k]);
  std::size_t count = prefix * dl * (dl + 1) * (dl + 2) / 6;
  for (std::size_t m = 0; m < last; ++m) {
    std::size_t others = 1;
    for (std::size_t k = 0; k < last; ++k) {
      if (k != m) others *= static_cast<std::size_t>(sizes[k]);
    }
    const auto dm = static_cast<std::size_t>(sizes[m]);
    count += others * (dm * (dm + 1) / 2) * (dl * (dl + 1) / 2);
  }
  return count;
}

const GammaTable& GammaCache::get(const std::vector<std::pair<int, int>>& key, const DependenceParams& params) {
  auto it = tables_.find(key);
  if (it != tables_.end()) return it->second;
  std::vector<int> sizes;
  std::vector<double> alphas;
  for (const auto& [cluster, d] : key) {
    sizes.push_back(d);
    alphas.push_back(params.alphas[static_cast<std::size_t>(cluster)]);
  }
  const DependenceParams sub(params.alpha0, std::move(alphas));
  return tables_.emplace(key, GammaTable::build(sizes, sub)).first->second;
}

namespace {

// Sum of a small set of terms in ascending order, so the result does not
// depend on variable labelling.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

std::vector<double> logs_of(std::span<const double> m) {
  std::vector<double> out;
  out.reserve(m.size());
  for (double x : m) {
    if (!(x > 0.0) || !std::isfinite(x)) throw std::domain_error("maxima must be finite and positive");
    out.push_back(std::log(x));
  }
  return out;
}

void check_row(std::span<const double> m, const TwoLayerTree& tree, const DependenceParams& params) {
  check_consistent(tree, params);
  if (m.size() != static_cast<std::size_t>(tree.dimension())) {
    throw std::invalid_argument("row length does not match tree dimension");
  }
}

}  // namespace

SignedLog partial_v_from_terms(const ExponentTerms& terms, const TwoLayerTree& tree,
                               const DependenceParams& params, std::span<const int> variables,
                               GammaCache& cache) {
  if (variables.empty()) throw std::invalid_argument("partial_v_derivative: empty subset");
  const int k_count = tree.cluster_count();
  std::vector<int> counts(static_cast<std::size_t>(k_count), 0);
  std::vector<double> prefactor_terms;
  prefactor_terms.reserve(variables.size());
  std::vector<char> seen(static_cast<std::size_t>(tree.dimension()) + 1, 0);
  for (int v : variables) {
    if (v < 1 || v > tree.dimension() || seen[static_cast<std::size_t>(v)]) {
      throw std::invalid_argument("partial_v_derivative: subset must hold distinct variables in 1..D");
    }
    seen[static_cast<std::size_t>(v)] = 1;
    const int k = tree.cluster_of(v);
    ++counts[static_cast<std::size_t>(k)];
    const double exponent = -1.0 / params.within(static_cast<std::size_t>(k)) - 1.0;
    prefactor_terms.push_back(exponent * terms.log_z[static_cast<std::size_t>(v - 1)]);
  }
  std::vector<std::pair<int, int>> key;
  for (int k = 0; k < k_count; ++k) {
    if (counts[static_cast<std::size_t>(k)] > 0) key.emplace_back(k, counts[static_cast<std::size_t>(k)]);
  }
  const GammaTable& table = cache.get(key, params);

  const double inv_a0 = 1.0 / params.alpha0;
  SignedLogSum sum;
  for (std::size_t t = 0; t < table.size(); ++t) {
    const SignedLog c = table.term_coefficient(t);
    if (c.is_zero()) continue;
    const auto i = table.term_indices(t);
    double log_term = c.log_abs;
    int total = 0;
    for (std::size_t s = 0; s < key.size(); ++s) {
      const auto k = static_cast<std::size_t>(key[s].first);
      log_term += (i[s] - key[s].second / params.alphas[k]) * terms.log_vk[k];
      total += i[s];
    }
    log_term += (1.0 - total * inv_a0) * terms.log_v;
    sum.add(log_term, c.sign);
  }
  SignedLog out = sum.result();
  if (!out.is_zero()) out.log_abs += sorted_sum(prefactor_terms);
  return out;
}

double partial_v_derivative(std::span<const double> m, const TwoLayerTree& tree,
                            const DependenceParams& params, std::span<const int> variables) {
  check_row(m, tree, params);
  const auto terms = exponent_terms(logs_of(m), tree, params);
  GammaCache cache;
  return partial_v_from_terms(terms, tree, params, variables, cache).value();
}

double log_density_from_terms(const ExponentTerms& terms, const TwoLayerTree& tree,
                              const DependenceParams& params, const BetaTable& table) {
  const int k_count = tree.cluster_count();
  const double inv_a0 = 1.0 / params.alpha0;
  std::vector<double> prefactor_terms;
  prefactor_terms.reserve(terms.log_z.size());
  for (int k = 0; k < k_count; ++k) {
    const double exponent = -1.0 / params.within(static_cast<std::size_t>(k)) - 1.0;
    for (int v : tree.cluster(k)) prefactor_terms.push_back(exponent * terms.log_z[static_cast<std::size_t>(v - 1)]);
  }
  SignedLogSum sum;
  for (std::size_t t = 0; t < table.size(); ++t) {
    const SignedLog c = table.term_coefficient(t);
    if (c.is_zero()) continue;
    const auto i = table.term_indices(t);
    double log_term = c.log_abs;
    int total = 0;
    for (int k = 0; k < k_count; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      log_term += (i[ku] - tree.cluster_size(k) / params.alphas[ku]) * terms.log_vk[ku];
      total += i[ku];
    }
    log_term += (table.term_j(t) - total * inv_a0) * terms.log_v;
    sum.add(log_term, c.sign);
  }
  const SignedLog s = sum.result();
  if (s.sign <= 0) throw std::logic_error("recursive density: non-positive coefficient sum");
  return -std::exp(terms.log_v) + sorted_sum(prefactor_terms) + s.log_abs;
}

double log_density_recursive(std::span<const double> m, const TwoLayerTree& tree,
                             const DependenceParams& params) {
  check_row(m, tree, params);
  const auto terms = exponent_terms(logs_of(m), tree, params);
  const auto sizes = tree.cluster_sizes();
  const BetaTable table = BetaTable::build(sizes, params);
  return log_density_from_terms(terms, tree, params, table);
}

double log_density_bruteforce(std::span<const double> m, const TwoLayerTree& tree,
                              const DependenceParams& params, int cap) {
  check_row(m, tree, params);
  const auto partitions = enumerate_trees(tree.dimension(), cap);
  const auto terms = exponent_terms(logs_of(m), tree, params);
  GammaCache cache;
  SignedLogSum total;
  for (const auto& partition : partitions) {
    double log_prod = 0.0;
    int sign = 1;
    for (const auto& block : partition.clusters()) {
      const SignedLog dv = partial_v_from_terms(terms, tree, params, block, cache);
      log_prod += dv.log_abs;
      sign *= -dv.sign;
    }
    total.add(log_prod, sign);
  }
  const SignedLog s = total.result();
  if (s.sign <= 0) throw std::logic_error("brute-force density: non-positive partition sum");
  return -std::exp(terms.log_v) + s.log_abs;
}

namespace {

double stephenson_tawn_from_terms(const ExponentTerms& terms, const TwoLayerTree& partition,
                                  const TwoLayerTree& tree, const DependenceParams& params,
                                  GammaCache& cache) {
  std::vector<double> contributions;
  contributions.reserve(static_cast<std::size_t>(partition.cluster_count()));
  for (const auto& block : partition.clusters()) {
    const SignedLog dv = partial_v_from_terms(terms, tree, params, block, cache);
    if (dv.is_zero()) return kNegInf;
    if (dv.sign > 0) throw std::logic_error("stephenson-tawn: positive partial derivative of V");
    contributions.push_back(dv.log_abs);
  }
  return -std::exp(terms.log_v) + sorted_sum(contributions);
}

}  // namespace

double stephenson_tawn_row(std::span<const double> m, const TwoLayerTree& partition,
                           const TwoLayerTree& tree, const DependenceParams& params) {
  check_row(m, tree, params);
  if (partition.dimension() != tree.dimension()) {
    throw std::invalid_argument("stephenson-tawn: partition dimension mismatch");
  }
  const auto terms = exponent_terms(logs_of(m), tree, params);
  GammaCache cache;
  return stephenson_tawn_from_terms(terms, partition, tree, params, cache);
}

double stephenson_tawn_loglik(const MaximaDataset& data, const TwoLayerTree& tree,
                              const DependenceParams& params) {
  if (!data.has_partitions()) throw std::invalid_argument("stephenson-tawn: dataset has no partitions");
  check_consistent(tree, params);
  GammaCache cache;
  double total = 0.0;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const auto terms = exponent_terms(logs_of(data.row(i)), tree, params);
    total += stephenson_tawn_from_terms(terms, data.partition(i), tree, params, cache);
  }
  return total;
}

std::string to_string(LikelihoodKind kind) {
  switch (kind) {
    case LikelihoodKind::recursive: return "recursive";
    case LikelihoodKind::stephenson_tawn: return "stephenson-tawn";
    case LikelihoodKind::flat: return "flat";
  }
  return "recursive";
}

LikelihoodKind parse_likelihood_kind(std::string_view text) {
  if (text == "recursive") return LikelihoodKind::recursive;
  if (text == "stephenson-tawn") return LikelihoodKind::stephenson_tawn;
  if (text == "flat") return LikelihoodKind::flat;
  throw std::invalid_argument("unknown likelihood '" + std::string(text) + "'");
}

LogLikelihood::LogLikelihood(MaximaDataset data, LikelihoodKind kind) : data_(std::move(data)), kind_(kind) {
  if (kind_ == LikelihoodKind::stephenson_tawn && !data_.has_partitions()) {
    throw std::invalid_argument("stephenson-tawn likelihood needs occurrence partitions");
  }
  log_values_ = logs_of(data_.values());
}

double LogLikelihood::operator()(const TwoLayerTree& tree, const DependenceParams& params) const {
  check_consistent(tree, params);
  if (tree.dimension() != static_cast<int>(data_.cols())) {
    throw std::invalid_argument("likelihood: tree dimension does not match data");
  }
  switch (kind_) {
    case LikelihoodKind::recursive: return recursive(tree, params);
    case LikelihoodKind::stephenson_tawn: return stephenson_tawn(tree, params);
    case LikelihoodKind::flat: return 0.0;
  }
  return 0.0;
}

double LogLikelihood::recursive(const TwoLayerTree& tree, const DependenceParams& params) const {
  const auto sizes = tree.cluster_sizes();
  const BetaTable table = BetaTable::build(sizes, params);
  const std::size_t cols = data_.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < data_.rows(); ++i) {
    const std::span<const double> row(log_values_.data() + i * cols, cols);
    total += log_density_from_terms(exponent_terms(row, tree, params), tree, params, table);
  }
  return total;
}

double LogLikelihood::stephenson_tawn(const TwoLayerTree& tree, const DependenceParams& params) const {
  GammaCache cache;
  const std::size_t cols = data_.cols();
  double total = 0.0;
  for (std::size_t i = 0; i < data_.rows(); ++i) {
    const std::span<const double> row(log_values_.data() + i * cols, cols);
    const auto terms = exponent_terms(row, tree, params);
    total += stephenson_tawn_from_terms(terms, data_.partition(i), tree, params, cache);
    if (total == kNegInf) return total;
  }
  return total;
}

}  // namespace nestlog
