#include "nestlog/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "nestlog/simulate.hpp"

namespace nestlog {

namespace {

double quantile_sorted(std::span<const double> sorted, double p) {
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

ParamSummary summarize_values(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  ParamSummary out;
  out.median = quantile_sorted(values, 0.5);
  out.lo = quantile_sorted(values, 0.025);
  out.hi = quantile_sorted(values, 0.975);
  const auto ones = std::count(values.begin(), values.end(), 1.0);
  out.spike = static_cast<double>(ones) / static_cast<double>(values.size());
  return out;
}

struct Bucket {
  std::size_t count = 0;
  std::vector<double> alpha0;
  std::vector<std::vector<double>> alphas;
  std::vector<std::vector<double>> within;
};

}  // namespace

const TreeSummary& PosteriorSummary::modal() const {
  if (trees.empty()) throw std::logic_error("posterior summary is empty");
  return trees.front();
}

double PosteriorSummary::prob(const TwoLayerTree& tree) const {
  for (const auto& t : trees) {
    if (t.tree == tree) return t.prob;
  }
  return 0.0;
}

PosteriorSummary summarize(std::span<const ChainTrace> traces, std::size_t burnin) {
  std::map<TwoLayerTree, Bucket> buckets;
  std::size_t total = 0;
  for (const auto& trace : traces) {
    for (const auto& rec : trace.records) {
      if (rec.iter <= burnin) continue;
      auto& b = buckets[rec.tree];
      const std::size_t K = rec.params.cluster_count();
      if (b.count == 0) {
        b.alphas.resize(K);
        b.within.resize(K);
      }
      ++b.count;
      b.alpha0.push_back(rec.params.alpha0);
      for (std::size_t k = 0; k < K; ++k) {
        b.alphas[k].push_back(rec.params.alphas[k]);
        b.within[k].push_back(rec.params.within(k));
      }
      ++total;
    }
  }
  if (total == 0) throw std::invalid_argument("summarize: no records after burn-in");

  PosteriorSummary out;
  out.n_records = total;
  for (auto& [tree, b] : buckets) {
    TreeSummary t;
    t.tree = tree;
    t.count = b.count;
    t.prob = static_cast<double>(b.count) / static_cast<double>(total);
    t.alpha0 = summarize_values(std::move(b.alpha0));
    for (auto& v : b.alphas) t.alphas.push_back(summarize_values(std::move(v)));
    for (auto& v : b.within) t.within.push_back(summarize_values(std::move(v)));
    out.trees.push_back(std::move(t));
  }
  // Stable sort keeps the canonical map order among equal counts.
  std::stable_sort(out.trees.begin(), out.trees.end(),
                   [](const TreeSummary& a, const TreeSummary& b) { return a.count > b.count; });
  return out;
}

PosteriorSummary summarize(const ChainTrace& trace, std::size_t burnin) {
  return summarize(std::span<const ChainTrace>(&trace, 1), burnin);
}

MaximaDataset bma_predict(const ChainTrace& trace, std::size_t burnin, std::size_t count, Rng& rng) {
  std::vector<const TraceRecord*> pool;
  for (const auto& rec : trace.records) {
    if (rec.iter > burnin) pool.push_back(&rec);
  }
  if (pool.empty()) throw std::invalid_argument("bma_predict: no records after burn-in");
  const auto d = static_cast<std::size_t>(pool.front()->tree.dimension());
  std::vector<double> values(count * d);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const TraceRecord& rec = pool.size() == 1 ? *pool.front() : *pool[pick(rng)];
    if (static_cast<std::size_t>(rec.tree.dimension()) != d) {
      throw std::invalid_argument("bma_predict: records disagree on the dimension");
    }
    sample_nested_logistic_row(rec.tree, rec.params, rng, std::span<double>(values.data() + i * d, d));
  }
  return MaximaDataset(count, d, std::move(values), std::nullopt, trace.header.names);
}

std::vector<double> quantile_curve(std::span<const double> samples, std::span<const double> probs) {
  if (samples.empty()) throw std::invalid_argument("quantile_curve: no samples");
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0 && probs[i] <= 1.0)) throw std::invalid_argument("quantile_curve: p outside [0, 1]");
    if (i > 0 && !(probs[i] > probs[i - 1])) {
      throw std::invalid_argument("quantile_curve: probabilities must be strictly increasing");
    }
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(probs.size());
  for (double p : probs) out.push_back(quantile_sorted(sorted, p));
  return out;
}

}  // namespace nestlog
