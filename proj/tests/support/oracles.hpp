#pragma once

// Reference computations used only by the tests. Nothing here calls into the
// library's likelihood code: exponent functions are evaluated straight from
// their closed form in 64-digit arithmetic and differentiated numerically.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "nestlog/model.hpp"
#include "nestlog/tree.hpp"

namespace oracle {

using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<64>>;

/// Bell numbers B_0..B_n from the Bell triangle.
inline std::vector<std::uint64_t> bell_numbers(int n) {
  std::vector<std::uint64_t> bell{1};
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next{row.back()};
    for (std::uint64_t x : row) next.push_back(next.back() + x);
    bell.push_back(next.front());
    row = std::move(next);
  }
  return bell;
}

/// Set partitions of {1..n} by inserting element n into every block of each
/// partition of {1..n-1} or into a new block.
inline std::vector<std::vector<std::vector<int>>> set_partitions(int n) {
  std::vector<std::vector<std::vector<int>>> parts{{}};
  for (int v = 1; v <= n; ++v) {
    std::vector<std::vector<std::vector<int>>> next;
    for (const auto& p : parts) {
      for (std::size_t b = 0; b < p.size(); ++b) {
        auto q = p;
        q[b].push_back(v);
        next.push_back(std::move(q));
      }
      auto q = p;
      q.push_back({v});
      next.push_back(std::move(q));
    }
    parts = std::move(next);
  }
  return parts;
}

/// Nested logistic exponent function straight from its definition.
inline Real v_nested(const std::vector<Real>& z, const nestlog::TwoLayerTree& tree,
                     const nestlog::DependenceParams& params) {
  Real outer = 0;
  for (int k = 0; k < tree.cluster_count(); ++k) {
    const Real a_k = params.alphas[static_cast<std::size_t>(k)];
    const Real inner_power = Real(-1) / (Real(params.alpha0) * a_k);
    Real inner = 0;
    for (int v : tree.cluster(k)) inner += pow(z[static_cast<std::size_t>(v - 1)], inner_power);
    outer += pow(inner, a_k);
  }
  return pow(outer, Real(params.alpha0));
}

/// Central mixed difference of f over the 0-based coordinates `vars` with
/// step h * z_d per coordinate.
inline Real mixed_difference(const std::function<Real(const std::vector<Real>&)>& f, const std::vector<Real>& z,
                             std::span<const int> vars, const Real& h) {
  const std::size_t k = vars.size();
  Real total = 0;
  Real denom = 1;
  for (int v : vars) denom *= 2 * h * z[static_cast<std::size_t>(v)];
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    std::vector<Real> x = z;
    int sign = 1;
    for (std::size_t b = 0; b < k; ++b) {
      const auto idx = static_cast<std::size_t>(vars[b]);
      if ((mask >> b) & 1U) {
        x[idx] -= h * z[idx];
        sign = -sign;
      } else {
        x[idx] += h * z[idx];
      }
    }
    total += sign * f(x);
  }
  return total / denom;
}

inline std::vector<Real> to_real(std::span<const double> m) { return {m.begin(), m.end()}; }

/// Mixed partial of V over 1-based `variables` by finite differences.
inline double partial_v(std::span<const double> m, const nestlog::TwoLayerTree& tree,
                        const nestlog::DependenceParams& params, std::span<const int> variables) {
  std::vector<int> vars;
  for (int v : variables) vars.push_back(v - 1);
  const auto f = [&](const std::vector<Real>& x) { return v_nested(x, tree, params); };
  return static_cast<double>(mixed_difference(f, to_real(m), vars, Real("1e-5")));
}

/// True when the mixed partial over 1-based `variables` vanishes identically:
/// with alpha0 == 1 the clusters decouple, and with alpha_k == 1 as well the
/// members of cluster k do too.
inline bool partial_vanishes(const nestlog::TwoLayerTree& tree, const nestlog::DependenceParams& params,
                             std::span<const int> variables) {
  if (variables.size() < 2 || params.alpha0 != 1.0) return false;
  const int first = tree.cluster_of(variables.front());
  for (int v : variables) {
    if (tree.cluster_of(v) != first) return true;
  }
  return params.alphas[static_cast<std::size_t>(first)] == 1.0;
}

/// Full mixed partial of exp(-V) by finite differences: the density.
inline double density(std::span<const double> m, const nestlog::TwoLayerTree& tree,
                      const nestlog::DependenceParams& params) {
  std::vector<int> vars(m.size());
  std::iota(vars.begin(), vars.end(), 0);
  const auto f = [&](const std::vector<Real>& x) { return exp(-v_nested(x, tree, params)); };
  return static_cast<double>(mixed_difference(f, to_real(m), vars, Real("1e-5")));
}

/// One-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic KS p-value with the Stephens small-sample correction.
inline double ks_pvalue(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double x = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    p += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

inline double unit_frechet_cdf(double z) { return z > 0.0 ? std::exp(-1.0 / z) : 0.0; }

/// Kendall's tau by pair counting (O(n^2)).
inline double kendall_tau(std::span<const double> x, std::span<const double> y) {
  long long concordant = 0;
  long long discordant = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      concordant += s > 0 ? 1 : 0;
      discordant += s < 0 ? 1 : 0;
    }
  }
  const double pairs = static_cast<double>(x.size()) * static_cast<double>(x.size() - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

struct Instance {
  nestlog::TwoLayerTree tree;
  nestlog::DependenceParams params;
  std::vector<double> m;
};

/// Random tree (uniform labels, canonicalized), parameters in [0.2, 1] with
/// occasional exact ones, and observations from a broad positive range.
inline Instance random_instance(int dimension, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> label(0, dimension - 1);
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(dimension));
  for (int v = 1; v <= dimension; ++v) groups[static_cast<std::size_t>(label(rng))].push_back(v);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  Instance out;
  out.tree = nestlog::TwoLayerTree::from_clusters(std::move(groups));
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto draw_alpha = [&] { return unif(rng) < 0.1 ? 1.0 : 0.2 + 0.8 * unif(rng); };
  std::vector<double> alphas;
  for (int k = 0; k < out.tree.cluster_count(); ++k) alphas.push_back(draw_alpha());
  out.params = nestlog::DependenceParams(draw_alpha(), std::move(alphas));
  for (int d = 0; d < dimension; ++d) out.m.push_back(std::exp(3.0 * unif(rng) - 1.0));
  return out;
}

}  // namespace oracle
