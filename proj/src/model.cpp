#include "nestlog/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include "nestlog/numeric.hpp"

namespace nestlog {

bool in_unit_interval(double alpha) { return alpha > 0.0 && alpha <= 1.0; }

DependenceParams::DependenceParams(double alpha0_value, std::vector<double> alpha_values)
    : alpha0(alpha0_value), alphas(std::move(alpha_values)) {
  if (!in_unit_interval(alpha0)) throw std::domain_error("alpha0 must lie in (0, 1]");
  for (double a : alphas) {
    if (!in_unit_interval(a)) throw std::domain_error("cluster alpha must lie in (0, 1]");
  }
}

void DependenceParams::set(std::size_t p, double value) {
  if (!in_unit_interval(value)) throw std::domain_error("parameter must lie in (0, 1]");
  if (p == 0) {
    alpha0 = value;
  } else {
    alphas.at(p - 1) = value;
  }
}

void check_consistent(const TwoLayerTree& tree, const DependenceParams& params) {
  if (static_cast<std::size_t>(tree.cluster_count()) != params.cluster_count()) {
    throw std::invalid_argument("tree has " + std::to_string(tree.cluster_count()) +
                                " clusters but params carry " +
                                std::to_string(params.cluster_count()) + " alphas");
  }
}

std::vector<std::string> default_names(std::size_t dimension) {
  std::vector<std::string> names;
  for (std::size_t d = 1; d <= dimension; ++d) names.push_back("z" + std::to_string(d));
  return names;
}

MaximaDataset::MaximaDataset(std::size_t rows, std::size_t cols, std::vector<double> values,
                             std::optional<std::vector<TwoLayerTree>> partitions,
                             std::vector<std::string> names)
    : rows_(rows), cols_(cols), values_(std::move(values)), partitions_(std::move(partitions)),
      names_(std::move(names)) {
  if (cols_ == 0) throw std::invalid_argument("dataset: no columns");
  if (values_.size() != rows_ * cols_) throw std::invalid_argument("dataset: value count mismatch");
  for (double v : values_) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw std::invalid_argument("dataset: values must be finite and positive");
    }
  }
  if (partitions_) {
    if (partitions_->size() != rows_) throw std::invalid_argument("dataset: one partition per row");
    for (const auto& p : *partitions_) {
      if (p.dimension() != static_cast<int>(cols_)) {
        throw std::invalid_argument("dataset: partition " + p.to_string() + " does not cover 1.." +
                                    std::to_string(cols_));
      }
    }
  }
  if (names_.empty()) {
    names_ = default_names(cols_);
  } else if (names_.size() != cols_) {
    throw std::invalid_argument("dataset: expected one name per column");
  }
}

std::vector<double> MaximaDataset::column(std::size_t d) const {
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, d);
  return out;
}

const TwoLayerTree& MaximaDataset::partition(std::size_t i) const {
  if (!partitions_) throw std::invalid_argument("dataset: no occurrence partitions");
  return (*partitions_)[i];
}

double log_v_logistic(std::span<const double> z, double alpha) {
  if (!in_unit_interval(alpha)) throw std::domain_error("v_logistic: alpha must lie in (0, 1]");
  if (z.empty()) throw std::invalid_argument("v_logistic: empty input");
  std::vector<double> terms;
  terms.reserve(z.size());
  for (double x : z) {
    if (!(x > 0.0)) throw std::domain_error("v_logistic: z must be positive");
    terms.push_back(-std::log(x) / alpha);
  }
  std::sort(terms.begin(), terms.end(), std::greater<>());
  return alpha * log_sum_exp(terms);
}

double v_logistic(std::span<const double> z, double alpha) { return std::exp(log_v_logistic(z, alpha)); }

ExponentTerms exponent_terms(std::span<const double> log_z, const TwoLayerTree& tree,
                             const DependenceParams& params) {
  ExponentTerms out;
  out.log_z.assign(log_z.begin(), log_z.end());
  const int k_count = tree.cluster_count();
  out.log_vk.resize(static_cast<std::size_t>(k_count));
  std::vector<double> terms;
  for (int k = 0; k < k_count; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    const double within = params.within(ku);
    terms.clear();
    for (int v : tree.cluster(k)) terms.push_back(-log_z[static_cast<std::size_t>(v - 1)] / within);
    std::sort(terms.begin(), terms.end(), std::greater<>());
    out.log_vk[ku] = params.alphas[ku] * log_sum_exp(terms);
  }
  std::vector<double> cluster_terms = out.log_vk;
  std::sort(cluster_terms.begin(), cluster_terms.end(), std::greater<>());
  out.log_v = params.alpha0 * log_sum_exp(cluster_terms);
  return out;
}

namespace {

std::vector<double> checked_log(std::span<const double> z, const TwoLayerTree& tree,
                                const DependenceParams& params) {
  check_consistent(tree, params);
  if (z.size() != static_cast<std::size_t>(tree.dimension())) {
    throw std::invalid_argument("v_nested: z has " + std::to_string(z.size()) +
                                " entries, tree covers " + std::to_string(tree.dimension()));
  }
  std::vector<double> log_z;
  log_z.reserve(z.size());
  for (double x : z) {
    if (!(x > 0.0)) throw std::domain_error("v_nested: z must be positive");
    log_z.push_back(std::log(x));
  }
  return log_z;
}

}  // namespace

double log_v_nested(std::span<const double> z, const TwoLayerTree& tree, const DependenceParams& params) {
  return exponent_terms(checked_log(z, tree, params), tree, params).log_v;
}

double v_nested(std::span<const double> z, const TwoLayerTree& tree, const DependenceParams& params) {
  return std::exp(log_v_nested(z, tree, params));
}

double extremal_coefficient(const TwoLayerTree& tree, const DependenceParams& params) {
  check_consistent(tree, params);
  double sum = 0.0;
  for (int k = 0; k < tree.cluster_count(); ++k) {
    sum += std::pow(static_cast<double>(tree.cluster_size(k)), params.alphas[static_cast<std::size_t>(k)]);
  }
  return std::pow(sum, params.alpha0);
}

}  // namespace nestlog
