#include "nestlog/tree.hpp"

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace nestlog {

namespace {

int parse_index(std::string_view token) {
  int value = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    throw std::invalid_argument("tree text: bad member '" + std::string(token) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

TwoLayerTree TwoLayerTree::from_clusters(std::vector<std::vector<int>> clusters) {
  if (clusters.empty()) throw std::invalid_argument("tree: no clusters");
  std::size_t total = 0;
  for (auto& c : clusters) {
    if (c.empty()) throw std::invalid_argument("tree: empty cluster");
    std::sort(c.begin(), c.end());
    total += c.size();
  }
  std::vector<char> seen(total + 1, 0);
  for (const auto& c : clusters) {
    for (int v : c) {
      if (v < 1 || static_cast<std::size_t>(v) > total) {
        throw std::invalid_argument("tree: member " + std::to_string(v) + " outside 1.." +
                                    std::to_string(total));
      }
      if (seen[static_cast<std::size_t>(v)]) {
        throw std::invalid_argument("tree: member " + std::to_string(v) + " repeated");
      }
      seen[static_cast<std::size_t>(v)] = 1;
    }
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  TwoLayerTree tree;
  tree.clusters_ = std::move(clusters);
  tree.dimension_ = static_cast<int>(total);
  return tree;
}

TwoLayerTree TwoLayerTree::single_cluster(int dimension) {
  if (dimension < 1) throw std::invalid_argument("tree: dimension must be positive");
  std::vector<int> all(static_cast<std::size_t>(dimension));
  for (int d = 0; d < dimension; ++d) all[static_cast<std::size_t>(d)] = d + 1;
  return from_clusters({std::move(all)});
}

TwoLayerTree TwoLayerTree::singletons(int dimension) {
  if (dimension < 1) throw std::invalid_argument("tree: dimension must be positive");
  std::vector<std::vector<int>> clusters;
  for (int d = 1; d <= dimension; ++d) clusters.push_back({d});
  return from_clusters(std::move(clusters));
}

TwoLayerTree TwoLayerTree::parse(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("tree text: empty");
  std::vector<std::vector<int>> clusters;
  for (auto block : split(text, '|')) {
    std::vector<int> members;
    for (auto token : split(block, ',')) members.push_back(parse_index(token));
    clusters.push_back(std::move(members));
  }
  return from_clusters(std::move(clusters));
}

std::string TwoLayerTree::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < clusters_.size(); ++k) {
    if (k) out.push_back('|');
    for (std::size_t i = 0; i < clusters_[k].size(); ++i) {
      if (i) out.push_back(',');
      out += std::to_string(clusters_[k][i]);
    }
  }
  return out;
}

std::vector<int> TwoLayerTree::cluster_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(clusters_.size());
  for (const auto& c : clusters_) sizes.push_back(static_cast<int>(c.size()));
  return sizes;
}

int TwoLayerTree::cluster_of(int variable) const {
  for (std::size_t k = 0; k < clusters_.size(); ++k) {
    if (std::binary_search(clusters_[k].begin(), clusters_[k].end(), variable)) {
      return static_cast<int>(k);
    }
  }
  throw std::invalid_argument("tree: variable " + std::to_string(variable) + " not present");
}

bool TwoLayerTree::contains_cluster(std::span<const int> members) const {
  std::vector<int> sorted(members.begin(), members.end());
  std::sort(sorted.begin(), sorted.end());
  return std::find(clusters_.begin(), clusters_.end(), sorted) != clusters_.end();
}

TwoLayerTree canonicalize(std::vector<std::vector<int>> clusters) {
  return TwoLayerTree::from_clusters(std::move(clusters));
}

TwoLayerTree canonicalize(const TwoLayerTree& tree) {
  return TwoLayerTree::from_clusters({tree.clusters().begin(), tree.clusters().end()});
}

std::vector<TwoLayerTree> enumerate_trees(int dimension, int cap) {
  if (dimension < 1) throw std::invalid_argument("enumerate_trees: dimension must be positive");
  if (dimension > cap) {
    throw std::out_of_range("enumerate_trees: dimension " + std::to_string(dimension) +
                            " exceeds the enumeration cap " + std::to_string(cap));
  }
  // Restricted growth strings: label[0] = 0, label[i] <= 1 + max(label[0..i-1]).
  const auto n = static_cast<std::size_t>(dimension);
  std::vector<int> label(n, 0);
  std::vector<int> prefix_max(n, 0);
  std::vector<TwoLayerTree> out;
  while (true) {
    const int blocks = prefix_max[n - 1] + 1;
    std::vector<std::vector<int>> clusters(static_cast<std::size_t>(blocks));
    for (std::size_t i = 0; i < n; ++i) {
      clusters[static_cast<std::size_t>(label[i])].push_back(static_cast<int>(i) + 1);
    }
    out.push_back(TwoLayerTree::from_clusters(std::move(clusters)));

    // Advance to the next string: bump the rightmost position that can grow.
    std::size_t i = n - 1;
    while (i > 0 && label[i] > prefix_max[i - 1]) --i;
    if (i == 0) break;
    ++label[i];
    prefix_max[i] = std::max(prefix_max[i - 1], label[i]);
    for (std::size_t r = i + 1; r < n; ++r) {
      label[r] = 0;
      prefix_max[r] = prefix_max[i];
    }
  }
  return out;
}

}  // namespace nestlog
