#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nestlog {

/// Largest dimension for which the set-partition space is enumerated.
inline constexpr int kDefaultEnumerationCap = 10;

/// A partition of the 1-based variable indices {1..D} into K clusters.
///
/// Instances are always canonical: members are sorted within each cluster
/// and clusters are ordered by their smallest member, so two trees that
/// describe the same partition compare equal. The same type doubles as the
/// occurrence partition attached to a row of block maxima.
class TwoLayerTree {
 public:
  TwoLayerTree() = default;

  /// Validates that `clusters` partitions {1..D} and canonicalizes it.
  /// Throws std::invalid_argument on empty, overlapping or incomplete input.
  static TwoLayerTree from_clusters(std::vector<std::vector<int>> clusters);

  /// One cluster holding all of {1..D}.
  static TwoLayerTree single_cluster(int dimension);

  /// D singleton clusters.
  static TwoLayerTree singletons(int dimension);

  /// Parses the text form `1,2|3,4,5`. Members and clusters may appear in
  /// any order; the result is canonical.
  static TwoLayerTree parse(std::string_view text);

  /// Canonical text form, e.g. `1,2|3,4,5`.
  std::string to_string() const;

  int dimension() const { return dimension_; }
  int cluster_count() const { return static_cast<int>(clusters_.size()); }
  const std::vector<int>& cluster(int k) const { return clusters_[static_cast<std::size_t>(k)]; }
  int cluster_size(int k) const { return static_cast<int>(cluster(k).size()); }
  std::span<const std::vector<int>> clusters() const { return clusters_; }
  std::vector<int> cluster_sizes() const;

  /// 0-based index of the cluster holding the 1-based variable `variable`.
  int cluster_of(int variable) const;

  bool contains_cluster(std::span<const int> members) const;

  friend bool operator==(const TwoLayerTree&, const TwoLayerTree&) = default;
  friend auto operator<=>(const TwoLayerTree&, const TwoLayerTree&) = default;

 private:
  std::vector<std::vector<int>> clusters_;
  int dimension_ = 0;
};

/// Validates and canonicalizes an arbitrary cluster list.
TwoLayerTree canonicalize(std::vector<std::vector<int>> clusters);
TwoLayerTree canonicalize(const TwoLayerTree& tree);

/// Every partition of {1..D}, exactly B_D of them, in restricted-growth
/// order. Throws std::out_of_range when D exceeds `cap`.
std::vector<TwoLayerTree> enumerate_trees(int dimension, int cap = kDefaultEnumerationCap);

}  // namespace nestlog
