#pragma once

#include "rar/dataset.hpp"

#include <vector>

namespace rar {

/// Region labels over the canonical unit order.
struct Partition {
  std::vector<int> labels;
  int K = 0;
  /// Set once every region is known to induce a connected subgraph of W.
  bool contiguous = false;

  Index size() const { return static_cast<Index>(labels.size()); }

  /// Builds a partition from arbitrary integer labels, renumbering them
  /// 0..K-1 in order of first appearance.
  static Partition from_labels(const std::vector<int>& raw);

  std::vector<Index> region_sizes() const;
  std::vector<std::vector<Index>> members() const;

  /// Throws ValidationError unless every label is in 0..K-1 and used.
  void validate() const;

  bool operator==(const Partition&) const = default;
};

/// Adjusted Rand index between two labelings of the same units.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);
/// Plain Rand index (fraction of agreeing pairs).
double rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace rar
