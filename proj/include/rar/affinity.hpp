#pragma once

#include "rar/error.hpp"
#include "rar/glm.hpp"
#include "rar/partition.hpp"

#include <Eigen/SparseCore>

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace rar {

/// Binary symmetric spatial adjacency without self-loops.
struct AdjacencyMatrix {
  Index n = 0;
  /// Undirected edges with first < second, sorted lexicographically.
  std::vector<std::pair<Index, Index>> edges;
  /// Sorted neighbor list per unit.
  std::vector<std::vector<Index>> neighbors;
  /// Non-fatal findings such as isolated units.
  std::vector<std::string> warnings;

  Index size() const { return n; }
  Index n_edges() const { return static_cast<Index>(edges.size()); }
  Index degree(Index i) const { return static_cast<Index>(neighbors[static_cast<std::size_t>(i)].size()); }
  bool adjacent(Index i, Index j) const;
  std::vector<Index> isolated() const;

  /// Builds from index pairs; applies symmetric closure and deduplication.
  /// Throws ValidationError on self-loops or out-of-range indices.
  static AdjacencyMatrix from_index_edges(Index n, std::span<const std::pair<Index, Index>> pairs);

  Eigen::SparseMatrix<double> to_sparse() const;

  /// Adjacency restricted to `keep` (renumbered in the given order).
  AdjacencyMatrix induced(std::span<const Index> keep) const;

  bool operator==(const AdjacencyMatrix& o) const { return n == o.n && edges == o.edges; }
};

using IdEdge = std::pair<std::string, std::string>;

/// Edge list over unit identifiers. Unknown ids are reported together.
AdjacencyMatrix build_adjacency(std::span<const IdEdge> edges,
                                std::span<const std::string> unit_ids);

/// Rook adjacency on a rows x cols lattice, unit index r * cols + c.
AdjacencyMatrix grid_adjacency(Index rows, Index cols);

/// Connected-component id per unit (0-based, ordered by lowest member).
std::vector<int> connected_components(const AdjacencyMatrix& w);

/// Adjacency-masked similarity between units.
struct SimilarityGraph {
  Eigen::SparseMatrix<double> E;
  /// Row sums e_{i+}.
  Eigen::VectorXd degree;
  DeviationVector source;

  Index size() const { return E.rows(); }
  double weight(Index i, Index j) const { return E.coeff(i, j); }
  SimilarityGraph induced(std::span<const Index> keep) const;
};

/// Thrown when every deviation is equal and the Gaussian kernel has no scale.
class DegenerateSimilarityError : public NumericalError {
 public:
  DegenerateSimilarityError()
      : NumericalError("all deviations are identical (sigma_d = 0); similarity undefined") {}
};

/// e_ij = exp(-(d_i - d_j)^2 / (2 sigma_d^2)) on adjacent pairs.
SimilarityGraph build_similarity(const DeviationVector& deviation, const AdjacencyMatrix& w);

/// e_ij = W_ij. Fallback when deviations carry no information.
SimilarityGraph spatial_similarity(const AdjacencyMatrix& w);

/// Wraps an arbitrary symmetric non-negative weight matrix.
SimilarityGraph similarity_from_weights(Eigen::SparseMatrix<double> weights);

/// Sum over regions of cut(G_k, complement) / vol(G_k). Throws
/// ValidationError for a zero-volume region or a label/graph size mismatch.
double ncut(const SimilarityGraph& graph, const Partition& partition);

}  // namespace rar
