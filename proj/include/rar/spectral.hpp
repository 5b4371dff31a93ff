#pragma once

#include "rar/affinity.hpp"
#include "rar/partition.hpp"

#include <cstdint>
#include <vector>

namespace rar {

/// Leading eigenpairs of the normalized affinity D^{-1/2} E D^{-1/2}.
/// Computing them once lets several K share one decomposition.
struct SpectralBasis {
  /// Descending.
  Eigen::VectorXd eigenvalues;
  /// Matching orthonormal eigenvectors, one per column. Each column is
  /// sign-fixed so that its largest-magnitude entry is positive.
  Eigen::MatrixXd eigenvectors;
  /// D^{-1/2} diagonal.
  Eigen::VectorXd inv_sqrt_degree;

  Index max_k() const { return eigenvalues.size(); }
};

/// Throws ValidationError if k is outside 1..S or some node has zero degree,
/// NumericalError if the eigensolver fails.
SpectralBasis spectral_basis(const SimilarityGraph& graph, Index k);

/// Row-normalized spectral coordinates for K classes.
struct Embedding {
  /// S x K, unit-norm rows.
  Eigen::MatrixXd X;
  /// Leading K eigenvalues, descending.
  Eigen::VectorXd eigenvalues;

  Index K() const { return X.cols(); }
  Index size() const { return X.rows(); }
};

Embedding embedding_from_basis(const SpectralBasis& basis, Index k);
Embedding spectral_embed(const SimilarityGraph& graph, Index k);

struct RotationState {
  /// K x K orthogonal.
  Eigen::MatrixXd R;
  /// Sum of singular values of Y'X at the last iteration.
  double rho = 0.0;
  double rho_prev = 0.0;
};

struct DiscretizeOptions {
  double epsilon = 1e-10;
  int max_outer = 100;
};

struct Discretization {
  Partition partition;
  RotationState rotation;
  bool converged = false;
  /// Some column of Y came up empty and was re-seeded.
  bool reseeded = false;
  int iterations = 0;
  std::vector<double> rho_trace;
  /// max |R'R - I| over all iterations.
  double max_orthogonality_error = 0.0;
};

/// Rotation-based rounding of an embedding to a K-class indicator matrix.
Discretization discretize(const Embedding& embedding, std::uint64_t seed,
                          const DiscretizeOptions& options = {});

/// Each label keeps only its largest W-connected component; smaller
/// fragments join the adjacent region they share the most similarity with.
/// Output regions are renumbered by first appearance and are contiguous.
Partition enforce_contiguity(const Partition& partition, const AdjacencyMatrix& w,
                             const SimilarityGraph& graph);

/// True when every region induces a connected subgraph of W.
bool is_contiguous(const Partition& partition, const AdjacencyMatrix& w);

struct SegmentOptions {
  int restarts = 10;
  DiscretizeOptions discretize;
};

struct Segmentation {
  Partition partition;
  /// Normalized cut of the partition over the non-isolated units.
  double ncut = 0.0;
  int best_restart = 0;
  bool converged = false;
};

/// Seed of restart `index` derived from the user seed.
std::uint64_t restart_seed(std::uint64_t seed, int index);

/// Full step-2 segmentation for K classes. Isolated units become singleton
/// regions, so the realized K may exceed the request.
Segmentation segment(const SimilarityGraph& graph, const AdjacencyMatrix& w, Index k,
                     std::uint64_t seed, const SegmentOptions& options = {});

/// As above, reusing a precomputed basis of the non-isolated subgraph.
Segmentation segment_with_basis(const SimilarityGraph& graph, const AdjacencyMatrix& w,
                                const SpectralBasis& basis, Index k, std::uint64_t seed,
                                const SegmentOptions& options = {});

/// Normalized cut ignoring isolated (zero-degree) units.
double ncut_connected(const SimilarityGraph& graph, const Partition& partition);

}  // namespace rar
