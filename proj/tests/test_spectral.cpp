#include "rar/error.hpp"
#include "rar/inference.hpp"
#include "rar/simulation.hpp"
#include "rar/spectral.hpp"

#include "support/oracles.hpp"
#include "support/support.hpp"

#include <doctest.h>

#include <algorithm>

using namespace rar;
using rar::testing::Rng;

namespace {

SimilarityGraph graph_of(Index n, const std::vector<std::pair<Index, Index>>& edges,
                         const std::vector<double>& weights) {
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    t.emplace_back(edges[k].first, edges[k].second, weights[k]);
    t.emplace_back(edges[k].second, edges[k].first, weights[k]);
  }
  Eigen::SparseMatrix<double> e(n, n);
  e.setFromTriplets(t.begin(), t.end());
  return similarity_from_weights(e);
}

AdjacencyMatrix pattern_of(const SimilarityGraph& g) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index c = 0; c < g.E.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.E, c); it; ++it)
      if (it.row() < it.col()) edges.emplace_back(it.row(), it.col());
  return AdjacencyMatrix::from_index_edges(g.size(), edges);
}

Embedding indicator_embedding(const std::vector<int>& labels, Index k) {
  Embedding e;
  e.X = Eigen::MatrixXd::Zero(static_cast<Index>(labels.size()), k);
  for (std::size_t i = 0; i < labels.size(); ++i) e.X(static_cast<Index>(i), labels[i]) = 1.0;
  e.eigenvalues = Eigen::VectorXd::Ones(k);
  return e;
}

SimilarityGraph random_planted(Rng& rng, Index n, std::vector<int>& truth) {
  return similarity_from_weights(testing::random_planted_graph(rng, n, truth));
}

}  // namespace

TEST_CASE("path of three has normalized affinity eigenvalues 1, 0, -1") {
  const SimilarityGraph g = graph_of(3, {{0, 1}, {1, 2}}, {1.0, 1.0});
  const SpectralBasis b = spectral_basis(g, 3);
  CHECK(std::abs(b.eigenvalues[0] - 1.0) < 1e-10);
  CHECK(std::abs(b.eigenvalues[1]) < 1e-10);
  CHECK(std::abs(b.eigenvalues[2] + 1.0) < 1e-10);
}

TEST_CASE("two components give a double unit eigenvalue and blockwise-constant rows") {
  const SimilarityGraph g =
      graph_of(6, {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}}, {1.0, 0.5, 0.8, 1.0, 0.3});
  const Embedding e = spectral_embed(g, 2);
  CHECK(std::abs(e.eigenvalues[0] - 1.0) < 1e-10);
  CHECK(std::abs(e.eigenvalues[1] - 1.0) < 1e-10);
  for (Index i : {1, 2}) CHECK((e.X.row(i) - e.X.row(0)).norm() < 1e-8);
  for (Index i : {4, 5}) CHECK((e.X.row(i) - e.X.row(3)).norm() < 1e-8);
  CHECK(std::abs(e.X.row(0).dot(e.X.row(3))) < 1e-8);
}

TEST_CASE("embedding rows have unit norm and eigenvalues lie in [-1, 1]") {
  Rng rng(2);
  std::vector<int> truth;
  const SimilarityGraph g = random_planted(rng, 30, truth);
  const Embedding e = spectral_embed(g, 4);
  for (Index i = 0; i < e.X.rows(); ++i) CHECK(std::abs(e.X.row(i).norm() - 1.0) < 1e-10);
  CHECK(std::abs(e.eigenvalues[0] - 1.0) < 1e-8);
  CHECK(e.eigenvalues.maxCoeff() <= 1.0 + 1e-10);
  CHECK(e.eigenvalues.minCoeff() >= -1.0 - 1e-10);
  for (Index j = 1; j < 4; ++j) CHECK(e.eigenvalues[j] <= e.eigenvalues[j - 1]);
}

TEST_CASE("leading eigenvector of a weighted complete graph is proportional to sqrt degree") {
  std::vector<std::pair<Index, Index>> edges;
  std::vector<double> weights;
  for (Index i = 0; i < 5; ++i)
    for (Index j = i + 1; j < 5; ++j) {
      edges.emplace_back(i, j);
      weights.push_back(0.4);
    }
  const SimilarityGraph g = graph_of(5, edges, weights);
  const SpectralBasis b = spectral_basis(g, 2);
  const Eigen::VectorXd expected = g.degree.cwiseSqrt().normalized();
  CHECK((b.eigenvectors.col(0) - expected).norm() < 1e-10);
}

TEST_CASE("eigenvector signs are fixed by the largest entry") {
  Rng rng(3);
  std::vector<int> truth;
  const SimilarityGraph g = random_planted(rng, 20, truth);
  const SpectralBasis b = spectral_basis(g, 3);
  for (Index j = 0; j < 3; ++j) {
    Index arg = 0;
    b.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
    CHECK(b.eigenvectors(arg, j) > 0);
  }
}

TEST_CASE("indicator embedding is a fixed point of discretize") {
  const std::vector<int> labels{0, 0, 1, 1, 1, 0, 2, 2};
  const Embedding e = indicator_embedding(labels, 3);
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    const Discretization d = discretize(e, seed);
    CHECK(d.converged);
    CHECK(adjusted_rand_index(d.partition.labels, labels) == doctest::Approx(1.0));
    REQUIRE(d.rho_trace.size() >= 2);
    CHECK(d.rho_trace[0] == doctest::Approx(8.0));
    CHECK(d.rho_trace[1] == doctest::Approx(d.rho_trace[0]));
  }
}

TEST_CASE("two-block scaled indicator embedding recovers the blocks") {
  std::vector<int> labels{0, 0, 0, 1, 1, 1, 1};
  Embedding e = indicator_embedding(labels, 2);
  const double angle = 0.7;
  Eigen::Matrix2d rot;
  rot << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  e.X = e.X * rot;
  const Discretization d = discretize(e, 9);
  CHECK(adjusted_rand_index(d.partition.labels, labels) == doctest::Approx(1.0));
  const Discretization again =
      discretize(indicator_embedding(d.partition.labels, d.partition.K), 9);
  CHECK(again.partition.labels == d.partition.labels);
}

TEST_CASE("rotation stays orthogonal and rho never decreases") {
  Rng rng(4);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<int> truth;
    const SimilarityGraph g = random_planted(rng, 40, truth);
    const Embedding e = spectral_embed(g, 3);
    const Discretization d = discretize(e, static_cast<std::uint64_t>(rep));
    CHECK(d.max_orthogonality_error < 1e-8);
    const Eigen::MatrixXd& r = d.rotation.R;
    CHECK((r.transpose() * r - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-8);
    for (std::size_t k = 1; k < d.rho_trace.size(); ++k)
      CHECK(d.rho_trace[k] >= d.rho_trace[k - 1] - 1e-10);
  }
}

TEST_CASE("planted eight-node graph matches the exhaustive minimum ncut") {
  std::vector<std::pair<Index, Index>> edges;
  std::vector<double> weights;
  for (Index i = 0; i < 8; ++i)
    for (Index j = i + 1; j < 8; ++j) {
      const bool same = (i < 4) == (j < 4);
      edges.emplace_back(i, j);
      weights.push_back(same ? 1.0 : 0.05);
    }
  const SimilarityGraph g = graph_of(8, edges, weights);
  const Segmentation s = segment(g, pattern_of(g), 2, 1);
  const double best = oracle::min_ncut_2(Eigen::MatrixXd(g.E));
  CHECK(s.ncut == doctest::Approx(best).epsilon(1e-12));
  CHECK(adjusted_rand_index(s.partition.labels, {0, 0, 0, 0, 1, 1, 1, 1}) == doctest::Approx(1.0));
}

TEST_CASE("contiguity repair keeps contiguous labels") {
  const AdjacencyMatrix w = grid_adjacency(3, 3);
  const SimilarityGraph g = spatial_similarity(w);
  const Partition p = Partition::from_labels({0, 0, 1, 0, 0, 1, 2, 2, 1});
  const Partition q = enforce_contiguity(p, w, g);
  CHECK(q.labels == p.labels);
  CHECK(q.contiguous);
  const Partition one = enforce_contiguity(Partition::from_labels(std::vector<int>(9, 0)), w, g);
  CHECK(one.K == 1);
}

TEST_CASE("an island merges into its only neighbor region") {
  // 4 x 4 grid, label 0 on the left half except an island of label 1 at
  // (1, 0); label 1 on the right half.
  const AdjacencyMatrix w = grid_adjacency(4, 4);
  const SimilarityGraph g = spatial_similarity(w);
  std::vector<int> labels(16);
  for (Index i = 0; i < 16; ++i) labels[static_cast<std::size_t>(i)] = (i % 4) < 2 ? 0 : 1;
  labels[4] = 1;
  const Partition q = enforce_contiguity(Partition::from_labels(labels), w, g);
  CHECK(q.K == 2);
  CHECK(q.labels[4] == q.labels[0]);
  CHECK(is_contiguous(q, w));
}

TEST_CASE("fragments merge toward the larger connecting similarity") {
  // Path 0-1-2-3-4 with labels A B A C C: fragment {2} of A touches B (1)
  // and C (3). Its edge to 3 is stronger.
  const AdjacencyMatrix w = AdjacencyMatrix::from_index_edges(5, std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const SimilarityGraph g = graph_of(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0.5, 0.2, 0.9, 0.5});
  const Partition q = enforce_contiguity(Partition::from_labels({0, 1, 0, 2, 2}), w, g);
  CHECK(q.labels[2] == q.labels[3]);
  CHECK(is_contiguous(q, w));
}

TEST_CASE("zero-similarity boundaries merge by edge count with lowest-region ties") {
  const AdjacencyMatrix w = AdjacencyMatrix::from_index_edges(5, std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const SimilarityGraph g = graph_of(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}}, {0.0, 0.0, 0.0, 1.0});
  const Partition q = enforce_contiguity(Partition::from_labels({0, 1, 2, 1, 1}), w, g);
  // Fragment {1} of label 1 is the smaller one; it touches region 0 and
  // region 2 once each, so the lower index (0) wins.
  CHECK(q.labels[1] == q.labels[0]);
  CHECK(is_contiguous(q, w));
}

TEST_CASE("disconnected components are recovered exactly") {
  Rng rng(6);
  for (int c : {2, 3, 4}) {
    std::vector<std::pair<Index, Index>> edges;
    std::vector<double> weights;
    std::vector<int> truth;
    std::uniform_real_distribution<double> u(0.2, 1.0);
    Index base = 0;
    for (int comp = 0; comp < c; ++comp) {
      const Index size = 3 + comp;
      for (Index i = 0; i < size; ++i) {
        truth.push_back(comp);
        if (i + 1 < size) {
          edges.emplace_back(base + i, base + i + 1);
          weights.push_back(u(rng));
        }
      }
      edges.emplace_back(base, base + size - 1);
      weights.push_back(u(rng));
      base += size;
    }
    const SimilarityGraph g = graph_of(base, edges, weights);
    const Segmentation s = segment(g, pattern_of(g), c, 3);
    CHECK(s.ncut == 0.0);
    CHECK(adjusted_rand_index(s.partition.labels, truth) == doctest::Approx(1.0));
  }
}

TEST_CASE("K = S yields singletons with finite ncut") {
  const AdjacencyMatrix w = grid_adjacency(2, 3);
  const SimilarityGraph g = spatial_similarity(w);
  const Segmentation s = segment(g, w, 6, 1);
  CHECK(s.partition.K == 6);
  CHECK(std::isfinite(s.ncut));
  CHECK(s.ncut == doctest::Approx(6.0));
}

TEST_CASE("isolated units become singleton regions") {
  const AdjacencyMatrix w = AdjacencyMatrix::from_index_edges(5, std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}, {2, 3}});
  const SimilarityGraph g = spatial_similarity(w);
  const Segmentation s = segment(g, w, 2, 1);
  CHECK(s.partition.K == 3);
  CHECK(std::count(s.partition.labels.begin(), s.partition.labels.end(), s.partition.labels[4]) == 1);
}

TEST_CASE("segmentation is deterministic and relabeling-invariant") {
  Rng rng(7);
  std::vector<int> truth;
  const SimilarityGraph g = random_planted(rng, 60, truth);
  const AdjacencyMatrix w = pattern_of(g);
  const Segmentation a = segment(g, w, 4, 42);
  const Segmentation b = segment(g, w, 4, 42);
  CHECK(a.partition.labels == b.partition.labels);
  CHECK(a.ncut == b.ncut);
  std::vector<int> permuted = a.partition.labels;
  for (int& l : permuted) l = (l + 2) % a.partition.K;
  CHECK(ncut(g, Partition::from_labels(permuted)) == doctest::Approx(a.ncut).epsilon(1e-14));
}

TEST_CASE("small planted graphs reach the exhaustive minimum ncut") {
  Rng rng(8);
  std::uniform_int_distribution<Index> size(4, 8);
  int within = 0;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> truth;
    const SimilarityGraph g = random_planted(rng, size(rng), truth);
    const AdjacencyMatrix w = pattern_of(g);
    const double best = oracle::min_ncut_2(Eigen::MatrixXd(g.E));
    const Segmentation s = segment(g, w, 2, static_cast<std::uint64_t>(rep));
    if (s.partition.K == 2 && s.ncut <= 1.05 * best + 1e-12) ++within;
  }
  CHECK(within == 50);
}

TEST_CASE("planted three-band simulation is recovered" * doctest::test_suite("fidelity")) {
  SimConfig cfg;
  cfg.seed = 2024;
  const SimulatedData sim = simulate_dataset(cfg);
  const StepOneResult step = compute_similarity(sim.data, sim.adjacency, Family::GaussianIdentity);
  const Segmentation s = segment(step.graph, sim.adjacency, 3, 1);
  CHECK(adjusted_rand_index(s.partition.labels, sim.truth.labels) >= 0.95);
}
