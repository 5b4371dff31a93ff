#include "rar/affinity.hpp"

#include "rar/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>

namespace rar {

bool AdjacencyMatrix::adjacent(Index i, Index j) const {
  const auto& nb = neighbors[static_cast<std::size_t>(i)];
  return std::binary_search(nb.begin(), nb.end(), j);
}

std::vector<Index> AdjacencyMatrix::isolated() const {
  std::vector<Index> out;
  for (Index i = 0; i < n; ++i)
    if (neighbors[static_cast<std::size_t>(i)].empty()) out.push_back(i);
  return out;
}

AdjacencyMatrix AdjacencyMatrix::from_index_edges(Index n,
                                                  std::span<const std::pair<Index, Index>> pairs) {
  if (n < 1) throw ValidationError("adjacency needs at least one unit");
  AdjacencyMatrix w;
  w.n = n;
  w.edges.reserve(pairs.size());
  for (auto [a, b] : pairs) {
    if (a < 0 || b < 0 || a >= n || b >= n)
      throw ValidationError("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                            ") out of range");
    if (a == b) throw ValidationError("self-loop on unit " + std::to_string(a));
    w.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(w.edges.begin(), w.edges.end());
  w.edges.erase(std::unique(w.edges.begin(), w.edges.end()), w.edges.end());

  w.neighbors.assign(static_cast<std::size_t>(n), {});
  for (auto [a, b] : w.edges) {
    w.neighbors[static_cast<std::size_t>(a)].push_back(b);
    w.neighbors[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& nb : w.neighbors) std::sort(nb.begin(), nb.end());

  const auto iso = w.isolated();
  if (!iso.empty())
    w.warnings.push_back(std::to_string(iso.size()) +
                         " isolated unit(s); each becomes a singleton region");
  return w;
}

Eigen::SparseMatrix<double> AdjacencyMatrix::to_sparse() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    t.emplace_back(a, b, 1.0);
    t.emplace_back(b, a, 1.0);
  }
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

AdjacencyMatrix AdjacencyMatrix::induced(std::span<const Index> keep) const {
  std::vector<Index> pos(static_cast<std::size_t>(n), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) pos[static_cast<std::size_t>(keep[k])] = static_cast<Index>(k);
  std::vector<std::pair<Index, Index>> sub;
  for (auto [a, b] : edges) {
    const Index pa = pos[static_cast<std::size_t>(a)], pb = pos[static_cast<std::size_t>(b)];
    if (pa >= 0 && pb >= 0) sub.emplace_back(pa, pb);
  }
  return from_index_edges(static_cast<Index>(keep.size()), sub);
}

AdjacencyMatrix build_adjacency(std::span<const IdEdge> edges,
                                std::span<const std::string> unit_ids) {
  std::unordered_map<std::string, Index> index;
  for (std::size_t i = 0; i < unit_ids.size(); ++i) index.emplace(unit_ids[i], static_cast<Index>(i));

  std::vector<std::string> unknown;
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(edges.size());
  for (const auto& [a, b] : edges) {
    auto ia = index.find(a), ib = index.find(b);
    if (ia == index.end()) unknown.push_back(a);
    if (ib == index.end()) unknown.push_back(b);
    if (ia == index.end() || ib == index.end()) continue;
    if (ia->second == ib->second) throw ValidationError("self-loop on unit '" + a + "'");
    pairs.emplace_back(ia->second, ib->second);
  }
  if (!unknown.empty()) {
    std::sort(unknown.begin(), unknown.end());
    unknown.erase(std::unique(unknown.begin(), unknown.end()), unknown.end());
    std::string msg = "unknown unit id(s) in adjacency:";
    for (const auto& u : unknown) msg += " '" + u + "'";
    throw ValidationError(msg);
  }
  return AdjacencyMatrix::from_index_edges(static_cast<Index>(unit_ids.size()), pairs);
}

AdjacencyMatrix grid_adjacency(Index rows, Index cols) {
  if (rows < 1 || cols < 1) throw ValidationError("grid dimensions must be at least 1");
  std::vector<std::pair<Index, Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(2 * rows * cols));
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const Index u = r * cols + c;
      if (c + 1 < cols) pairs.emplace_back(u, u + 1);
      if (r + 1 < rows) pairs.emplace_back(u, u + cols);
    }
  return AdjacencyMatrix::from_index_edges(rows * cols, pairs);
}

std::vector<int> connected_components(const AdjacencyMatrix& w) {
  std::vector<int> comp(static_cast<std::size_t>(w.n), -1);
  int next = 0;
  std::queue<Index> q;
  for (Index s = 0; s < w.n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    comp[static_cast<std::size_t>(s)] = next;
    q.push(s);
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (Index v : w.neighbors[static_cast<std::size_t>(u)])
        if (comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = next;
          q.push(v);
        }
    }
    ++next;
  }
  return comp;
}

SimilarityGraph similarity_from_weights(Eigen::SparseMatrix<double> weights) {
  if (weights.rows() != weights.cols()) throw ValidationError("similarity matrix must be square");
  SimilarityGraph g;
  g.E = std::move(weights);
  g.E.makeCompressed();
  g.degree = Eigen::VectorXd::Zero(g.E.rows());
  for (Index k = 0; k < g.E.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(g.E, k); it; ++it)
      g.degree[it.row()] += it.value();
  return g;
}

SimilarityGraph SimilarityGraph::induced(std::span<const Index> keep) const {
  std::vector<Index> pos(static_cast<std::size_t>(size()), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) pos[static_cast<std::size_t>(keep[k])] = static_cast<Index>(k);
  std::vector<Eigen::Triplet<double>> t;
  for (Index k = 0; k < E.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(E, k); it; ++it) {
      const Index a = pos[static_cast<std::size_t>(it.row())];
      const Index b = pos[static_cast<std::size_t>(it.col())];
      if (a >= 0 && b >= 0) t.emplace_back(a, b, it.value());
    }
  const auto m = static_cast<Index>(keep.size());
  Eigen::SparseMatrix<double> sub(m, m);
  sub.setFromTriplets(t.begin(), t.end());
  SimilarityGraph g = similarity_from_weights(std::move(sub));
  if (source.d.size() == size()) {
    g.source.d.resize(m);
    for (Index k = 0; k < m; ++k) g.source.d[k] = source.d[keep[static_cast<std::size_t>(k)]];
    g.source.sigma_d = source.sigma_d;
  }
  return g;
}

SimilarityGraph build_similarity(const DeviationVector& deviation, const AdjacencyMatrix& w) {
  if (deviation.d.size() != w.n)
    throw ValidationError("deviation length " + std::to_string(deviation.d.size()) +
                          " differs from adjacency size " + std::to_string(w.n));
  if (!(deviation.sigma_d > 0)) throw DegenerateSimilarityError();
  const double denom = 2.0 * deviation.sigma_d * deviation.sigma_d;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(w.edges.size() * 2);
  for (auto [a, b] : w.edges) {
    const double gap = deviation.d[a] - deviation.d[b];
    // Clamp to the smallest normal so the sparsity pattern equals W's.
    const double e = std::max(std::exp(-gap * gap / denom), std::numeric_limits<double>::min());
    t.emplace_back(a, b, e);
    t.emplace_back(b, a, e);
  }
  Eigen::SparseMatrix<double> m(w.n, w.n);
  m.setFromTriplets(t.begin(), t.end());
  SimilarityGraph g = similarity_from_weights(std::move(m));
  g.source = deviation;
  return g;
}

SimilarityGraph spatial_similarity(const AdjacencyMatrix& w) {
  return similarity_from_weights(w.to_sparse());
}

double ncut(const SimilarityGraph& graph, const Partition& partition) {
  if (partition.size() != graph.size())
    throw ValidationError("partition covers " + std::to_string(partition.size()) +
                          " units but graph has " + std::to_string(graph.size()));
  partition.validate();
  const auto k_count = static_cast<std::size_t>(partition.K);
  std::vector<double> cut(k_count, 0.0), vol(k_count, 0.0);
  for (Index i = 0; i < graph.size(); ++i)
    vol[static_cast<std::size_t>(partition.labels[static_cast<std::size_t>(i)])] += graph.degree[i];
  for (Index k = 0; k < graph.E.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(graph.E, k); it; ++it) {
      const int li = partition.labels[static_cast<std::size_t>(it.row())];
      const int lj = partition.labels[static_cast<std::size_t>(it.col())];
      if (li != lj) cut[static_cast<std::size_t>(li)] += it.value();
    }
  double total = 0.0;
  for (std::size_t k = 0; k < k_count; ++k) {
    if (!(vol[k] > 0)) throw ValidationError("degenerate partition: region " + std::to_string(k) + " has zero volume");
    total += cut[k] / vol[k];
  }
  return total;
}

}  // namespace rar
