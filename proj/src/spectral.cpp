#include "rar/spectral.hpp"

#include "rar/error.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>

namespace rar {

SpectralBasis spectral_basis(const SimilarityGraph& graph, Index k) {
  const Index n = graph.size();
  if (k < 1 || k > n)
    throw ValidationError("K = " + std::to_string(k) + " outside 1.." + std::to_string(n));
  for (Index i = 0; i < n; ++i)
    if (!(graph.degree[i] > 0))
      throw ValidationError("unit " + std::to_string(i) + " has zero degree in the similarity graph");

  SpectralBasis basis;
  basis.inv_sqrt_degree = graph.degree.array().rsqrt();

  // Dense column-major normalized affinity; only the lower triangle is read.
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Index c = 0; c < graph.E.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(graph.E, c); it; ++it)
      m(it.row(), it.col()) =
          it.value() * basis.inv_sqrt_degree[it.row()] * basis.inv_sqrt_degree[it.col()];

  Eigen::VectorXd w(n);
  Eigen::MatrixXd z(n, k);
  std::vector<lapack_int> support(static_cast<std::size_t>(2 * k));
  lapack_int found = 0;
  const auto ln = static_cast<lapack_int>(n);
  const lapack_int info = LAPACKE_dsyevr(
      LAPACK_COL_MAJOR, 'V', 'I', 'L', ln, m.data(), ln, 0.0, 0.0,
      static_cast<lapack_int>(n - k + 1), ln, 0.0, &found, w.data(), z.data(), ln,
      support.data());
  if (info != 0 || found != k)
    throw NumericalError("symmetric eigensolver failed (info = " + std::to_string(info) +
                         ", found " + std::to_string(found) + " of " + std::to_string(k) +
                         " eigenpairs)");

  // m was overwritten by the solver; check A v = lambda v on the sparse form.
  Eigen::SparseMatrix<double> a = graph.E;
  for (Index c = 0; c < a.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it)
      it.valueRef() *= basis.inv_sqrt_degree[it.row()] * basis.inv_sqrt_degree[it.col()];
  const double residual = ((a * z) - z * w.head(k).asDiagonal()).colwise().norm().maxCoeff();
  if (!(residual < 1e-8))
    throw NumericalError("eigensolver returned inaccurate eigenvectors (residual " +
                         std::to_string(residual) + ")");

  basis.eigenvalues.resize(k);
  basis.eigenvectors.resize(n, k);
  for (Index j = 0; j < k; ++j) {
    const Index src = k - 1 - j;
    basis.eigenvalues[j] = w[src];
    Eigen::VectorXd v = z.col(src);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    basis.eigenvectors.col(j) = v;
  }
  return basis;
}

Embedding embedding_from_basis(const SpectralBasis& basis, Index k) {
  if (k < 1 || k > basis.max_k())
    throw ValidationError("basis holds " + std::to_string(basis.max_k()) +
                          " eigenpairs, requested " + std::to_string(k));
  Embedding e;
  e.eigenvalues = basis.eigenvalues.head(k);
  e.X = basis.inv_sqrt_degree.asDiagonal() * basis.eigenvectors.leftCols(k);
  for (Index i = 0; i < e.X.rows(); ++i) {
    const double norm = e.X.row(i).norm();
    if (norm > 0) e.X.row(i) /= norm;
  }
  return e;
}

Embedding spectral_embed(const SimilarityGraph& graph, Index k) {
  return embedding_from_basis(spectral_basis(graph, k), k);
}

namespace {

std::vector<int> row_argmax(const Eigen::MatrixXd& m) {
  std::vector<int> labels(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < m.cols(); ++j)
      if (m(i, j) > m(i, best)) best = j;
    labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return labels;
}

// Moves the least well represented rows into empty columns. Returns true if
// anything changed.
bool fill_empty_columns(const Eigen::MatrixXd& xr, std::vector<int>& labels) {
  const Index k = xr.cols();
  std::vector<Index> counts(static_cast<std::size_t>(k), 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  bool changed = false;
  for (Index col = 0; col < k; ++col) {
    if (counts[static_cast<std::size_t>(col)] > 0) continue;
    Index worst = -1;
    double worst_score = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < xr.rows(); ++i) {
      const int l = labels[static_cast<std::size_t>(i)];
      if (counts[static_cast<std::size_t>(l)] < 2) continue;
      const double score = xr(i, l);
      if (score < worst_score) {
        worst_score = score;
        worst = i;
      }
    }
    if (worst < 0) break;
    --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(worst)])];
    labels[static_cast<std::size_t>(worst)] = static_cast<int>(col);
    ++counts[static_cast<std::size_t>(col)];
    changed = true;
  }
  return changed;
}

Partition partition_of(std::vector<int> labels, Index k) {
  Partition p;
  p.labels = std::move(labels);
  p.K = static_cast<int>(k);
  return p;
}

}  // namespace

Discretization discretize(const Embedding& embedding, std::uint64_t seed,
                          const DiscretizeOptions& options) {
  const Eigen::MatrixXd& x = embedding.X;
  const Index n = x.rows();
  const Index k = x.cols();
  if (n < 1 || k < 1) throw ValidationError("empty embedding");
  if (k > n) throw ValidationError("embedding has more columns than rows");

  Discretization out;
  if (k == 1) {
    out.partition = partition_of(std::vector<int>(static_cast<std::size_t>(n), 0), 1);
    out.rotation.R = Eigen::MatrixXd::Identity(1, 1);
    out.rotation.rho = static_cast<double>(n);
    out.converged = true;
    return out;
  }

  // Farthest-first initialization: each new column is the row least aligned
  // with the columns chosen so far.
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  Eigen::MatrixXd r(k, k);
  r.col(0) = x.row(pick(rng)).transpose();
  Eigen::VectorXd accumulated = Eigen::VectorXd::Zero(n);
  for (Index col = 1; col < k; ++col) {
    accumulated += (x * r.col(col - 1)).cwiseAbs();
    Index next = 0;
    accumulated.minCoeff(&next);
    r.col(col) = x.row(next).transpose();
  }

  double rho_prev = 0.0;
  double best_rho = -1.0;
  std::vector<int> best_labels;
  for (int iter = 1; iter <= options.max_outer; ++iter) {
    const Eigen::MatrixXd xr = x * r;
    std::vector<int> labels = row_argmax(xr);
    if (fill_empty_columns(xr, labels)) out.reseeded = true;

    // Y'X: per-class sums of embedding rows.
    Eigen::MatrixXd ytx = Eigen::MatrixXd::Zero(k, k);
    for (Index i = 0; i < n; ++i) ytx.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ytx, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double rho = svd.singularValues().sum();
    out.rho_trace.push_back(rho);
    out.iterations = iter;

    if (rho > best_rho) {
      best_rho = rho;
      best_labels = labels;
    }
    out.rotation.rho = rho;
    out.rotation.rho_prev = rho_prev;
    if (std::abs(rho - rho_prev) < options.epsilon) {
      out.converged = true;
      out.partition = partition_of(std::move(labels), k);
      out.rotation.R = r;
      break;
    }
    rho_prev = rho;
    r = svd.matrixV() * svd.matrixU().transpose();
    out.max_orthogonality_error =
        std::max(out.max_orthogonality_error,
                 (r.transpose() * r - Eigen::MatrixXd::Identity(k, k)).cwiseAbs().maxCoeff());
  }
  if (!out.converged) {
    out.partition = partition_of(std::move(best_labels), k);
    out.rotation.R = r;
  }
  return out;
}

namespace {

// Components of each label's induced subgraph: component id per unit.
std::vector<int> label_components(const std::vector<int>& labels, const AdjacencyMatrix& w,
                                  int& count) {
  std::vector<int> comp(labels.size(), -1);
  count = 0;
  std::queue<Index> q;
  for (Index s = 0; s < w.n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    const int label = labels[static_cast<std::size_t>(s)];
    comp[static_cast<std::size_t>(s)] = count;
    q.push(s);
    while (!q.empty()) {
      const Index u = q.front();
      q.pop();
      for (Index v : w.neighbors[static_cast<std::size_t>(u)]) {
        auto& cv = comp[static_cast<std::size_t>(v)];
        if (cv < 0 && labels[static_cast<std::size_t>(v)] == label) {
          cv = count;
          q.push(v);
        }
      }
    }
    ++count;
  }
  return comp;
}

}  // namespace

bool is_contiguous(const Partition& partition, const AdjacencyMatrix& w) {
  int count = 0;
  label_components(partition.labels, w, count);
  return count == partition.K;
}

Partition enforce_contiguity(const Partition& partition, const AdjacencyMatrix& w,
                             const SimilarityGraph& graph) {
  if (partition.size() != w.n || graph.size() != w.n)
    throw ValidationError("partition, adjacency and similarity sizes differ");

  std::vector<int> labels = partition.labels;
  int next_label = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;

  for (;;) {
    int count = 0;
    const std::vector<int> comp = label_components(labels, w, count);
    std::vector<Index> comp_size(static_cast<std::size_t>(count), 0);
    std::vector<int> comp_label(static_cast<std::size_t>(count), -1);
    for (Index i = 0; i < w.n; ++i) {
      ++comp_size[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])];
      comp_label[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])] =
          labels[static_cast<std::size_t>(i)];
    }

    // The largest component of each label keeps it (ties: lowest first unit,
    // which is the lowest component id).
    std::vector<int> keeper_of_label(static_cast<std::size_t>(next_label), -1);
    for (int c = 0; c < count; ++c) {
      auto& kc = keeper_of_label[static_cast<std::size_t>(comp_label[static_cast<std::size_t>(c)])];
      if (kc < 0 || comp_size[static_cast<std::size_t>(c)] > comp_size[static_cast<std::size_t>(kc)]) kc = c;
    }
    std::vector<bool> keeper(static_cast<std::size_t>(count), false);
    for (int kc : keeper_of_label)
      if (kc >= 0) keeper[static_cast<std::size_t>(kc)] = true;
    if (std::all_of(keeper.begin(), keeper.end(), [](bool b) { return b; })) break;

    // Boundary similarity and edge count from every fragment to each
    // neighboring keeper region.
    struct Link {
      double similarity = 0.0;
      Index edges = 0;
    };
    std::vector<std::vector<std::pair<int, Link>>> links(static_cast<std::size_t>(count));
    for (auto [a, b] : w.edges) {
      const int ca = comp[static_cast<std::size_t>(a)], cb = comp[static_cast<std::size_t>(b)];
      if (ca == cb) continue;
      const double e = graph.weight(a, b);
      auto add = [&](int from, int to) {
        if (keeper[static_cast<std::size_t>(from)] || !keeper[static_cast<std::size_t>(to)]) return;
        auto& lst = links[static_cast<std::size_t>(from)];
        const int region = comp_label[static_cast<std::size_t>(to)];
        auto it = std::find_if(lst.begin(), lst.end(), [&](const auto& p) { return p.first == region; });
        if (it == lst.end()) {
          lst.push_back({region, {}});
          it = std::prev(lst.end());
        }
        it->second.similarity += e;
        it->second.edges += 1;
      };
      add(ca, cb);
      add(cb, ca);
    }

    bool merged_any = false;
    std::vector<int> new_label(static_cast<std::size_t>(count), -1);
    for (int c = 0; c < count; ++c) {
      if (keeper[static_cast<std::size_t>(c)]) continue;
      const auto& lst = links[static_cast<std::size_t>(c)];
      if (lst.empty()) continue;
      const bool any_similarity =
          std::any_of(lst.begin(), lst.end(), [](const auto& p) { return p.second.similarity > 0; });
      int best_region = -1;
      double best_score = -1.0;
      for (const auto& [region, link] : lst) {
        const double score = any_similarity ? link.similarity : static_cast<double>(link.edges);
        if (score > best_score || (score == best_score && region < best_region)) {
          best_score = score;
          best_region = region;
        }
      }
      new_label[static_cast<std::size_t>(c)] = best_region;
      merged_any = true;
    }

    if (!merged_any) {
      // Remaining fragments touch no keeper (e.g. a separate W component):
      // promote the largest to a region of its own.
      int promote = -1;
      for (int c = 0; c < count; ++c)
        if (!keeper[static_cast<std::size_t>(c)] &&
            (promote < 0 || comp_size[static_cast<std::size_t>(c)] > comp_size[static_cast<std::size_t>(promote)]))
          promote = c;
      new_label[static_cast<std::size_t>(promote)] = next_label++;
    }
    for (Index i = 0; i < w.n; ++i) {
      const int nl = new_label[static_cast<std::size_t>(comp[static_cast<std::size_t>(i)])];
      if (nl >= 0) labels[static_cast<std::size_t>(i)] = nl;
    }
  }

  Partition out = Partition::from_labels(labels);
  out.contiguous = true;
  return out;
}

std::uint64_t restart_seed(std::uint64_t seed, int index) {
  // splitmix64 finalizer over the (seed, index) pair.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::vector<Index> units_with_degree(const SimilarityGraph& graph) {
  std::vector<Index> keep;
  for (Index i = 0; i < graph.size(); ++i)
    if (graph.degree[i] > 0) keep.push_back(i);
  return keep;
}

std::vector<Index> non_isolated(const AdjacencyMatrix& w) {
  std::vector<Index> keep;
  for (Index i = 0; i < w.n; ++i)
    if (w.degree(i) > 0) keep.push_back(i);
  return keep;
}

}  // namespace

double ncut_connected(const SimilarityGraph& graph, const Partition& partition) {
  const auto keep = units_with_degree(graph);
  if (static_cast<Index>(keep.size()) == graph.size()) return ncut(graph, partition);
  std::vector<int> sub;
  sub.reserve(keep.size());
  for (Index i : keep) sub.push_back(partition.labels[static_cast<std::size_t>(i)]);
  return ncut(graph.induced(keep), Partition::from_labels(sub));
}

Segmentation segment_with_basis(const SimilarityGraph& graph, const AdjacencyMatrix& w,
                                const SpectralBasis& basis, Index k, std::uint64_t seed,
                                const SegmentOptions& options) {
  if (graph.size() != w.n) throw ValidationError("similarity and adjacency sizes differ");
  if (k < 1 || k > w.n)
    throw ValidationError("K = " + std::to_string(k) + " outside 1.." + std::to_string(w.n));
  if (options.restarts < 1) throw ValidationError("restarts must be at least 1");

  const auto working = non_isolated(w);
  const auto n_working = static_cast<Index>(working.size());
  const Index k_working = std::min(k, n_working);

  auto assemble = [&](const std::vector<int>& working_labels) {
    std::vector<int> labels(static_cast<std::size_t>(w.n), -1);
    for (std::size_t j = 0; j < working.size(); ++j)
      labels[static_cast<std::size_t>(working[j])] = working_labels[j];
    int next = static_cast<int>(k_working);
    for (auto& l : labels)
      if (l < 0) l = next++;
    return enforce_contiguity(Partition::from_labels(labels), w, graph);
  };

  Segmentation best;
  best.ncut = std::numeric_limits<double>::infinity();
  if (k_working <= 1) {
    best.partition = assemble(std::vector<int>(working.size(), 0));
    best.ncut = n_working > 0 ? ncut_connected(graph, best.partition) : 0.0;
    best.converged = true;
    return best;
  }
  if (basis.eigenvectors.rows() != n_working)
    throw ValidationError("spectral basis does not match the non-isolated units");

  const Embedding embedding = embedding_from_basis(basis, k_working);
  for (int r = 0; r < options.restarts; ++r) {
    const Discretization d = discretize(embedding, restart_seed(seed, r), options.discretize);
    Partition candidate = assemble(d.partition.labels);
    const double score = ncut_connected(graph, candidate);
    if (score < best.ncut) {
      best.ncut = score;
      best.partition = std::move(candidate);
      best.best_restart = r;
      best.converged = d.converged;
    }
  }
  return best;
}

Segmentation segment(const SimilarityGraph& graph, const AdjacencyMatrix& w, Index k,
                     std::uint64_t seed, const SegmentOptions& options) {
  if (graph.size() != w.n) throw ValidationError("similarity and adjacency sizes differ");
  if (k < 1 || k > w.n)
    throw ValidationError("K = " + std::to_string(k) + " outside 1.." + std::to_string(w.n));
  const auto working = non_isolated(w);
  const Index k_working = std::min(k, static_cast<Index>(working.size()));
  SpectralBasis basis;
  if (k_working > 1) {
    basis = static_cast<Index>(working.size()) == w.n
                ? spectral_basis(graph, k_working)
                : spectral_basis(graph.induced(working), k_working);
  }
  return segment_with_basis(graph, w, basis, k, seed, options);
}

}  // namespace rar
