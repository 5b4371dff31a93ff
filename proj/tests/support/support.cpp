#include "support.hpp"

#include "rar/io.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace rar::testing {

std::vector<std::string> index_ids(Index n, const std::string& prefix) {
  std::vector<std::string> ids;
  for (Index i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

Dataset random_gaussian_dataset(Rng& rng, Index s, Index q, double noise) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Dataset d;
  d.unit_ids = index_ids(s);
  d.exposure.resize(s);
  d.covariates.resize(s, q);
  d.y.resize(s);
  for (Index j = 0; j < q; ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
  Eigen::VectorXd b(q + 2);
  for (Index j = 0; j < b.size(); ++j) b[j] = 2.0 * n01(rng);
  for (Index i = 0; i < s; ++i) {
    d.exposure[i] = n01(rng);
    for (Index j = 0; j < q; ++j) d.covariates(i, j) = n01(rng);
  }
  const Eigen::MatrixXd z = design_matrix(d);
  for (Index i = 0; i < s; ++i) d.y[i] = z.row(i).dot(b) + noise * n01(rng);
  return d;
}

Dataset random_poisson_dataset(Rng& rng, Index s, Index q) {
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> pop(50.0, 500.0);
  Dataset d;
  d.unit_ids = index_ids(s);
  d.exposure.resize(s);
  d.offset.resize(s);
  d.covariates.resize(s, q);
  d.y.resize(s);
  for (Index j = 0; j < q; ++j) d.covariate_names.push_back("x" + std::to_string(j + 1));
  const double b0 = -3.0 + 0.3 * n01(rng);
  const double b1 = 0.3 * n01(rng);
  for (Index i = 0; i < s; ++i) {
    d.exposure[i] = n01(rng);
    d.offset[i] = pop(rng);
    double eta = b0 + b1 * d.exposure[i];
    for (Index j = 0; j < q; ++j) {
      d.covariates(i, j) = n01(rng);
      eta += 0.1 * d.covariates(i, j);
    }
    std::poisson_distribution<int> pois(d.offset[i] * std::exp(eta));
    d.y[i] = pois(rng);
  }
  return d;
}

AdjacencyMatrix county_like_adjacency(Index s, Index cols, Index target_edges, std::uint64_t seed) {
  std::vector<std::pair<Index, Index>> edges;
  std::set<std::pair<Index, Index>> seen;
  auto add = [&](Index a, Index b) {
    if (a > b) std::swap(a, b);
    if (a == b || b >= s) return;
    if (seen.insert({a, b}).second) edges.emplace_back(a, b);
  };
  for (Index i = 0; i < s; ++i) {
    const Index c = i % cols;
    if (c + 1 < cols) add(i, i + 1);
    add(i, i + cols);
  }
  Rng rng(seed);
  std::uniform_int_distribution<Index> pick(0, s - 1);
  std::bernoulli_distribution left(0.5);
  Index guard = 0;
  while (static_cast<Index>(edges.size()) < target_edges && guard++ < 100 * target_edges) {
    const Index i = pick(rng);
    const Index c = i % cols;
    if (left(rng)) {
      if (c > 0) add(i, i + cols - 1);
    } else if (c + 1 < cols) {
      add(i, i + cols + 1);
    }
  }
  return AdjacencyMatrix::from_index_edges(s, edges);
}

Dataset county_like_dataset(Index s, Index cols, int blocks, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::uniform_real_distribution<double> log_pop(std::log(20.0), std::log(2000.0));
  const Index rows = (s + cols - 1) / cols;
  std::vector<double> slopes(static_cast<std::size_t>(blocks * blocks));
  for (auto& b : slopes) b = 0.08 * n01(rng);

  Dataset d;
  d.unit_ids = index_ids(s, "county");
  d.exposure.resize(s);
  d.offset.resize(s);
  d.covariates.resize(s, 2);
  d.covariate_names = {"poverty", "smoking"};
  d.y.resize(s);
  for (Index i = 0; i < s; ++i) {
    const Index r = i / cols;
    const Index c = i % cols;
    const auto zone = static_cast<std::size_t>((r * blocks / rows) * blocks + (c * blocks / cols));
    d.exposure[i] = 10.0 + 2.0 * std::sin(0.1 * static_cast<double>(r)) + 1.5 * n01(rng);
    d.offset[i] = std::exp(log_pop(rng));
    d.covariates(i, 0) = n01(rng);
    d.covariates(i, 1) = n01(rng);
    const double eta = -0.1 + slopes[zone] * (d.exposure[i] - 10.0) + 0.05 * d.covariates(i, 0) +
                       0.08 * d.covariates(i, 1);
    std::poisson_distribution<int> pois(d.offset[i] * std::exp(eta));
    d.y[i] = pois(rng);
  }
  return d;
}

Eigen::SparseMatrix<double> planted_block_weights(const std::vector<Index>& block_sizes,
                                                  double within, double between, Rng& rng) {
  Index n = 0;
  std::vector<Index> start;
  for (Index b : block_sizes) {
    start.push_back(n);
    n += b;
  }
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t b = 0; b < block_sizes.size(); ++b)
    for (Index i = start[b]; i < start[b] + block_sizes[b]; ++i)
      for (Index j = i + 1; j < start[b] + block_sizes[b]; ++j) {
        t.emplace_back(i, j, within);
        t.emplace_back(j, i, within);
      }
  for (std::size_t b = 0; b + 1 < block_sizes.size(); ++b) {
    std::uniform_int_distribution<Index> a(start[b], start[b] + block_sizes[b] - 1);
    std::uniform_int_distribution<Index> c(start[b + 1], start[b + 1] + block_sizes[b + 1] - 1);
    const Index i = a(rng), j = c(rng);
    t.emplace_back(i, j, between);
    t.emplace_back(j, i, between);
  }
  Eigen::SparseMatrix<double> w(n, n);
  w.setFromTriplets(t.begin(), t.end());
  return w;
}

Eigen::SparseMatrix<double> random_planted_graph(Rng& rng, Index n, std::vector<int>& truth,
                                                 double max_between) {
  std::uniform_int_distribution<Index> split(2, n - 2);
  std::uniform_real_distribution<double> strong(0.5, 1.0), weak(0.01, max_between), coin(0.0, 1.0);
  const Index cut = split(rng);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  truth.assign(static_cast<std::size_t>(n), 0);
  for (Index k = cut; k < n; ++k) truth[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = 1;

  std::vector<Eigen::Triplet<double>> t;
  auto link = [&](Index a, Index b, double v) {
    t.emplace_back(a, b, v);
    t.emplace_back(b, a, v);
  };
  bool crossed = false;
  for (Index a = 0; a < n; ++a)
    for (Index b = a + 1; b < n; ++b) {
      const bool same_block = (a < cut) == (b < cut);
      const Index u = order[static_cast<std::size_t>(a)], v = order[static_cast<std::size_t>(b)];
      if (same_block && (b == a + 1 || coin(rng) < 0.8)) {
        link(u, v, strong(rng));
      } else if (!same_block && (coin(rng) < 0.2 || (!crossed && a == cut - 1 && b == cut))) {
        link(u, v, weak(rng));
        crossed = true;
      }
    }
  Eigen::SparseMatrix<double> w(n, n);
  w.setFromTriplets(t.begin(), t.end());
  return w;
}

std::string dataset_csv(const Dataset& data) {
  std::string out = "unit_id,y";
  if (data.has_offset()) out += ",offset";
  out += ",exposure";
  for (const auto& n : data.covariate_names) out += "," + n;
  out += "\n";
  for (Index i = 0; i < data.size(); ++i) {
    out += data.unit_ids[static_cast<std::size_t>(i)] + "," + format_double(data.y[i]);
    if (data.has_offset()) out += "," + format_double(data.offset[i]);
    out += "," + format_double(data.exposure[i]);
    for (Index j = 0; j < data.n_covariates(); ++j)
      out += "," + format_double(data.covariates(i, j));
    out += "\n";
  }
  return out;
}

}  // namespace rar::testing
