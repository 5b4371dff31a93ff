#include "rar/partition.hpp"

#include "rar/error.hpp"

#include <map>
#include <unordered_map>

namespace rar {

Partition Partition::from_labels(const std::vector<int>& raw) {
  Partition p;
  p.labels.resize(raw.size());
  std::unordered_map<int, int> remap;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = remap.try_emplace(raw[i], static_cast<int>(remap.size()));
    p.labels[i] = it->second;
  }
  p.K = static_cast<int>(remap.size());
  return p;
}

std::vector<Index> Partition::region_sizes() const {
  std::vector<Index> sizes(static_cast<std::size_t>(std::max(K, 0)), 0);
  for (int l : labels) ++sizes[static_cast<std::size_t>(l)];
  return sizes;
}

std::vector<std::vector<Index>> Partition::members() const {
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(std::max(K, 0)));
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[static_cast<std::size_t>(labels[i])].push_back(static_cast<Index>(i));
  return out;
}

void Partition::validate() const {
  if (K < 1) throw ValidationError("partition must have at least one region");
  std::vector<bool> used(static_cast<std::size_t>(K), false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    if (l < 0 || l >= K)
      throw ValidationError("label " + std::to_string(l) + " at unit " + std::to_string(i) +
                            " outside 0.." + std::to_string(K - 1));
    used[static_cast<std::size_t>(l)] = true;
  }
  for (int k = 0; k < K; ++k)
    if (!used[static_cast<std::size_t>(k)])
      throw ValidationError("region " + std::to_string(k) + " has no units");
}

namespace {

struct PairCounts {
  double pairs_both = 0;  // sum over contingency cells of C(n_ij, 2)
  double pairs_a = 0;
  double pairs_b = 0;
  double total = 0;
};

double choose2(double n) { return n * (n - 1) / 2.0; }

PairCounts pair_counts(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("labelings differ in length");
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1;
    rows[a[i]] += 1;
    cols[b[i]] += 1;
  }
  PairCounts c;
  for (const auto& [key, n] : cells) c.pairs_both += choose2(n);
  for (const auto& [key, n] : rows) c.pairs_a += choose2(n);
  for (const auto& [key, n] : cols) c.pairs_b += choose2(n);
  c.total = choose2(static_cast<double>(a.size()));
  return c;
}

}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const PairCounts c = pair_counts(a, b);
  if (c.total == 0) return 1.0;
  const double expected = c.pairs_a * c.pairs_b / c.total;
  const double max_index = 0.5 * (c.pairs_a + c.pairs_b);
  if (max_index == expected) return 1.0;
  return (c.pairs_both - expected) / (max_index - expected);
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  const PairCounts c = pair_counts(a, b);
  if (c.total == 0) return 1.0;
  // agreements = pairs together in both + pairs apart in both
  const double apart_both = c.total - c.pairs_a - c.pairs_b + c.pairs_both;
  return (c.pairs_both + apart_both) / c.total;
}

}  // namespace rar
