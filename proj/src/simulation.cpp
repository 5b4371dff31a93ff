#include "rar/simulation.hpp"

#include "rar/error.hpp"
#include "rar/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <thread>

namespace rar {
namespace {

std::vector<int> default_layout(Index rows, Index cols) {
  if (cols < 3)
    throw ValidationError("three vertical bands need at least 3 columns, got " +
                          std::to_string(cols));
  std::vector<Index> width(3, cols / 3);
  for (Index b = 0; b < cols % 3; ++b) ++width[static_cast<std::size_t>(b)];
  std::vector<int> band_of_col;
  for (int b = 0; b < 3; ++b)
    for (Index j = 0; j < width[static_cast<std::size_t>(b)]; ++j) band_of_col.push_back(b + 1);
  std::vector<int> layout(static_cast<std::size_t>(rows * cols));
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c)
      layout[static_cast<std::size_t>(r * cols + c)] = band_of_col[static_cast<std::size_t>(c)];
  return layout;
}

// Kahan-Neumaier accumulation so aggregates do not depend on magnitude order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

void validate_config(const SimConfig& config) {
  if (config.rows < 1 || config.cols < 1) throw ValidationError("grid dimensions must be positive");
  if (!(config.tau > 0)) throw ValidationError("tau must be positive");
  if (!(config.sigma2 >= 0)) throw ValidationError("sigma2 must be non-negative");
  if (!(config.smooth_bandwidth >= 0)) throw ValidationError("bandwidth must be non-negative");
}

}  // namespace

std::pair<Partition, AdjacencyMatrix> generate_map(const SimConfig& config) {
  validate_config(config);
  AdjacencyMatrix w = grid_adjacency(config.rows, config.cols);
  std::vector<int> layout = config.region_layout.empty()
                                ? default_layout(config.rows, config.cols)
                                : config.region_layout;
  if (static_cast<Index>(layout.size()) != config.rows * config.cols)
    throw ValidationError("region layout has " + std::to_string(layout.size()) +
                          " cells, grid has " + std::to_string(config.rows * config.cols));

  Partition truth;
  truth.K = 3;
  truth.labels.resize(layout.size());
  for (std::size_t i = 0; i < layout.size(); ++i) {
    if (layout[i] < 1 || layout[i] > 3)
      throw ValidationError("layout region " + std::to_string(layout[i]) + " outside 1..3");
    truth.labels[i] = layout[i] - 1;
  }
  truth.validate();
  if (!is_contiguous(truth, w)) throw ValidationError("every layout region must be connected");
  truth.contiguous = true;
  return {std::move(truth), std::move(w)};
}

Eigen::VectorXd gaussian_smooth_residuals(std::span<const double> eps, Index rows, Index cols,
                                          double bandwidth) {
  if (static_cast<Index>(eps.size()) != rows * cols)
    throw ValidationError("residual vector does not match grid size");
  if (!(bandwidth >= 0)) throw ValidationError("bandwidth must be non-negative");
  Eigen::Map<const Eigen::VectorXd> in(eps.data(), static_cast<Index>(eps.size()));
  if (bandwidth == 0) return in;

  const auto radius = static_cast<Index>(std::floor(3.0 * bandwidth));
  std::vector<double> kernel(static_cast<std::size_t>(radius + 1));
  for (Index o = 0; o <= radius; ++o)
    kernel[static_cast<std::size_t>(o)] =
        std::exp(-static_cast<double>(o * o) / (2.0 * bandwidth * bandwidth));

  // Boundary-renormalized 2-D kernel as two renormalized 1-D passes.
  auto pass = [&](const Eigen::VectorXd& src, bool along_cols) {
    Eigen::VectorXd dst(src.size());
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) {
        double acc = 0.0, norm = 0.0;
        for (Index o = -radius; o <= radius; ++o) {
          const Index rr = along_cols ? r : r + o;
          const Index cc = along_cols ? c + o : c;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const double k = kernel[static_cast<std::size_t>(std::abs(o))];
          acc += k * src[rr * cols + cc];
          norm += k;
        }
        dst[r * cols + c] = acc / norm;
      }
    return dst;
  };
  return pass(pass(in, true), false);
}

SimulatedData simulate_dataset(const SimConfig& config) {
  auto [truth, w] = generate_map(config);
  const Index s = config.rows * config.cols;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> exposure_dist(config.mu_x, config.tau);
  std::normal_distribution<double> noise_dist(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(s)), eps(static_cast<std::size_t>(s));
  for (auto& v : x) v = exposure_dist(rng);
  const double sigma = std::sqrt(config.sigma2);
  for (auto& v : eps) v = sigma * noise_dist(rng);
  const Eigen::VectorXd smooth =
      gaussian_smooth_residuals(eps, config.rows, config.cols, config.smooth_bandwidth);

  SimulatedData out;
  out.data.unit_ids.reserve(static_cast<std::size_t>(s));
  out.data.y.resize(s);
  out.data.exposure.resize(s);
  out.data.covariates.resize(s, 0);
  out.data.intercept = config.fit_intercept;
  for (Index i = 0; i < s; ++i) {
    out.data.unit_ids.push_back("r" + std::to_string(i / config.cols) + "c" +
                                std::to_string(i % config.cols));
    const double beta = config.beta_true[static_cast<std::size_t>(truth.labels[static_cast<std::size_t>(i)])];
    out.data.exposure[i] = x[static_cast<std::size_t>(i)];
    out.data.y[i] = x[static_cast<std::size_t>(i)] * beta + smooth[i];
  }
  out.truth = std::move(truth);
  out.adjacency = std::move(w);
  return out;
}

std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost) {
  if (cost.rows() > cost.cols()) {
    const std::vector<int> t = hungarian_min_cost(cost.transpose());
    std::vector<int> out(static_cast<std::size_t>(cost.rows()), -1);
    for (std::size_t j = 0; j < t.size(); ++j)
      if (t[j] >= 0) out[static_cast<std::size_t>(t[j])] = static_cast<int>(j);
    return out;
  }
  // Potentials formulation, 1-based with a sentinel column 0.
  const Index n = cost.rows(), m = cost.cols();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(static_cast<std::size_t>(n + 1), 0.0), v(static_cast<std::size_t>(m + 1), 0.0);
  std::vector<Index> p(static_cast<std::size_t>(m + 1), 0), way(static_cast<std::size_t>(m + 1), 0);
  for (Index i = 1; i <= n; ++i) {
    p[0] = i;
    Index j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(m + 1), inf);
    std::vector<bool> used(static_cast<std::size_t>(m + 1), false);
    do {
      used[static_cast<std::size_t>(j0)] = true;
      const Index i0 = p[static_cast<std::size_t>(j0)];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (Index j = 0; j <= m; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const Index j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(static_cast<std::size_t>(n), -1);
  for (Index j = 1; j <= m; ++j)
    if (p[static_cast<std::size_t>(j)] != 0)
      assignment[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = static_cast<int>(j - 1);
  return assignment;
}

std::vector<int> match_regions(const std::vector<int>& estimated, int k_est,
                               const std::vector<int>& truth, int k_true) {
  if (estimated.size() != truth.size()) throw ValidationError("labelings differ in length");
  Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(k_true, k_est);
  for (std::size_t i = 0; i < truth.size(); ++i) overlap(truth[i], estimated[i]) += 1.0;
  const std::vector<int> assignment = hungarian_min_cost(-overlap);
  std::vector<int> out(static_cast<std::size_t>(k_true), -1);
  for (int c = 0; c < k_true; ++c) {
    const int k = assignment[static_cast<std::size_t>(c)];
    if (k >= 0 && overlap(c, k) > 0) out[static_cast<std::size_t>(c)] = k;
  }
  return out;
}

std::uint64_t replicate_seed(std::uint64_t seed, int index) {
  return restart_seed(seed ^ 0xA5A5A5A5DEADBEEFULL, index);
}

ReplicateResult run_replicate(const SimConfig& config, const EvaluateOptions& options) {
  ReplicateResult rep;
  try {
    const SimulatedData sim = simulate_dataset(config);
    const Family family = Family::GaussianIdentity;
    const StepOneResult step_one = compute_similarity(sim.data, sim.adjacency, family);

    Partition partition;
    if (options.k_policy == KPolicy::Fixed3) {
      partition = segment(step_one.graph, sim.adjacency, 3, config.seed, options.segment).partition;
      rep.chosen_k = 3;
    } else {
      SelectOptions sel;
      sel.k_min = 1;
      sel.k_max = options.k_max;
      sel.seed = config.seed;
      sel.segment = options.segment;
      const SelectionTrace trace = select_k(sim.data, sim.adjacency, family, step_one, sel);
      if (!trace.chosen()) throw NumericalError("no candidate K could be fitted");
      partition = trace.chosen()->partition;
      rep.chosen_k = trace.chosen_k;
    }
    rep.realized_k = partition.K;
    rep.adjusted_rand = adjusted_rand_index(partition.labels, sim.truth.labels);
    rep.rand = rand_index(partition.labels, sim.truth.labels);

    const auto regions = fit_stratified(sim.data, partition, family);
    const auto match = match_regions(partition.labels, partition.K, sim.truth.labels, 3);
    for (std::size_t c = 0; c < 3; ++c) {
      const int k = match[c];
      if (k < 0 || !regions[static_cast<std::size_t>(k)].ok) continue;
      const auto& est = regions[static_cast<std::size_t>(k)];
      rep.matched[c] = true;
      rep.beta[c] = est.beta;
      rep.se[c] = est.se;
      rep.covered[c] = est.ci_low <= config.beta_true[c] && config.beta_true[c] <= est.ci_high;
    }

    const GlmFit& pooled = step_one.global_fit;
    rep.pooled_beta = pooled.beta_hat[pooled.exposure_column];
    rep.pooled_se = pooled.se_exposure;
    for (std::size_t c = 0; c < 3; ++c)
      rep.pooled_covered[c] =
          std::abs(rep.pooled_beta - config.beta_true[c]) <= kZ975 * rep.pooled_se;
    rep.ok = true;
  } catch (const Error& e) {
    rep.failure = e.what();
  }
  return rep;
}

SimResult evaluate(int replicates, const SimConfig& config, const EvaluateOptions& options) {
  if (replicates < 1) throw ValidationError("replicates must be at least 1");
  validate_config(config);

  SimResult out;
  out.replicates.resize(static_cast<std::size_t>(replicates));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r = next++; r < replicates; r = next++) {
      SimConfig cfg = config;
      cfg.seed = replicate_seed(config.seed, r);
      out.replicates[static_cast<std::size_t>(r)] = run_replicate(cfg, options);
    }
  };
  const int threads = std::clamp(options.threads, 1, replicates);
  std::vector<std::thread> pool;
  for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::array<CompensatedSum, 3> sum, sum_sq, abs_bias;
  std::array<Index, 3> hits{};
  CompensatedSum pooled_sum, pooled_sq, ari_sum;
  std::array<Index, 3> pooled_hits{};
  Index ok = 0;
  for (const auto& rep : out.replicates) {
    if (!rep.ok) {
      ++out.failures;
      continue;
    }
    ++ok;
    auto tally = [](std::vector<Index>& counts, int k) {
      if (static_cast<Index>(counts.size()) <= k) counts.resize(static_cast<std::size_t>(k + 1), 0);
      ++counts[static_cast<std::size_t>(k)];
    };
    tally(out.chosen_k_counts, rep.chosen_k);
    tally(out.k_counts, rep.realized_k);
    ari_sum.add(rep.adjusted_rand);
    pooled_sum.add(rep.pooled_beta);
    pooled_sq.add(rep.pooled_beta * rep.pooled_beta);
    for (std::size_t c = 0; c < 3; ++c) {
      if (rep.pooled_covered[c]) ++pooled_hits[c];
      if (rep.covered[c]) ++hits[c];
      if (!rep.matched[c]) continue;
      ++out.regions[c].n_matched;
      sum[c].add(rep.beta[c]);
      sum_sq[c].add(rep.beta[c] * rep.beta[c]);
      abs_bias[c].add(std::abs(rep.beta[c] - config.beta_true[c]));
    }
  }

  auto mean_sd = [](const CompensatedSum& s, const CompensatedSum& sq, Index n) {
    if (n == 0) return std::pair{std::numeric_limits<double>::quiet_NaN(), 0.0};
    const double mean = s.value() / static_cast<double>(n);
    if (n < 2) return std::pair{mean, 0.0};
    const double var = (sq.value() - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
    return std::pair{mean, std::sqrt(std::max(0.0, var))};
  };

  for (std::size_t c = 0; c < 3; ++c) {
    auto& reg = out.regions[c];
    std::tie(reg.mean, reg.sd) = mean_sd(sum[c], sum_sq[c], reg.n_matched);
    reg.mean_abs_bias = reg.n_matched > 0 ? abs_bias[c].value() / static_cast<double>(reg.n_matched)
                                          : std::numeric_limits<double>::quiet_NaN();
    // Unmatched replicates count as not covered.
    reg.coverage = ok > 0 ? static_cast<double>(hits[c]) / static_cast<double>(ok) : 0.0;
    out.pooled_coverage[c] =
        ok > 0 ? static_cast<double>(pooled_hits[c]) / static_cast<double>(ok) : 0.0;
  }
  std::tie(out.pooled_mean, out.pooled_sd) = mean_sd(pooled_sum, pooled_sq, ok);
  out.mean_adjusted_rand = ok > 0 ? ari_sum.value() / static_cast<double>(ok) : 0.0;
  return out;
}

}  // namespace rar
