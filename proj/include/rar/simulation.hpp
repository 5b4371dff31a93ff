#pragma once

#include "rar/affinity.hpp"
#include "rar/dataset.hpp"
#include "rar/inference.hpp"
#include "rar/partition.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace rar {

/// Planted three-region grid design.
struct SimConfig {
  Index rows = 30;
  Index cols = 30;
  /// True region c in {1, 2, 3} per cell (row-major). Empty selects three
  /// vertical bands of near-equal width.
  std::vector<int> region_layout;
  std::array<double, 3> beta_true{40.0, -30.0, 10.0};
  double mu_x = 5.0;
  double tau = 2.0;
  double sigma2 = 1.0;
  /// Kernel standard deviation in cells; 0 disables smoothing.
  double smooth_bandwidth = 1.5;
  std::uint64_t seed = 1;
  /// Fit with an intercept column. The generating model has none.
  bool fit_intercept = false;
};

/// Truth partition (labels 0..2) with rook adjacency. Throws
/// ValidationError for a band narrower than one column, a disconnected
/// region, or invalid parameters.
std::pair<Partition, AdjacencyMatrix> generate_map(const SimConfig& config);

/// Normalized discrete Gaussian smoothing on a rows x cols grid, truncated at
/// three bandwidths and renormalized at the boundary.
Eigen::VectorXd gaussian_smooth_residuals(std::span<const double> eps, Index rows, Index cols,
                                          double bandwidth);

struct SimulatedData {
  Dataset data;
  Partition truth;
  AdjacencyMatrix adjacency;
};

/// Gaussian data y_i = x_i beta^c(i) + smoothed noise. Deterministic in seed.
SimulatedData simulate_dataset(const SimConfig& config);

enum class KPolicy { Fixed3, BicSelected };

struct EvaluateOptions {
  KPolicy k_policy = KPolicy::Fixed3;
  int k_max = 6;
  SegmentOptions segment;
  /// Worker threads; results do not depend on this.
  int threads = 1;
};

/// Per-replicate outcome.
struct ReplicateResult {
  bool ok = false;
  std::string failure;
  /// Requested K (3 under the fixed policy, the BIC minimizer otherwise).
  int chosen_k = 0;
  int realized_k = 0;
  double adjusted_rand = 0.0;
  double rand = 0.0;
  /// Matched estimate per true region; matched[c] false when no estimated
  /// region was assigned to truth c.
  std::array<bool, 3> matched{};
  std::array<double, 3> beta{};
  std::array<double, 3> se{};
  std::array<bool, 3> covered{};
  double pooled_beta = 0.0;
  double pooled_se = 0.0;
  std::array<bool, 3> pooled_covered{};
};

struct RegionSummary {
  double mean = 0.0;
  double sd = 0.0;
  double mean_abs_bias = 0.0;
  double coverage = 0.0;
  Index n_matched = 0;
};

struct SimResult {
  std::vector<ReplicateResult> replicates;
  std::array<RegionSummary, 3> regions{};
  /// Pooled single-slope baseline: one mean/sd, coverage of each truth.
  double pooled_mean = 0.0;
  double pooled_sd = 0.0;
  std::array<double, 3> pooled_coverage{};
  double mean_adjusted_rand = 0.0;
  Index failures = 0;
  /// Histograms of chosen and realized K over successful replicates.
  std::vector<Index> chosen_k_counts;
  std::vector<Index> k_counts;
};

/// Matches estimated regions to truth by maximum unit overlap (Hungarian
/// assignment). Returns the estimated region index for each true region, or
/// -1 when unmatched.
std::vector<int> match_regions(const std::vector<int>& estimated, int k_est,
                               const std::vector<int>& truth, int k_true);

/// Hungarian algorithm on a rectangular cost matrix (rows <= cols after
/// internal transposition). Returns the column assigned to each row, -1 if
/// none.
std::vector<int> hungarian_min_cost(const Eigen::MatrixXd& cost);

ReplicateResult run_replicate(const SimConfig& config, const EvaluateOptions& options);

SimResult evaluate(int replicates, const SimConfig& config, const EvaluateOptions& options);

/// Seed for replicate `index` of a run seeded with `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, int index);

}  // namespace rar
