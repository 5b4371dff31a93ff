#pragma once

#include "rar/affinity.hpp"
#include "rar/glm.hpp"
#include "rar/partition.hpp"
#include "rar/spectral.hpp"

#include <optional>
#include <string>
#include <vector>

namespace rar {

inline constexpr double kZ975 = 1.959963984540054;

/// Region-specific exposure association.
struct RegionEstimate {
  int region = 0;
  Index n_units = 0;
  bool ok = false;
  /// Why the region could not be fitted (empty when ok).
  std::string failure;
  double beta = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Remaining design coefficients in design order: intercept (if any),
  /// then covariates.
  Eigen::VectorXd eta;
  double loglik = 0.0;
  bool converged = false;
};

/// Independent GLM per region. Regions with fewer than q + 3 units or a
/// singular design are returned with ok = false.
std::vector<RegionEstimate> fit_stratified(const Dataset& data, const Partition& partition,
                                           Family family, const GlmOptions& options = {});

double total_loglik(const std::vector<RegionEstimate>& regions);

/// Free parameters of a K-region stratified fit: K design coefficients
/// (intercept, exposure, q covariates) plus one residual variance per region
/// for the Gaussian family.
Index stratified_param_count(int k, Index coefficients_per_region, Family family);

struct InteractionFit {
  GlmFit fit;
  /// Exposure slope of each region (baseline + interaction).
  std::vector<double> region_beta;
  std::vector<double> region_se;
  /// Free parameters including a Gaussian residual variance.
  Index n_params = 0;
};

/// Single GLM with K - 1 region dummies and K - 1 region x exposure terms.
/// With fully_stratified every covariate is also interacted with region.
/// Designs without an intercept get no region dummies.
InteractionFit fit_interaction(const Dataset& data, const Partition& partition, Family family,
                               bool fully_stratified, const GlmOptions& options = {});

struct LikelihoodRatio {
  double statistic = 0.0;
  Index df = 0;
  /// Nominal chi-square p-value; ignores that the partition was estimated.
  double p_value = 1.0;
};

LikelihoodRatio likelihood_ratio(double loglik_null, double loglik_alt, Index df);

/// -2 loglik + n_params ln(S).
double bic(double total_loglik, Index n_params, Index s);

/// Moran's I of `values` under adjacency W. Throws ValidationError for
/// constant input or an edgeless W.
double morans_i(const Eigen::VectorXd& values, const AdjacencyMatrix& w);

/// Deviation-based similarity for a dataset: global fit, DFBETA, kernel.
/// Falls back to the pure spatial graph when all deviations coincide.
struct StepOneResult {
  GlmFit global_fit;
  DeviationVector deviation;
  SimilarityGraph graph;
  bool spatial_fallback = false;
};
StepOneResult compute_similarity(const Dataset& data, const AdjacencyMatrix& w, Family family,
                                 const GlmOptions& options = {});

struct SelectionCandidate {
  int k = 0;
  int realized_k = 0;
  bool ok = false;
  std::string failure;
  double bic = 0.0;
  double loglik = 0.0;
  Index n_params = 0;
  double ncut = 0.0;
  Partition partition;
};

struct SelectionTrace {
  std::vector<SelectionCandidate> candidates;
  int chosen_k = 0;
  /// Index into candidates of the BIC minimizer, -1 if none succeeded.
  int chosen_index = -1;

  const SelectionCandidate* chosen() const {
    return chosen_index >= 0 ? &candidates[static_cast<std::size_t>(chosen_index)] : nullptr;
  }
};

struct SelectOptions {
  int k_min = 1;
  int k_max = 6;
  std::uint64_t seed = 1;
  SegmentOptions segment;
  GlmOptions glm;
};

/// Runs the full pipeline for every K in [k_min, k_max] and keeps the BIC
/// minimizer (ties toward smaller K). K = 1 skips segmentation.
SelectionTrace select_k(const Dataset& data, const AdjacencyMatrix& w, Family family,
                        const SelectOptions& options);

/// Same, reusing a precomputed step-one result.
SelectionTrace select_k(const Dataset& data, const AdjacencyMatrix& w, Family family,
                        const StepOneResult& step_one, const SelectOptions& options);

/// Moran's I of each region's residuals on the region-induced adjacency;
/// nullopt where undefined (no internal edges, constant residuals, failed fit).
std::vector<std::optional<double>> regional_morans_i(const Dataset& data,
                                                     const Partition& partition,
                                                     const AdjacencyMatrix& w, Family family,
                                                     const GlmOptions& options = {});

}  // namespace rar
