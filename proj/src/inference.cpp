#include "rar/inference.hpp"

#include "rar/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace rar {

std::vector<RegionEstimate> fit_stratified(const Dataset& data, const Partition& partition,
                                           Family family, const GlmOptions& options) {
  data.validate(family);
  if (partition.size() != data.size())
    throw ValidationError("partition covers " + std::to_string(partition.size()) +
                          " units but dataset has " + std::to_string(data.size()));
  partition.validate();

  const Index min_units = data.n_covariates() + 3;
  const auto members = partition.members();
  std::vector<RegionEstimate> out;
  out.reserve(members.size());
  for (std::size_t k = 0; k < members.size(); ++k) {
    RegionEstimate est;
    est.region = static_cast<int>(k);
    est.n_units = static_cast<Index>(members[k].size());
    if (est.n_units < min_units) {
      est.failure = "under-identified: " + std::to_string(est.n_units) + " units, need " +
                    std::to_string(min_units);
      out.push_back(std::move(est));
      continue;
    }
    try {
      const Dataset sub = data.subset(members[k]);
      const GlmFit fit = fit_glm(sub, family, options);
      est.ok = true;
      est.converged = fit.converged;
      est.beta = fit.beta_hat[fit.exposure_column];
      est.se = fit.se_exposure;
      est.ci_low = est.beta - kZ975 * est.se;
      est.ci_high = est.beta + kZ975 * est.se;
      est.eta.resize(fit.n_coef() - 1);
      for (Index j = 0, o = 0; j < fit.n_coef(); ++j)
        if (j != fit.exposure_column) est.eta[o++] = fit.beta_hat[j];
      est.loglik = fit.loglik;
    } catch (const Error& e) {
      est.failure = e.what();
    }
    out.push_back(std::move(est));
  }
  return out;
}

double total_loglik(const std::vector<RegionEstimate>& regions) {
  double total = 0.0;
  for (const auto& r : regions) total += r.loglik;
  return total;
}

Index stratified_param_count(int k, Index coefficients_per_region, Family family) {
  const Index per_region = coefficients_per_region + (family == Family::GaussianIdentity ? 1 : 0);
  return static_cast<Index>(k) * per_region;
}

InteractionFit fit_interaction(const Dataset& data, const Partition& partition, Family family,
                               bool fully_stratified, const GlmOptions& options) {
  data.validate(family);
  if (partition.size() != data.size())
    throw ValidationError("partition does not match dataset size");
  partition.validate();

  const Index s = data.size();
  const Index q = data.n_covariates();
  const Index k = partition.K;
  const Index base = n_design_columns(data);
  const Index expo = exposure_column(data);
  const Index extra = k - 1;
  const Index n_dummies = data.intercept ? extra : 0;
  const Index p = base + n_dummies + extra + (fully_stratified ? q * extra : 0);

  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(s, p);
  std::vector<std::string> names = design_column_names(data);
  z.leftCols(base) = design_matrix(data);
  const Index dummy0 = base;
  const Index slope0 = dummy0 + n_dummies;
  const Index cov0 = slope0 + extra;
  for (Index r = 1; r <= n_dummies; ++r) names.push_back("region[" + std::to_string(r) + "]");
  for (Index r = 1; r < k; ++r) names.push_back("exposure:region[" + std::to_string(r) + "]");
  if (fully_stratified)
    for (Index r = 1; r < k; ++r)
      for (Index j = 0; j < q; ++j)
        names.push_back(data.covariate_names[static_cast<std::size_t>(j)] + ":region[" +
                        std::to_string(r) + "]");

  for (Index i = 0; i < s; ++i) {
    const Index r = partition.labels[static_cast<std::size_t>(i)];
    if (r == 0) continue;
    if (n_dummies > 0) z(i, dummy0 + r - 1) = 1.0;
    z(i, slope0 + r - 1) = data.exposure[i];
    if (fully_stratified)
      for (Index j = 0; j < q; ++j) z(i, cov0 + (r - 1) * q + j) = data.covariates(i, j);
  }

  InteractionFit out;
  out.fit = fit_glm(z, data.y, log_offset(data, family), family, std::move(names), expo, options);
  out.n_params = p + (family == Family::GaussianIdentity ? 1 : 0);
  const auto& b = out.fit.beta_hat;
  const auto& v = out.fit.cov_beta;
  for (Index r = 0; r < k; ++r) {
    if (r == 0) {
      out.region_beta.push_back(b[expo]);
      out.region_se.push_back(std::sqrt(std::max(0.0, v(expo, expo))));
    } else {
      const Index c = slope0 + r - 1;
      out.region_beta.push_back(b[expo] + b[c]);
      out.region_se.push_back(
          std::sqrt(std::max(0.0, v(expo, expo) + v(c, c) + 2 * v(expo, c))));
    }
  }
  return out;
}

LikelihoodRatio likelihood_ratio(double loglik_null, double loglik_alt, Index df) {
  LikelihoodRatio lr;
  lr.df = df;
  lr.statistic = std::max(0.0, 2.0 * (loglik_alt - loglik_null));
  if (df > 0 && std::isfinite(lr.statistic))
    lr.p_value = boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * lr.statistic);
  else
    lr.p_value = df > 0 ? 0.0 : 1.0;
  return lr;
}

double bic(double total_loglik, Index n_params, Index s) {
  if (s < 1) throw ValidationError("BIC needs S >= 1");
  return -2.0 * total_loglik + static_cast<double>(n_params) * std::log(static_cast<double>(s));
}

double morans_i(const Eigen::VectorXd& values, const AdjacencyMatrix& w) {
  if (values.size() != w.n) throw ValidationError("values and adjacency sizes differ");
  if (w.edges.empty()) throw ValidationError("Moran's I needs at least one adjacent pair");
  const Eigen::VectorXd z = values.array() - values.mean();
  const double denom = z.squaredNorm();
  if (!(denom > 0)) throw ValidationError("Moran's I is undefined for constant input");
  double cross = 0.0;
  for (auto [a, b] : w.edges) cross += 2.0 * z[a] * z[b];
  const double weight_sum = 2.0 * static_cast<double>(w.edges.size());
  return static_cast<double>(w.n) / weight_sum * cross / denom;
}

StepOneResult compute_similarity(const Dataset& data, const AdjacencyMatrix& w, Family family,
                                 const GlmOptions& options) {
  if (w.n != data.size())
    throw ValidationError("adjacency has " + std::to_string(w.n) + " units, dataset has " +
                          std::to_string(data.size()));
  StepOneResult out;
  out.global_fit = fit_glm(data, family, options);
  out.deviation = dfbeta(out.global_fit, data);
  if (out.deviation.sigma_d > 0) {
    out.graph = build_similarity(out.deviation, w);
  } else {
    out.graph = spatial_similarity(w);
    out.graph.source = out.deviation;
    out.spatial_fallback = true;
  }
  return out;
}

SelectionTrace select_k(const Dataset& data, const AdjacencyMatrix& w, Family family,
                        const SelectOptions& options) {
  return select_k(data, w, family, compute_similarity(data, w, family, options.glm), options);
}

SelectionTrace select_k(const Dataset& data, const AdjacencyMatrix& w, Family family,
                        const StepOneResult& step_one, const SelectOptions& options) {
  const Index s = data.size();
  if (options.k_min < 1 || options.k_max < options.k_min || options.k_max > s)
    throw ValidationError("k range [" + std::to_string(options.k_min) + ", " +
                          std::to_string(options.k_max) + "] not within [1, " +
                          std::to_string(s) + "]");

  std::vector<Index> working;
  for (Index i = 0; i < w.n; ++i)
    if (w.degree(i) > 0) working.push_back(i);
  const Index basis_k = std::min<Index>(options.k_max, static_cast<Index>(working.size()));

  SpectralBasis basis;
  bool have_basis = false;
  SelectionTrace trace;
  for (int k = options.k_min; k <= options.k_max; ++k) {
    SelectionCandidate cand;
    cand.k = k;
    try {
      if (k == 1) {
        cand.partition = Partition::from_labels(std::vector<int>(static_cast<std::size_t>(s), 0));
        cand.partition.contiguous = true;
        cand.ncut = 0.0;
      } else {
        if (!have_basis && basis_k > 1) {
          basis = static_cast<Index>(working.size()) == w.n
                      ? spectral_basis(step_one.graph, basis_k)
                      : spectral_basis(step_one.graph.induced(working), basis_k);
          have_basis = true;
        }
        const Segmentation seg =
            segment_with_basis(step_one.graph, w, basis, k, options.seed, options.segment);
        cand.partition = seg.partition;
        cand.ncut = seg.ncut;
      }
      cand.realized_k = cand.partition.K;
      const auto regions = fit_stratified(data, cand.partition, family, options.glm);
      const auto failed = std::find_if(regions.begin(), regions.end(),
                                       [](const RegionEstimate& r) { return !r.ok; });
      if (failed != regions.end()) {
        cand.failure = "region " + std::to_string(failed->region) + ": " + failed->failure;
      } else {
        cand.loglik = total_loglik(regions);
        cand.n_params = stratified_param_count(cand.realized_k, n_design_columns(data), family);
        cand.bic = bic(cand.loglik, cand.n_params, s);
        // -inf is a legitimate exact fit; NaN and +inf are not.
        cand.ok = !std::isnan(cand.bic) && cand.bic < std::numeric_limits<double>::infinity();
        if (!cand.ok) cand.failure = "non-finite BIC";
      }
    } catch (const Error& e) {
      cand.failure = e.what();
    }
    trace.candidates.push_back(std::move(cand));
  }

  for (std::size_t c = 0; c < trace.candidates.size(); ++c) {
    const auto& cand = trace.candidates[c];
    if (!cand.ok) continue;
    if (trace.chosen_index < 0 ||
        cand.bic < trace.candidates[static_cast<std::size_t>(trace.chosen_index)].bic) {
      trace.chosen_index = static_cast<int>(c);
    }
  }
  if (trace.chosen_index < 0) throw NumericalError("no candidate K could be fitted");
  trace.chosen_k = trace.candidates[static_cast<std::size_t>(trace.chosen_index)].k;
  return trace;
}

std::vector<std::optional<double>> regional_morans_i(const Dataset& data,
                                                     const Partition& partition,
                                                     const AdjacencyMatrix& w, Family family,
                                                     const GlmOptions& options) {
  std::vector<std::optional<double>> out;
  for (const auto& members : partition.members()) {
    std::optional<double> value;
    try {
      const Dataset sub = data.subset(members);
      const GlmFit fit = fit_glm(sub, family, options);
      value = morans_i(fit.pearson_residuals, w.induced(members));
    } catch (const Error&) {
    }
    out.push_back(value);
  }
  return out;
}

}  // namespace rar
