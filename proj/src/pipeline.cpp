#include "rar/pipeline.hpp"

#include "rar/error.hpp"

namespace rar {

namespace {

Index global_param_count(const GlmFit& fit) {
  return fit.n_coef() + (fit.family == Family::GaussianIdentity ? 1 : 0);
}

// Region estimates, interaction slopes, likelihood-ratio tests, Moran's I.
void describe_partition(ReportDocument& doc, const Dataset& data, const Partition& partition,
                        Family family, const GlmFit& global, const AdjacencyMatrix* w,
                        const GlmOptions& glm) {
  const auto regions = fit_stratified(data, partition, family, glm);
  std::vector<std::optional<double>> morans(regions.size());
  if (w) morans = regional_morans_i(data, partition, *w, family, glm);

  std::optional<InteractionFit> inter;
  try {
    if (partition.K > 1) inter = fit_interaction(data, partition, family, false, glm);
  } catch (const NumericalError& e) {
    doc.warnings.push_back(std::string("interaction model not fitted: ") + e.what());
  }

  const auto names = design_column_names(data);
  const auto expo = static_cast<std::size_t>(exposure_column(data));
  bool all_ok = true;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    const RegionEstimate& est = regions[r];
    ReportRegion out;
    out.region = est.region;
    out.n_units = est.n_units;
    out.ok = est.ok;
    out.failure = est.failure;
    out.beta = est.beta;
    out.se = est.se;
    out.ci_low = est.ci_low;
    out.ci_high = est.ci_high;
    for (Index j = 0, c = 0; j < est.eta.size(); ++j, ++c) {
      if (static_cast<std::size_t>(c) == expo) ++c;
      out.eta.emplace_back(names[static_cast<std::size_t>(c)], est.eta[j]);
    }
    out.loglik = est.loglik;
    out.converged = est.converged;
    if (inter) {
      out.interaction_beta = inter->region_beta[r];
      out.interaction_se = inter->region_se[r];
    }
    out.morans_i = morans[r];
    all_ok = all_ok && est.ok;
    doc.regions.push_back(std::move(out));
  }
  doc.total_loglik = all_ok ? total_loglik(regions) : std::numeric_limits<double>::quiet_NaN();

  const Index p0 = global_param_count(global);
  if (all_ok && partition.K > 1) {
    const Index p1 = stratified_param_count(partition.K, n_design_columns(data), family);
    const auto lr = likelihood_ratio(global.loglik, doc.total_loglik, p1 - p0);
    doc.tests.push_back({"stratified_vs_global", lr.statistic, lr.df, lr.p_value});
  }
  if (inter) {
    const auto lr = likelihood_ratio(global.loglik, inter->fit.loglik, inter->n_params - p0);
    doc.tests.push_back({"region_interaction_vs_global", lr.statistic, lr.df, lr.p_value});
  }
}

void fill_header(ReportDocument& doc, const Dataset& data, Family family, const GlmFit& global) {
  doc.family = std::string(family_name(family));
  doc.n_units = data.size();
  doc.global_beta = global.beta_hat[global.exposure_column];
  doc.global_se = global.se_exposure;
  doc.global_loglik = global.loglik;
  if (!global.converged) doc.warnings.push_back("global GLM did not converge");
}

}  // namespace

PipelineResult run_segment_pipeline(const Dataset& data, const AdjacencyMatrix& w,
                                    const SegmentRequest& request) {
  data.validate(request.family);
  if (w.n != data.size())
    throw ValidationError("adjacency has " + std::to_string(w.n) + " units, dataset has " +
                          std::to_string(data.size()));

  const StepOneResult step_one = compute_similarity(data, w, request.family, request.glm);

  SelectOptions sel;
  sel.k_min = request.k ? *request.k : request.k_min;
  sel.k_max = request.k ? *request.k : request.k_max;
  sel.seed = request.seed;
  sel.segment = request.segment;
  sel.glm = request.glm;
  const SelectionTrace trace = select_k(data, w, request.family, step_one, sel);
  const SelectionCandidate& chosen = *trace.chosen();

  PipelineResult out;
  ReportDocument& doc = out.report;
  doc.run.seed = request.seed;
  fill_header(doc, data, request.family, step_one.global_fit);
  doc.n_edges = w.n_edges();
  doc.warnings.insert(doc.warnings.begin(), w.warnings.begin(), w.warnings.end());
  doc.sigma_d = step_one.deviation.sigma_d;
  doc.spatial_fallback = step_one.spatial_fallback;
  if (step_one.spatial_fallback)
    doc.warnings.push_back("all deviations identical; segmented on spatial adjacency alone");

  doc.requested_k_min = sel.k_min;
  doc.requested_k_max = sel.k_max;
  doc.chosen_k = trace.chosen_k;
  for (const auto& c : trace.candidates) {
    ReportCandidate rc;
    rc.k = c.k;
    rc.realized_k = c.realized_k;
    rc.ok = c.ok;
    rc.failure = c.failure;
    if (c.ok) {
      rc.bic = c.bic;
      rc.loglik = c.loglik;
      rc.ncut = c.ncut;
    }
    rc.n_params = c.n_params;
    doc.selection.push_back(std::move(rc));
  }
  if (chosen.realized_k != chosen.k)
    doc.warnings.push_back("requested K = " + std::to_string(chosen.k) + ", realized K = " +
                           std::to_string(chosen.realized_k));

  out.partition = chosen.partition;
  doc.ncut = chosen.ncut;
  describe_partition(doc, data, out.partition, request.family, step_one.global_fit, &w, request.glm);
  for (Index i = 0; i < data.size(); ++i)
    doc.units.push_back({data.unit_ids[static_cast<std::size_t>(i)],
                         out.partition.labels[static_cast<std::size_t>(i)],
                         step_one.deviation.d[i]});
  return out;
}

ReportDocument run_fit_pipeline(const Dataset& data, const Partition& partition, Family family,
                                const AdjacencyMatrix* w, const GlmOptions& glm) {
  data.validate(family);
  if (partition.size() != data.size())
    throw ValidationError("labels cover " + std::to_string(partition.size()) +
                          " units, dataset has " + std::to_string(data.size()));
  if (w && w->n != data.size())
    throw ValidationError("adjacency has " + std::to_string(w->n) + " units, dataset has " +
                          std::to_string(data.size()));

  const GlmFit global = fit_glm(data, family, glm);
  const DeviationVector deviation = dfbeta(global, data);

  ReportDocument doc;
  fill_header(doc, data, family, global);
  doc.sigma_d = deviation.sigma_d;
  doc.requested_k_min = partition.K;
  doc.requested_k_max = partition.K;
  doc.chosen_k = partition.K;
  if (w) {
    doc.n_edges = w->n_edges();
    doc.warnings.insert(doc.warnings.begin(), w->warnings.begin(), w->warnings.end());
    if (!is_contiguous(partition, *w)) doc.warnings.push_back("supplied regions are not contiguous");
    if (deviation.sigma_d > 0) doc.ncut = ncut_connected(build_similarity(deviation, *w), partition);
  }
  describe_partition(doc, data, partition, family, global, w, glm);
  for (Index i = 0; i < data.size(); ++i)
    doc.units.push_back({data.unit_ids[static_cast<std::size_t>(i)],
                         partition.labels[static_cast<std::size_t>(i)], deviation.d[i]});
  return doc;
}

}  // namespace rar
