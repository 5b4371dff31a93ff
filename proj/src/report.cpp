#include "rar/report.hpp"

#include "rar/error.hpp"
#include "rar/io.hpp"

#include <json.hpp>

#include <cmath>
#include <ctime>
#include <limits>

namespace rar {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

Json opt_num(const std::optional<double>& v) { return v ? num(*v) : Json(nullptr); }

double get_num(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw ValidationError("report: expected a number, got " + j.dump());
}

std::optional<double> get_opt_num(const Json& j) {
  if (j.is_null()) return std::nullopt;
  return get_num(j);
}

const Json& field(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("report: missing field '") + key + "'");
  return *it;
}

Json to_json(const RunMetadata& m) {
  Json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["version"] = m.version;
  j["created"] = m.created ? Json(*m.created) : Json(nullptr);
  return j;
}

RunMetadata run_from_json(const Json& j) {
  RunMetadata m;
  m.command = field(j, "command").get<std::string>();
  m.seed = field(j, "seed").get<std::uint64_t>();
  m.version = field(j, "version").get<std::string>();
  const Json& c = field(j, "created");
  if (!c.is_null()) m.created = c.get<std::string>();
  return m;
}

Json to_json(const SimConfig& c) {
  Json j;
  j["rows"] = c.rows;
  j["cols"] = c.cols;
  j["beta_true"] = Json::array({num(c.beta_true[0]), num(c.beta_true[1]), num(c.beta_true[2])});
  j["mu_x"] = num(c.mu_x);
  j["tau"] = num(c.tau);
  j["sigma2"] = num(c.sigma2);
  j["smooth_bandwidth"] = num(c.smooth_bandwidth);
  j["fit_intercept"] = c.fit_intercept;
  j["layout"] = c.region_layout.empty() ? "vertical-bands" : "custom";
  return j;
}

}  // namespace

std::string render_report(const ReportDocument& doc) {
  Json j;
  j["schema"] = doc.schema;
  j["run"] = to_json(doc.run);
  j["family"] = doc.family;
  j["n_units"] = doc.n_units;
  j["n_edges"] = doc.n_edges;
  j["warnings"] = doc.warnings;

  Json global;
  global["beta"] = num(doc.global_beta);
  global["se"] = num(doc.global_se);
  global["loglik"] = num(doc.global_loglik);
  global["sigma_d"] = opt_num(doc.sigma_d);
  global["spatial_fallback"] = doc.spatial_fallback;
  j["global_fit"] = global;

  Json sel;
  sel["k_min"] = doc.requested_k_min;
  sel["k_max"] = doc.requested_k_max;
  sel["chosen_k"] = doc.chosen_k;
  Json cands = Json::array();
  for (const auto& c : doc.selection) {
    Json cj;
    cj["k"] = c.k;
    cj["realized_k"] = c.realized_k;
    cj["ok"] = c.ok;
    cj["failure"] = c.failure;
    cj["bic"] = opt_num(c.bic);
    cj["loglik"] = opt_num(c.loglik);
    cj["n_params"] = c.n_params;
    cj["ncut"] = opt_num(c.ncut);
    cands.push_back(std::move(cj));
  }
  sel["candidates"] = std::move(cands);
  j["selection"] = std::move(sel);

  j["ncut"] = opt_num(doc.ncut);
  j["total_loglik"] = num(doc.total_loglik);

  Json regions = Json::array();
  for (const auto& r : doc.regions) {
    Json rj;
    rj["region"] = r.region;
    rj["n_units"] = r.n_units;
    rj["ok"] = r.ok;
    rj["failure"] = r.failure;
    rj["beta"] = num(r.beta);
    rj["se"] = num(r.se);
    rj["ci95"] = Json::array({num(r.ci_low), num(r.ci_high)});
    Json eta = Json::array();
    for (const auto& [name, value] : r.eta) eta.push_back(Json::array({name, num(value)}));
    rj["eta"] = std::move(eta);
    rj["loglik"] = num(r.loglik);
    rj["converged"] = r.converged;
    rj["interaction_beta"] = opt_num(r.interaction_beta);
    rj["interaction_se"] = opt_num(r.interaction_se);
    rj["morans_i"] = opt_num(r.morans_i);
    regions.push_back(std::move(rj));
  }
  j["regions"] = std::move(regions);

  Json tests = Json::array();
  for (const auto& t : doc.tests) {
    Json tj;
    tj["name"] = t.name;
    tj["statistic"] = num(t.statistic);
    tj["df"] = t.df;
    tj["p_value"] = num(t.p_value);
    tests.push_back(std::move(tj));
  }
  j["tests"] = std::move(tests);

  Json units = Json::array();
  for (const auto& u : doc.units) units.push_back(Json::array({u.unit_id, u.region, num(u.d)}));
  j["units"] = std::move(units);
  return j.dump(2) + "\n";
}

ReportDocument parse_report(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: malformed JSON: ") + e.what());
  }
  try {
    ReportDocument doc;
    doc.schema = field(j, "schema").get<std::string>();
    if (doc.schema != kReportSchema)
      throw ValidationError("report: unsupported schema '" + doc.schema + "'");
    doc.run = run_from_json(field(j, "run"));
    doc.family = field(j, "family").get<std::string>();
    doc.n_units = field(j, "n_units").get<std::int64_t>();
    doc.n_edges = field(j, "n_edges").get<std::int64_t>();
    doc.warnings = field(j, "warnings").get<std::vector<std::string>>();

    const Json& global = field(j, "global_fit");
    doc.global_beta = get_num(field(global, "beta"));
    doc.global_se = get_num(field(global, "se"));
    doc.global_loglik = get_num(field(global, "loglik"));
    doc.sigma_d = get_opt_num(field(global, "sigma_d"));
    doc.spatial_fallback = field(global, "spatial_fallback").get<bool>();

    const Json& sel = field(j, "selection");
    doc.requested_k_min = field(sel, "k_min").get<int>();
    doc.requested_k_max = field(sel, "k_max").get<int>();
    doc.chosen_k = field(sel, "chosen_k").get<int>();
    for (const Json& cj : field(sel, "candidates")) {
      ReportCandidate c;
      c.k = field(cj, "k").get<int>();
      c.realized_k = field(cj, "realized_k").get<int>();
      c.ok = field(cj, "ok").get<bool>();
      c.failure = field(cj, "failure").get<std::string>();
      c.bic = get_opt_num(field(cj, "bic"));
      c.loglik = get_opt_num(field(cj, "loglik"));
      c.n_params = field(cj, "n_params").get<std::int64_t>();
      c.ncut = get_opt_num(field(cj, "ncut"));
      doc.selection.push_back(std::move(c));
    }

    doc.ncut = get_opt_num(field(j, "ncut"));
    doc.total_loglik = get_num(field(j, "total_loglik"));

    for (const Json& rj : field(j, "regions")) {
      ReportRegion r;
      r.region = field(rj, "region").get<int>();
      r.n_units = field(rj, "n_units").get<std::int64_t>();
      r.ok = field(rj, "ok").get<bool>();
      r.failure = field(rj, "failure").get<std::string>();
      r.beta = get_num(field(rj, "beta"));
      r.se = get_num(field(rj, "se"));
      const Json& ci = field(rj, "ci95");
      if (!ci.is_array() || ci.size() != 2) throw ValidationError("report: ci95 must have 2 entries");
      r.ci_low = get_num(ci[0]);
      r.ci_high = get_num(ci[1]);
      for (const Json& e : field(rj, "eta")) {
        if (!e.is_array() || e.size() != 2) throw ValidationError("report: malformed eta entry");
        r.eta.emplace_back(e[0].get<std::string>(), get_num(e[1]));
      }
      r.loglik = get_num(field(rj, "loglik"));
      r.converged = field(rj, "converged").get<bool>();
      r.interaction_beta = get_opt_num(field(rj, "interaction_beta"));
      r.interaction_se = get_opt_num(field(rj, "interaction_se"));
      r.morans_i = get_opt_num(field(rj, "morans_i"));
      doc.regions.push_back(std::move(r));
    }

    for (const Json& tj : field(j, "tests")) {
      ReportTest t;
      t.name = field(tj, "name").get<std::string>();
      t.statistic = get_num(field(tj, "statistic"));
      t.df = field(tj, "df").get<std::int64_t>();
      t.p_value = get_num(field(tj, "p_value"));
      doc.tests.push_back(std::move(t));
    }

    for (const Json& uj : field(j, "units")) {
      if (!uj.is_array() || uj.size() != 3) throw ValidationError("report: malformed unit entry");
      doc.units.push_back({uj[0].get<std::string>(), uj[1].get<int>(), get_num(uj[2])});
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report: ") + e.what());
  }
}

void write_report(const ReportDocument& doc, const std::string& path) {
  write_text_file(path, render_report(doc));
}

ReportDocument read_report(const std::string& path) { return parse_report(read_text_file(path)); }

std::string render_simulation_report(const SimulationReport& report) {
  Json j;
  j["schema"] = report.schema;
  j["run"] = to_json(report.run);
  j["config"] = to_json(report.config);
  j["k_policy"] = report.k_policy;
  j["replicates"] = report.replicates;

  const SimResult& res = report.result;
  Json summary;
  summary["failures"] = res.failures;
  summary["mean_adjusted_rand"] = num(res.mean_adjusted_rand);
  summary["chosen_k_counts"] = res.chosen_k_counts;
  summary["k_counts"] = res.k_counts;
  Json regions = Json::array();
  for (std::size_t c = 0; c < 3; ++c) {
    const RegionSummary& r = res.regions[c];
    Json rj;
    rj["region"] = c + 1;
    rj["beta_true"] = num(report.config.beta_true[c]);
    rj["mean"] = num(r.mean);
    rj["sd"] = num(r.sd);
    rj["mean_abs_bias"] = num(r.mean_abs_bias);
    rj["coverage"] = num(r.coverage);
    rj["n_matched"] = r.n_matched;
    rj["pooled_coverage"] = num(res.pooled_coverage[c]);
    regions.push_back(std::move(rj));
  }
  summary["regions"] = std::move(regions);
  summary["pooled_mean"] = num(res.pooled_mean);
  summary["pooled_sd"] = num(res.pooled_sd);
  j["summary"] = std::move(summary);

  Json reps = Json::array();
  for (const auto& rep : res.replicates) {
    Json rj;
    rj["ok"] = rep.ok;
    rj["failure"] = rep.failure;
    rj["chosen_k"] = rep.chosen_k;
    rj["realized_k"] = rep.realized_k;
    rj["adjusted_rand"] = num(rep.adjusted_rand);
    rj["rand"] = num(rep.rand);
    Json est = Json::array();
    for (std::size_t c = 0; c < 3; ++c) {
      if (!rep.matched[c]) {
        est.push_back(nullptr);
        continue;
      }
      est.push_back(Json::array({num(rep.beta[c]), num(rep.se[c]), rep.covered[c]}));
    }
    rj["estimates"] = std::move(est);
    rj["pooled"] = Json::array({num(rep.pooled_beta), num(rep.pooled_se)});
    reps.push_back(std::move(rj));
  }
  j["replicates_detail"] = std::move(reps);
  return j.dump(2) + "\n";
}

void write_simulation_report(const SimulationReport& report, const std::string& path) {
  write_text_file(path, render_simulation_report(report));
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace rar
