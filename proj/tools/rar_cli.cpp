#include "rar/error.hpp"
#include "rar/io.hpp"
#include "rar/pipeline.hpp"
#include "rar/report.hpp"
#include "rar/simulation.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace {

using namespace rar;

char parse_delimiter(const std::string& s) {
  if (s == "comma" || s == ",") return ',';
  if (s == "tab" || s == "\\t" || s == "\t") return '\t';
  if (s == "semicolon" || s == ";") return ';';
  throw ValidationError("unsupported delimiter '" + s + "' (comma, tab or semicolon)");
}

void print_regions(const ReportDocument& doc) {
  std::printf("%-7s %7s %12s %12s %25s %10s\n", "region", "units", "beta", "se", "95% CI",
              "moran_i");
  for (const auto& r : doc.regions) {
    if (!r.ok) {
      std::printf("%-7d %7lld  not fitted: %s\n", r.region, static_cast<long long>(r.n_units),
                  r.failure.c_str());
      continue;
    }
    char ci[64];
    std::snprintf(ci, sizeof ci, "[%.4g, %.4g]", r.ci_low, r.ci_high);
    char moran[32] = "-";
    if (r.morans_i) std::snprintf(moran, sizeof moran, "%.4f", *r.morans_i);
    std::printf("%-7d %7lld %12.6g %12.6g %25s %10s\n", r.region,
                static_cast<long long>(r.n_units), r.beta, r.se, ci, moran);
  }
  for (const auto& t : doc.tests)
    std::printf("LR %s: statistic %.6g on %lld df, p = %.4g\n", t.name.c_str(), t.statistic,
                static_cast<long long>(t.df), t.p_value);
  for (const auto& w : doc.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

struct SegmentArgs {
  std::string data, adjacency, family = "poisson", out, labels_out, delimiter = "comma";
  int k = 0, k_min = 1, k_max = 6, restarts = 10;
  std::uint64_t seed = 1;
  bool no_intercept = false, timestamp = false;
};

int run_segment(const SegmentArgs& a, bool fixed_k) {
  const CsvOptions csv{parse_delimiter(a.delimiter)};
  const Family family = parse_family(a.family);
  Dataset data = load_dataset(a.data, family, csv);
  data.intercept = !a.no_intercept;
  const AdjacencyMatrix w = load_adjacency(a.adjacency, data.unit_ids, csv);

  SegmentRequest req;
  req.family = family;
  if (fixed_k) req.k = a.k;
  req.k_min = a.k_min;
  req.k_max = a.k_max;
  req.seed = a.seed;
  req.segment.restarts = a.restarts;
  if (req.segment.restarts < 1) throw ValidationError("--restarts must be at least 1");

  PipelineResult res = run_segment_pipeline(data, w, req);
  res.report.run.command = "segment";
  if (a.timestamp) res.report.run.created = utc_timestamp();

  if (!a.out.empty()) write_report(res.report, a.out);
  if (!a.labels_out.empty()) write_labels(a.labels_out, res.partition, data.unit_ids, csv);

  std::printf("S = %lld, edges = %lld, chosen K = %d (realized %d), ncut = %.6g\n",
              static_cast<long long>(res.report.n_units),
              static_cast<long long>(res.report.n_edges), res.report.chosen_k, res.partition.K,
              res.report.ncut.value_or(0.0));
  for (const auto& c : res.report.selection) {
    if (c.ok)
      std::printf("  K = %d: BIC %.6g, loglik %.6g, params %lld\n", c.k, *c.bic, *c.loglik,
                  static_cast<long long>(c.n_params));
    else
      std::printf("  K = %d: failed (%s)\n", c.k, c.failure.c_str());
  }
  print_regions(res.report);
  return 0;
}

struct FitArgs {
  std::string data, labels, adjacency, family = "poisson", out, delimiter = "comma";
  bool no_intercept = false, timestamp = false;
};

int run_fit(const FitArgs& a) {
  const CsvOptions csv{parse_delimiter(a.delimiter)};
  const Family family = parse_family(a.family);
  Dataset data = load_dataset(a.data, family, csv);
  data.intercept = !a.no_intercept;
  const Partition partition = load_labels(a.labels, data.unit_ids, csv);
  std::optional<AdjacencyMatrix> w;
  if (!a.adjacency.empty()) w = load_adjacency(a.adjacency, data.unit_ids, csv);

  ReportDocument doc = run_fit_pipeline(data, partition, family, w ? &*w : nullptr);
  doc.run.command = "fit";
  if (a.timestamp) doc.run.created = utc_timestamp();
  if (!a.out.empty()) write_report(doc, a.out);
  std::printf("S = %lld, K = %d\n", static_cast<long long>(doc.n_units), doc.chosen_k);
  print_regions(doc);
  return 0;
}

struct SimulateArgs {
  int rows = 30, cols = 30, replicates = 100, threads = 1, k_max = 6;
  double sigma2 = 1.0, bandwidth = 1.5;
  std::uint64_t seed = 1;
  std::string k_policy = "fixed3", out;
  bool intercept = false, timestamp = false;
};

int run_simulate(const SimulateArgs& a) {
  SimConfig cfg;
  cfg.rows = a.rows;
  cfg.cols = a.cols;
  cfg.sigma2 = a.sigma2;
  cfg.smooth_bandwidth = a.bandwidth;
  cfg.seed = a.seed;
  cfg.fit_intercept = a.intercept;

  EvaluateOptions opt;
  if (a.k_policy == "fixed3") opt.k_policy = KPolicy::Fixed3;
  else if (a.k_policy == "bic") opt.k_policy = KPolicy::BicSelected;
  else throw ValidationError("--k-policy must be fixed3 or bic");
  opt.k_max = a.k_max;
  opt.threads = a.threads;

  SimulationReport rep;
  rep.run.command = "simulate";
  rep.run.seed = a.seed;
  if (a.timestamp) rep.run.created = utc_timestamp();
  rep.config = cfg;
  rep.k_policy = a.k_policy;
  rep.replicates = a.replicates;
  rep.result = evaluate(a.replicates, cfg, opt);
  if (!a.out.empty()) write_simulation_report(rep, a.out);

  const SimResult& r = rep.result;
  std::printf("%d replicates, %lld failed, mean ARI %.4f\n", a.replicates,
              static_cast<long long>(r.failures), r.mean_adjusted_rand);
  std::printf("%-7s %8s %16s %10s %10s\n", "region", "truth", "mean (sd)", "coverage", "pooled cov");
  for (std::size_t c = 0; c < 3; ++c) {
    char ms[48];
    std::snprintf(ms, sizeof ms, "%.2f (%.2f)", r.regions[c].mean, r.regions[c].sd);
    std::printf("%-7zu %8.2f %16s %10.2f %10.2f\n", c + 1, cfg.beta_true[c], ms,
                r.regions[c].coverage, r.pooled_coverage[c]);
  }
  std::printf("pooled slope %.2f (%.2f)\n", r.pooled_mean, r.pooled_sd);
  auto histogram = [](const char* label, const std::vector<Index>& counts) {
    std::printf("%s:", label);
    for (std::size_t k = 0; k < counts.size(); ++k)
      if (counts[k] > 0) std::printf(" %zu:%lld", k, static_cast<long long>(counts[k]));
    std::printf("\n");
  };
  histogram("chosen K", r.chosen_k_counts);
  histogram("realized K", r.k_counts);
  return 0;
}

int fail(const char* tag, int code, const std::string& message) {
  std::string line = message;
  for (char& c : line)
    if (c == '\n' || c == '\r') c = ' ';
  std::fprintf(stderr, "error[%s]: %s\n", tag, line.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Region-wise automatic regression: detect contiguous regions with distinct "
               "exposure associations"};
  app.require_subcommand(1);
  app.set_version_flag("--version", rar::kVersion);

  SegmentArgs seg;
  auto* segment_cmd = app.add_subcommand("segment", "Segment a map and estimate region-wise slopes");
  segment_cmd->add_option("--data", seg.data, "Unit data file")->required();
  segment_cmd->add_option("--adjacency", seg.adjacency, "Edge list file")->required();
  segment_cmd->add_option("--family", seg.family, "poisson or gaussian")->capture_default_str();
  auto* k_opt = segment_cmd->add_option("--k", seg.k, "Fixed number of regions");
  auto* kmin_opt =
      segment_cmd->add_option("--k-min", seg.k_min, "Smallest K for BIC")->capture_default_str();
  auto* kmax_opt =
      segment_cmd->add_option("--k-max", seg.k_max, "Largest K for BIC")->capture_default_str();
  k_opt->excludes(kmin_opt)->excludes(kmax_opt);
  segment_cmd->add_option("--seed", seg.seed, "Random seed")->capture_default_str();
  segment_cmd->add_option("--restarts", seg.restarts, "Discretization restarts")
      ->capture_default_str();
  segment_cmd->add_option("--out", seg.out, "Report file (JSON)");
  segment_cmd->add_option("--labels-out", seg.labels_out, "Labels file");
  segment_cmd->add_option("--delimiter", seg.delimiter, "comma, tab or semicolon")
      ->capture_default_str();
  segment_cmd->add_flag("--no-intercept", seg.no_intercept, "Omit the intercept column");
  segment_cmd->add_flag("--timestamp", seg.timestamp, "Record the creation time in the report");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate region-wise slopes for a given partition");
  fit_cmd->add_option("--data", fit.data, "Unit data file")->required();
  fit_cmd->add_option("--labels", fit.labels, "Labels file (unit_id, region)")->required();
  fit_cmd->add_option("--adjacency", fit.adjacency, "Edge list file, enables Moran's I");
  fit_cmd->add_option("--family", fit.family, "poisson or gaussian")->capture_default_str();
  fit_cmd->add_option("--out", fit.out, "Report file (JSON)");
  fit_cmd->add_option("--delimiter", fit.delimiter, "comma, tab or semicolon")
      ->capture_default_str();
  fit_cmd->add_flag("--no-intercept", fit.no_intercept, "Omit the intercept column");
  fit_cmd->add_flag("--timestamp", fit.timestamp, "Record the creation time in the report");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the planted three-region simulation study");
  sim_cmd->add_option("--rows", sim.rows)->capture_default_str();
  sim_cmd->add_option("--cols", sim.cols)->capture_default_str();
  sim_cmd->add_option("--sigma2", sim.sigma2, "Residual variance")->capture_default_str();
  sim_cmd->add_option("--replicates", sim.replicates)->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed)->capture_default_str();
  sim_cmd->add_option("--bandwidth", sim.bandwidth, "Residual smoothing kernel sd in cells")
      ->capture_default_str();
  sim_cmd->add_option("--k-policy", sim.k_policy, "fixed3 or bic")->capture_default_str();
  sim_cmd->add_option("--k-max", sim.k_max, "Largest K under the bic policy")
      ->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads")->capture_default_str();
  sim_cmd->add_option("--out", sim.out, "Report file (JSON)");
  sim_cmd->add_flag("--intercept", sim.intercept, "Fit with an intercept column");
  sim_cmd->add_flag("--timestamp", sim.timestamp, "Record the creation time in the report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", static_cast<int>(ErrorKind::Validation), e.what());
  }

  try {
    if (*segment_cmd) return run_segment(seg, k_opt->count() > 0);
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(sim);
  } catch (const rar::Error& e) {
    return fail(e.tag(), static_cast<int>(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail("numerical", static_cast<int>(ErrorKind::Numerical), "out of memory");
  } catch (const std::exception& e) {
    return fail("numerical", static_cast<int>(ErrorKind::Numerical), e.what());
  }
  return 0;
}
