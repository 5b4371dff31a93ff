#pragma once

#include "rar/simulation.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace rar {

inline constexpr const char* kReportSchema = "rar-report/1";
inline constexpr const char* kSimulationSchema = "rar-simulation/1";
inline constexpr const char* kVersion = "0.1.0";

struct RunMetadata {
  std::string command;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  /// ISO-8601 UTC; absent unless requested so output stays byte-stable.
  std::optional<std::string> created;

  bool operator==(const RunMetadata&) const = default;
};

struct ReportCandidate {
  int k = 0;
  int realized_k = 0;
  bool ok = false;
  std::string failure;
  /// Absent for failed candidates.
  std::optional<double> bic;
  std::optional<double> loglik;
  std::int64_t n_params = 0;
  std::optional<double> ncut;

  bool operator==(const ReportCandidate&) const = default;
};

struct ReportRegion {
  int region = 0;
  std::int64_t n_units = 0;
  bool ok = false;
  std::string failure;
  double beta = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Remaining design coefficients by name.
  std::vector<std::pair<std::string, double>> eta;
  double loglik = 0.0;
  bool converged = false;
  /// Slope from the interaction model, when it could be fitted.
  std::optional<double> interaction_beta;
  std::optional<double> interaction_se;
  std::optional<double> morans_i;

  bool operator==(const ReportRegion&) const = default;
};

struct ReportTest {
  std::string name;
  double statistic = 0.0;
  std::int64_t df = 0;
  double p_value = 1.0;

  bool operator==(const ReportTest&) const = default;
};

struct ReportUnit {
  std::string unit_id;
  int region = 0;
  double d = 0.0;

  bool operator==(const ReportUnit&) const = default;
};

struct ReportDocument {
  std::string schema = kReportSchema;
  RunMetadata run;
  std::string family;
  std::int64_t n_units = 0;
  std::int64_t n_edges = 0;
  std::vector<std::string> warnings;

  double global_beta = 0.0;
  double global_se = 0.0;
  double global_loglik = 0.0;
  /// Absent when no deviations were computed (fit on supplied labels).
  std::optional<double> sigma_d;
  bool spatial_fallback = false;

  int requested_k_min = 0;
  int requested_k_max = 0;
  int chosen_k = 0;
  std::vector<ReportCandidate> selection;

  std::optional<double> ncut;
  double total_loglik = 0.0;
  std::vector<ReportRegion> regions;
  std::vector<ReportTest> tests;
  std::vector<ReportUnit> units;

  bool operator==(const ReportDocument&) const = default;
};

/// Pretty-printed JSON with a stable key order. Non-finite doubles are
/// encoded as the strings "nan", "inf" and "-inf".
std::string render_report(const ReportDocument& doc);
/// Inverse of render_report. Throws ValidationError on malformed input or a
/// schema mismatch.
ReportDocument parse_report(const std::string& text);
void write_report(const ReportDocument& doc, const std::string& path);
ReportDocument read_report(const std::string& path);

struct SimulationReport {
  std::string schema = kSimulationSchema;
  RunMetadata run;
  SimConfig config;
  std::string k_policy;
  int replicates = 0;
  SimResult result;
};

std::string render_simulation_report(const SimulationReport& report);
void write_simulation_report(const SimulationReport& report, const std::string& path);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

}  // namespace rar
