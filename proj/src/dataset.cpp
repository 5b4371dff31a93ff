#include "rar/dataset.hpp"

#include "rar/error.hpp"

#include <cmath>
#include <unordered_set>

namespace rar {

std::string_view family_name(Family family) {
  return family == Family::PoissonLog ? "poisson" : "gaussian";
}

Family parse_family(std::string_view name) {
  if (name == "poisson" || name == "poisson-log") return Family::PoissonLog;
  if (name == "gaussian" || name == "gaussian-identity") return Family::GaussianIdentity;
  throw ValidationError("unknown family '" + std::string(name) +
                        "' (expected poisson or gaussian)");
}

void Dataset::validate(Family family) const {
  const Index s = size();
  if (s < 2) throw ValidationError("dataset needs at least 2 units, got " + std::to_string(s));
  if (y.size() != s || exposure.size() != s || covariates.rows() != s)
    throw ValidationError("dataset vectors do not all have length S = " + std::to_string(s));
  if (has_offset() && offset.size() != s)
    throw ValidationError("offset length " + std::to_string(offset.size()) +
                          " differs from S = " + std::to_string(s));
  if (static_cast<Index>(covariate_names.size()) != covariates.cols())
    throw ValidationError("covariate name count does not match covariate columns");

  std::unordered_set<std::string> seen;
  for (const auto& id : unit_ids)
    if (!seen.insert(id).second) throw ValidationError("duplicate unit id '" + id + "'");

  for (Index i = 0; i < s; ++i) {
    bool finite = std::isfinite(y[i]) && std::isfinite(exposure[i]) &&
                  covariates.row(i).allFinite();
    if (!finite) throw ValidationError("non-finite value for unit '" + unit_ids[i] + "'");
  }

  if (family == Family::PoissonLog) {
    if (!has_offset())
      throw ValidationError("poisson family requires an offset column");
    for (Index i = 0; i < s; ++i) {
      if (y[i] < 0 || y[i] != std::floor(y[i]))
        throw ValidationError("poisson response must be a non-negative integer (unit '" +
                              unit_ids[i] + "')");
      if (!(offset[i] > 0))
        throw ValidationError("offset must be positive (unit '" + unit_ids[i] + "')");
    }
  }
}

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  const auto n = static_cast<Index>(rows.size());
  out.unit_ids.reserve(rows.size());
  out.y.resize(n);
  out.exposure.resize(n);
  out.covariates.resize(n, covariates.cols());
  if (has_offset()) out.offset.resize(n);
  out.covariate_names = covariate_names;
  out.intercept = intercept;
  for (Index k = 0; k < n; ++k) {
    const Index r = rows[static_cast<std::size_t>(k)];
    out.unit_ids.push_back(unit_ids[static_cast<std::size_t>(r)]);
    out.y[k] = y[r];
    out.exposure[k] = exposure[r];
    out.covariates.row(k) = covariates.row(r);
    if (has_offset()) out.offset[k] = offset[r];
  }
  return out;
}

Dataset Dataset::without(Index row) const {
  std::vector<Index> rows;
  rows.reserve(unit_ids.size());
  for (Index i = 0; i < size(); ++i)
    if (i != row) rows.push_back(i);
  return subset(rows);
}

Index n_design_columns(const Dataset& data) {
  return data.n_covariates() + 1 + (data.intercept ? 1 : 0);
}

Index exposure_column(const Dataset& data) { return data.intercept ? 1 : 0; }

Eigen::MatrixXd design_matrix(const Dataset& data) {
  const Index s = data.size();
  Eigen::MatrixXd z(s, n_design_columns(data));
  if (data.intercept) z.col(0).setOnes();
  z.col(exposure_column(data)) = data.exposure;
  if (data.n_covariates() > 0) z.rightCols(data.n_covariates()) = data.covariates;
  return z;
}

std::vector<std::string> design_column_names(const Dataset& data) {
  std::vector<std::string> names;
  if (data.intercept) names.emplace_back("(intercept)");
  names.emplace_back("exposure");
  names.insert(names.end(), data.covariate_names.begin(), data.covariate_names.end());
  return names;
}

Eigen::VectorXd log_offset(const Dataset& data, Family family) {
  if (family == Family::PoissonLog && data.has_offset()) return data.offset.array().log();
  return Eigen::VectorXd::Zero(data.size());
}

}  // namespace rar
