#pragma once

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rar {

using Index = Eigen::Index;

enum class Family { PoissonLog, GaussianIdentity };

std::string_view family_name(Family family);
/// Accepts "poisson" / "poisson-log" and "gaussian" / "gaussian-identity".
Family parse_family(std::string_view name);

/// Unit-level regression inputs. Row order is the canonical unit order shared
/// with the adjacency matrix and every label vector.
struct Dataset {
  std::vector<std::string> unit_ids;
  Eigen::VectorXd y;
  /// Expected counts n_i; empty when the data carry no offset.
  Eigen::VectorXd offset;
  Eigen::VectorXd exposure;
  /// S x q, q may be zero.
  Eigen::MatrixXd covariates;
  std::vector<std::string> covariate_names;
  /// Whether the design carries an intercept column ahead of the exposure.
  bool intercept = true;

  Index size() const { return static_cast<Index>(unit_ids.size()); }
  Index n_covariates() const { return covariates.cols(); }
  bool has_offset() const { return offset.size() > 0; }

  /// Shape, uniqueness and family-specific response checks.
  /// Throws ValidationError.
  void validate(Family family) const;

  /// Rows `rows` in the given order.
  Dataset subset(std::span<const Index> rows) const;
  Dataset without(Index row) const;
};

/// [intercept,] exposure, then covariates.
Eigen::MatrixXd design_matrix(const Dataset& data);
std::vector<std::string> design_column_names(const Dataset& data);
Index n_design_columns(const Dataset& data);
/// Position of the exposure in the design: 1 with an intercept, else 0.
Index exposure_column(const Dataset& data);

/// log(n_i) for Poisson data with an offset, zeros otherwise.
Eigen::VectorXd log_offset(const Dataset& data, Family family);

}  // namespace rar
