#pragma once

#include "rar/dataset.hpp"

#include <string>
#include <vector>

namespace rar {

struct GlmOptions {
  int max_iter = 50;
  /// Convergence threshold on the largest absolute coefficient change.
  double tol = 1e-8;
};

/// A fitted GLM together with the per-unit quantities needed for deletion
/// diagnostics.
struct GlmFit {
  Family family = Family::GaussianIdentity;
  std::vector<std::string> column_names;
  Index exposure_column = 1;

  Eigen::VectorXd beta_hat;
  /// dispersion * (Z' W Z)^{-1}; dispersion is 1 for Poisson and
  /// RSS / (n - p) for Gaussian.
  Eigen::MatrixXd cov_beta;
  /// (Z' W Z)^{-1} without the dispersion factor.
  Eigen::MatrixXd xtwx_inverse;
  double dispersion = 1.0;
  double se_exposure = 0.0;

  Eigen::VectorXd mu_hat;
  Eigen::VectorXd working_weights;
  Eigen::VectorXd leverages;
  /// (y - mu) / sqrt(V(mu)), not scaled by dispersion or leverage.
  Eigen::VectorXd pearson_residuals;

  double loglik = 0.0;
  /// Log-likelihood after every accepted IRLS step.
  std::vector<double> loglik_trace;
  bool converged = false;
  int n_iter = 0;

  Index n_obs() const { return mu_hat.size(); }
  Index n_coef() const { return beta_hat.size(); }
  /// Response residuals y - mu.
  Eigen::VectorXd residuals(const Eigen::VectorXd& y) const { return y - mu_hat; }
};

/// IRLS on an explicit design. `log_offset` enters the linear predictor
/// additively (use zeros for none). Throws SingularDesignError when Z'WZ is
/// rank deficient; a fit that exhausts max_iter is returned with
/// converged = false.
GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
               const Eigen::VectorXd& log_offset, Family family,
               std::vector<std::string> column_names, Index exposure_column,
               const GlmOptions& options = {});

/// Fit on the standard design [1, exposure, covariates].
GlmFit fit_glm(const Dataset& data, Family family, const GlmOptions& options = {});

/// Exact log-likelihood of y under the family at mean mu. For the Gaussian
/// family the variance is profiled out at RSS / n.
double family_loglik(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu);

/// Per-unit standardized deletion influence on the exposure coefficient.
struct DeviationVector {
  /// d_i = (beta_(i) - beta)_exposure / se(beta_exposure), one-step form.
  Eigen::VectorXd d;
  /// Sample standard deviation of d (denominator S - 1).
  double sigma_d = 0.0;
};

/// One-step DFBETA of the exposure coefficient, standardized by its
/// standard error and signed as (leave-one-out minus full). Exact for the
/// Gaussian family. Throws DegenerateLeverageError when some h_i >= 1 and
/// NumericalError when the fit did not converge.
DeviationVector dfbeta(const GlmFit& fit, const Dataset& data);

/// The unstandardized one-step coefficient change beta_(i) - beta for every
/// coefficient; row i belongs to unit i.
Eigen::MatrixXd one_step_deletion(const GlmFit& fit, const Dataset& data);

/// Coefficients from refitting without unit `i`.
Eigen::VectorXd exact_loo_beta(const Dataset& data, Family family, Index i,
                               const GlmOptions& options = {});

double sample_sd(const Eigen::VectorXd& v);

}  // namespace rar
