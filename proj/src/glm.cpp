#include "rar/glm.hpp"

#include "rar/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace rar {
namespace {

constexpr double kRankThreshold = 1e-10;
constexpr double kMaxEta = 700.0;
constexpr int kMaxHalvings = 40;
constexpr double kLeverageCeiling = 1.0 - 1e-10;

Eigen::VectorXd inverse_link(Family family, const Eigen::VectorXd& eta) {
  if (family == Family::GaussianIdentity) return eta;
  return eta.array().min(kMaxEta).exp();
}

Eigen::VectorXd irls_weights(Family family, const Eigen::VectorXd& mu) {
  if (family == Family::GaussianIdentity) return Eigen::VectorXd::Ones(mu.size());
  return mu;
}

// Names the first column that adds nothing to the span of its predecessors.
[[noreturn]] void throw_singular(const Eigen::MatrixXd& weighted,
                                 const std::vector<std::string>& names) {
  for (Index j = 0; j < weighted.cols(); ++j) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted.leftCols(j + 1));
    qr.setThreshold(kRankThreshold);
    if (qr.rank() < j + 1) {
      const auto& name = j < static_cast<Index>(names.size())
                             ? names[static_cast<std::size_t>(j)]
                             : "column " + std::to_string(j);
      throw SingularDesignError(name);
    }
  }
  throw SingularDesignError("(unknown)");
}

Eigen::VectorXd weighted_solve(const Eigen::MatrixXd& design, const Eigen::VectorXd& weights,
                               const Eigen::VectorXd& response,
                               const std::vector<std::string>& names) {
  const Eigen::VectorXd sw = weights.array().sqrt();
  const Eigen::MatrixXd weighted = sw.asDiagonal() * design;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(weighted);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < design.cols()) throw_singular(weighted, names);
  return qr.solve(sw.cwiseProduct(response));
}

}  // namespace

double family_loglik(Family family, const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  const Index n = y.size();
  if (family == Family::GaussianIdentity) {
    const double rss = (y - mu).squaredNorm();
    const double sigma2 = rss / static_cast<double>(n);
    return -0.5 * static_cast<double>(n) *
           (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
  }
  double ll = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double term = y[i] > 0 ? y[i] * std::log(mu[i]) : 0.0;
    ll += term - mu[i] - std::lgamma(y[i] + 1.0);
  }
  return ll;
}

GlmFit fit_glm(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
               const Eigen::VectorXd& log_offset, Family family,
               std::vector<std::string> column_names, Index exposure_column,
               const GlmOptions& options) {
  if (options.max_iter < 1) throw ValidationError("max_iter must be at least 1");
  if (!(options.tol > 0)) throw ValidationError("tol must be positive");
  const Index n = design.rows();
  const Index p = design.cols();
  if (y.size() != n || log_offset.size() != n)
    throw ValidationError("response/offset length does not match design rows");
  if (exposure_column < 0 || exposure_column >= p)
    throw ValidationError("exposure column index out of range");

  GlmFit fit;
  fit.family = family;
  fit.column_names = std::move(column_names);
  fit.exposure_column = exposure_column;

  if (family == Family::GaussianIdentity) {
    const Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
    fit.beta_hat = weighted_solve(design, w, y - log_offset, fit.column_names);
    fit.n_iter = 1;
    fit.converged = true;
    fit.loglik = family_loglik(family, y, design * fit.beta_hat + log_offset);
    fit.loglik_trace.push_back(fit.loglik);
  } else {
    // Start from mu = y + 0.1, which keeps log(mu) finite for zero counts.
    Eigen::VectorXd mu = (y.array() + 0.1).matrix();
    Eigen::VectorXd eta = mu.array().log();
    Eigen::VectorXd beta;
    double ll_old = -std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= options.max_iter; ++iter) {
      const Eigen::VectorXd w = irls_weights(family, mu);
      const Eigen::VectorXd working =
          eta - log_offset + (y - mu).cwiseQuotient(mu);
      Eigen::VectorXd beta_new = weighted_solve(design, w, working, fit.column_names);

      double ll_new = family_loglik(family, y, inverse_link(family, design * beta_new + log_offset));
      if (beta.size() == p) {
        // Step halving keeps the likelihood non-decreasing.
        const Eigen::VectorXd step = beta_new - beta;
        double scale = 1.0;
        for (int h = 0; h < kMaxHalvings && !(ll_new >= ll_old); ++h) {
          scale *= 0.5;
          beta_new = beta + scale * step;
          ll_new = family_loglik(family, y, inverse_link(family, design * beta_new + log_offset));
        }
        if (!(ll_new >= ll_old)) {
          // No ascent direction left at floating-point resolution.
          fit.n_iter = iter;
          fit.converged = step.cwiseAbs().maxCoeff() * scale < options.tol;
          break;
        }
      }

      const double change = beta.size() == p
                                ? (beta_new - beta).cwiseAbs().maxCoeff()
                                : std::numeric_limits<double>::infinity();
      beta = std::move(beta_new);
      ll_old = ll_new;
      fit.loglik_trace.push_back(ll_new);
      fit.n_iter = iter;
      eta = design * beta + log_offset;
      mu = inverse_link(family, eta);
      if (change < options.tol) {
        fit.converged = true;
        break;
      }
    }
    fit.beta_hat = beta;
    fit.loglik = ll_old;
  }

  const Eigen::VectorXd eta = design * fit.beta_hat + log_offset;
  fit.mu_hat = inverse_link(family, eta);
  fit.working_weights = irls_weights(family, fit.mu_hat);

  const Eigen::MatrixXd xtwx =
      design.transpose() * fit.working_weights.asDiagonal() * design;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(xtwx);
  fit.xtwx_inverse = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
  fit.xtwx_inverse = 0.5 * (fit.xtwx_inverse + fit.xtwx_inverse.transpose()).eval();

  fit.leverages.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto zi = design.row(i).transpose();
    fit.leverages[i] = fit.working_weights[i] * zi.dot(fit.xtwx_inverse * zi);
  }

  const Eigen::VectorXd raw = y - fit.mu_hat;
  if (family == Family::GaussianIdentity) {
    fit.pearson_residuals = raw;
    fit.dispersion = n > p ? raw.squaredNorm() / static_cast<double>(n - p) : 0.0;
  } else {
    fit.pearson_residuals = raw.cwiseQuotient(fit.mu_hat.cwiseSqrt());
    fit.dispersion = 1.0;
  }
  fit.cov_beta = fit.dispersion * fit.xtwx_inverse;
  fit.se_exposure = std::sqrt(std::max(0.0, fit.cov_beta(exposure_column, exposure_column)));

  return fit;
}

GlmFit fit_glm(const Dataset& data, Family family, const GlmOptions& options) {
  data.validate(family);
  return fit_glm(design_matrix(data), data.y, log_offset(data, family), family,
                 design_column_names(data), exposure_column(data), options);
}

namespace {

Eigen::MatrixXd one_step_deletion_impl(const GlmFit& fit, const Eigen::MatrixXd& design) {
  const Index n = design.rows();
  Eigen::MatrixXd delta(n, design.cols());
  for (Index i = 0; i < n; ++i) {
    const double h = fit.leverages[i];
    const double scale = std::sqrt(fit.working_weights[i]) * fit.pearson_residuals[i] / (1.0 - h);
    // Classical DFBETA is beta - beta_(i); negate for beta_(i) - beta.
    delta.row(i) = -(fit.xtwx_inverse * design.row(i).transpose() * scale).transpose();
  }
  return delta;
}

}  // namespace

Eigen::MatrixXd one_step_deletion(const GlmFit& fit, const Dataset& data) {
  return one_step_deletion_impl(fit, design_matrix(data));
}

DeviationVector dfbeta(const GlmFit& fit, const Dataset& data) {
  if (!fit.converged) throw NumericalError("dfbeta requires a converged fit");
  if (fit.n_obs() != data.size())
    throw ValidationError("fit and dataset have different unit counts");
  for (Index i = 0; i < fit.n_obs(); ++i)
    if (!(fit.leverages[i] < kLeverageCeiling))
      throw DegenerateLeverageError(data.unit_ids[static_cast<std::size_t>(i)], fit.leverages[i]);

  DeviationVector out;
  const double roundoff = 1e3 * std::numeric_limits<double>::epsilon() * data.y.norm();
  if (fit.family == Family::GaussianIdentity && fit.pearson_residuals.norm() <= roundoff) {
    out.d = Eigen::VectorXd::Zero(fit.n_obs());
    return out;
  }

  const Eigen::MatrixXd delta = one_step_deletion_impl(fit, design_matrix(data));
  const Eigen::VectorXd raw = delta.col(fit.exposure_column);

  if (fit.se_exposure > 0) {
    out.d = raw / fit.se_exposure;
  } else if (raw.cwiseAbs().maxCoeff() == 0.0) {
    out.d = Eigen::VectorXd::Zero(raw.size());
  } else {
    throw NumericalError("exposure standard error is zero but deletion influence is not");
  }
  if (!out.d.allFinite()) throw NumericalError("non-finite deviation values");
  out.sigma_d = sample_sd(out.d);
  return out;
}

Eigen::VectorXd exact_loo_beta(const Dataset& data, Family family, Index i,
                               const GlmOptions& options) {
  if (i < 0 || i >= data.size()) throw ValidationError("unit index out of range");
  return fit_glm(data.without(i), family, options).beta_hat;
}

double sample_sd(const Eigen::VectorXd& v) {
  const Index n = v.size();
  if (n < 2) return 0.0;
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
}

}  // namespace rar
