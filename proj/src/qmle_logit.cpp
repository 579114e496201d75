#include "svmbcm/qmle_logit.hpp"

#include <algorithm>
#include <cmath>

namespace svmbcm {

namespace {

void check_dims(const Theta& theta, const Dataset& data) {
  if (theta.dim() != data.m()) throw DimensionMismatch("logit: theta and data dimensions differ");
}

// G(t) = 1 / (1 + e^{-t}), evaluated on the side that cannot overflow.
double logistic(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

double log1p_exp_neg(double t) {
  if (t > 0.0) return std::log1p(std::exp(-t));
  return -t + std::log1p(std::exp(t));
}

void LogitConfig::validate() const {
  if (!(tol > 0.0) || max_iter == 0 || !(separation_norm_bound > 0.0)) {
    throw Error("logit config: tol, max_iter and separation_norm_bound must be positive");
  }
}

double logit_loglik(const Theta& theta, const Dataset& data) {
  check_dims(theta, data);
  const Vector index = data.covariates() * theta.beta;
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    total -= log1p_exp_neg(data.label(i) * (theta.alpha + index(static_cast<Eigen::Index>(i))));
  }
  return total / static_cast<double>(data.n());
}

Vector logit_gradient(const Theta& theta, const Dataset& data) {
  check_dims(theta, data);
  const auto m = static_cast<Eigen::Index>(data.m());
  const Vector index = data.covariates() * theta.beta;
  Vector grad = Vector::Zero(m + 1);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double y = data.label(i);
    // d/dt log G(y t) = y (1 - G(y t))
    const double s = y * (1.0 - logistic(y * (theta.alpha + index(static_cast<Eigen::Index>(i)))));
    grad(0) += s;
    grad.tail(m) += s * data.row(i).transpose();
  }
  return grad / static_cast<double>(data.n());
}

Matrix logit_hessian(const Theta& theta, const Dataset& data) {
  check_dims(theta, data);
  const auto m = static_cast<Eigen::Index>(data.m());
  const Vector index = data.covariates() * theta.beta;
  Matrix hess = Matrix::Zero(m + 1, m + 1);
  Vector z(m + 1);
  z(0) = 1.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double g = logistic(theta.alpha + index(static_cast<Eigen::Index>(i)));
    z.tail(m) = data.row(i).transpose();
    hess.selfadjointView<Eigen::Lower>().rankUpdate(z, -g * (1.0 - g));
  }
  hess = hess.selfadjointView<Eigen::Lower>();
  return hess / static_cast<double>(data.n());
}

LogitFit logit_fit(const Dataset& data, const LogitConfig& config) {
  config.validate();
  if (!data.has_both_classes()) throw MissingClassError("logit_fit: both classes must be present");

  LogitFit fit;
  fit.theta = Theta(0.0, Vector::Zero(static_cast<Eigen::Index>(data.m())));
  Vector params = fit.theta.stacked();
  double value = logit_loglik(fit.theta, data);
  Vector grad = logit_gradient(fit.theta, data);

  std::size_t iter = 0;
  while (grad.lpNorm<Eigen::Infinity>() > config.tol && iter < config.max_iter) {
    const Matrix hess = logit_hessian(Theta::from_stacked(params), data);
    Vector step = (-hess).ldlt().solve(grad);
    if (!step.allFinite() || step.dot(grad) <= 0.0) step = grad;  // fall back to ascent direction

    double scale = 1.0;
    Vector candidate = params + step;
    double candidate_value = logit_loglik(Theta::from_stacked(candidate), data);
    while (!(candidate_value >= value) && scale > 1e-12) {
      scale *= 0.5;
      candidate = params + scale * step;
      candidate_value = logit_loglik(Theta::from_stacked(candidate), data);
    }
    ++iter;
    if (!(candidate_value >= value)) break;  // no ascent possible at machine precision

    // A long full step that keeps paying off when doubled signals a direction of
    // recession (separated data); follow it until it stops helping or the norm
    // bound trips.
    if (scale == 1.0 && step.lpNorm<Eigen::Infinity>() >= 1e-2) {
      while (candidate.norm() <= config.separation_norm_bound) {
        step *= 2.0;
        const Vector longer = params + step;
        const double longer_value = logit_loglik(Theta::from_stacked(longer), data);
        if (!(longer_value >= candidate_value)) break;
        candidate = longer;
        candidate_value = longer_value;
      }
    }
    params = candidate;
    value = candidate_value;
    grad = logit_gradient(Theta::from_stacked(params), data);
    if (params.norm() > config.separation_norm_bound) {
      fit.separation = true;
      break;
    }
  }

  fit.theta = Theta::from_stacked(params);
  fit.loglik = value;
  fit.gradient_norm = grad.lpNorm<Eigen::Infinity>();
  fit.iterations = iter;
  fit.converged = !fit.separation && fit.gradient_norm <= config.tol;
  return fit;
}

}  // namespace svmbcm
