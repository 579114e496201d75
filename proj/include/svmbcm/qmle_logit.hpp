#pragma once

// Logistic-regression QMLE: maximizes the average log-likelihood
//   L(theta) = (1/n) sum_i log G(y_i (alpha + x_i' beta)),  G(t) = 1 / (1 + e^{-t})
// by damped Newton from theta = 0.

#include <cstddef>

#include "svmbcm/model_core.hpp"

namespace svmbcm {

struct LogitConfig {
  double tol = 1e-10;                     ///< sup-norm of the gradient
  std::size_t max_iter = 200;
  double separation_norm_bound = 1e4;     ///< |theta| beyond this flags separation

  void validate() const;
};

struct LogitFit {
  Theta theta;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool separation = false;
};

double logit_loglik(const Theta& theta, const Dataset& data);
Vector logit_gradient(const Theta& theta, const Dataset& data);
/// Negative semidefinite for every theta.
Matrix logit_hessian(const Theta& theta, const Dataset& data);

/// Throws MissingClassError on a one-class sample. Quasi-separation is not an
/// exception: the fit comes back with converged = false, separation = true.
LogitFit logit_fit(const Dataset& data, const LogitConfig& config = {});

/// log(1 + e^{-t}) without overflow.
double log1p_exp_neg(double t);

}  // namespace svmbcm
