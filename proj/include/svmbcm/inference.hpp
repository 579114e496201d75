#pragma once

// Plug-in sandwich covariance for the SVM estimator,
//   Cov(theta_hat) ~= H^{-1} J H^{-1} / n,
// where J is the second moment of the hinge subgradient and H replaces the
// Dirac delta at unit margins by a Gaussian kernel of bandwidth h.

#include "svmbcm/model_core.hpp"
#include "svmbcm/svm_solver.hpp"

namespace svmbcm {

class SingularHessianError : public Error {
 public:
  using Error::Error;
};

class NotConvergedError : public Error {
 public:
  using Error::Error;
};

struct CovarianceEstimate {
  Matrix covariance;   ///< (1+m) x (1+m), ordered (alpha, beta_1..beta_m)
  Matrix hessian_hat;
  Matrix j_hat;
  double bandwidth = 0.0;
};

/// (1/n) sum_i 1{1 - y_i m_i > 0} z_i z_i',  z_i = (1, x_i')'.
Matrix j_matrix_hat(const Dataset& data, const Theta& theta);

/// (1/n) sum_i K_h(1 - y_i m_i) z_i z_i' with K_h(u) = phi(u / h) / h.
Matrix hessian_hat(const Dataset& data, const Theta& theta, double bandwidth);

/// 1.06 * sd({y_i m_i}) * n^{-1/5}.
double silverman_bandwidth(const Dataset& data, const Theta& theta);

/// Requires a converged fit and n > 10 (1 + m). Throws SingularHessianError
/// when the plug-in Hessian has condition number above 1e12.
CovarianceEstimate sandwich_covariance(const Dataset& data, const SvmFit& fit);

}  // namespace svmbcm
