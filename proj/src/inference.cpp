#include "svmbcm/inference.hpp"

#include <cmath>
#include <numbers>

namespace svmbcm {

namespace {

Vector margins(const Dataset& data, const Theta& theta) {
  if (theta.dim() != data.m()) throw DimensionMismatch("inference: theta and data dimensions differ");
  Vector index = data.covariates() * theta.beta;
  index.array() += theta.alpha;
  return data.labels().cwiseProduct(index);
}

// sum_i weight_i z_i z_i' / n
Matrix weighted_moment(const Dataset& data, const Vector& weight) {
  const auto m = static_cast<Eigen::Index>(data.m());
  Matrix out = Matrix::Zero(m + 1, m + 1);
  Vector z(m + 1);
  z(0) = 1.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double w = weight(static_cast<Eigen::Index>(i));
    if (w == 0.0) continue;
    z.tail(m) = data.row(i).transpose();
    out.noalias() += w * z * z.transpose();
  }
  return out / static_cast<double>(data.n());
}

}  // namespace

Matrix j_matrix_hat(const Dataset& data, const Theta& theta) {
  const Vector margin = margins(data, theta);
  const Vector active = (1.0 - margin.array() > 0.0).cast<double>().matrix();
  return weighted_moment(data, active);
}

Matrix hessian_hat(const Dataset& data, const Theta& theta, double bandwidth) {
  if (!(bandwidth > 0.0)) throw Error("hessian_hat: bandwidth must be positive");
  const Vector margin = margins(data, theta);
  const double norm = 1.0 / (bandwidth * std::sqrt(2.0 * std::numbers::pi));
  const Vector kernel = ((1.0 - margin.array()) / bandwidth).unaryExpr([norm](double u) {
    return norm * std::exp(-0.5 * u * u);
  });
  return weighted_moment(data, kernel);
}

double silverman_bandwidth(const Dataset& data, const Theta& theta) {
  const Vector margin = margins(data, theta);
  const double n = static_cast<double>(data.n());
  const double mean = margin.mean();
  const double sd = std::sqrt((margin.array() - mean).square().sum() / (n - 1.0));
  return 1.06 * sd * std::pow(n, -0.2);
}

CovarianceEstimate sandwich_covariance(const Dataset& data, const SvmFit& fit) {
  if (!fit.converged) throw NotConvergedError("sandwich_covariance: fit did not converge");
  if (data.n() <= 10 * (1 + data.m())) throw Error("sandwich_covariance: need n > 10 (1 + m)");

  CovarianceEstimate est;
  est.bandwidth = silverman_bandwidth(data, fit.theta);
  if (!(est.bandwidth > 0.0)) throw SingularHessianError("sandwich_covariance: degenerate margin spread");
  est.j_hat = j_matrix_hat(data, fit.theta);
  est.hessian_hat = hessian_hat(data, fit.theta, est.bandwidth);

  const Matrix h = 0.5 * (est.hessian_hat + est.hessian_hat.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
  const double largest = eig.eigenvalues().cwiseAbs().maxCoeff();
  const double smallest = eig.eigenvalues().cwiseAbs().minCoeff();
  if (!(largest > 0.0) || largest > 1e12 * smallest) {
    throw SingularHessianError("sandwich_covariance: plug-in Hessian is singular");
  }
  // Kernel mass vanishing at every margin leaves H negligible next to its
  // largest attainable value phi(0)/h * (1/n) sum z z'.
  const double peak = weighted_moment(data, Vector::Ones(static_cast<Eigen::Index>(data.n())))
                          .selfadjointView<Eigen::Lower>()
                          .eigenvalues()
                          .maxCoeff() /
                      (est.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  if (largest < 1e-12 * peak) throw SingularHessianError("sandwich_covariance: no kernel mass near unit margins");
  const Matrix h_inv = eig.eigenvectors() * eig.eigenvalues().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  const Matrix cov = h_inv * est.j_hat * h_inv / static_cast<double>(data.n());
  est.covariance = 0.5 * (cov + cov.transpose());
  return est;
}

}  // namespace svmbcm
