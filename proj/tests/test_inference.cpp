#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "svmbcm/inference.hpp"

using namespace svmbcm;

namespace {

Dataset table1_like(std::uint64_t seed, int n) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix x(n, 2);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    y(i) = (x(i, 0) + x(i, 1)) / std::sqrt(2.0) - normal(rng) >= 0.0 ? 1.0 : -1.0;
  }
  return {y, x};
}

Matrix second_moment(const Dataset& d) {
  Matrix s = Matrix::Zero(1 + d.m(), 1 + d.m());
  for (std::size_t i = 0; i < d.n(); ++i) {
    Vector z(1 + d.m());
    z << 1.0, d.row(i).transpose();
    s += z * z.transpose();
  }
  return s / static_cast<double>(d.n());
}

// Plain loop over observations and matrix entries, written separately from
// the library's weighted-moment code.
Matrix direct_hessian(const Dataset& d, const Theta& theta, double h) {
  const auto k = static_cast<Eigen::Index>(1 + d.m());
  Matrix out = Matrix::Zero(k, k);
  for (std::size_t i = 0; i < d.n(); ++i) {
    double m = theta.alpha;
    for (std::size_t j = 0; j < d.m(); ++j) m += theta.beta(static_cast<Eigen::Index>(j)) * d.row(i)(static_cast<Eigen::Index>(j));
    const double u = (1.0 - d.label(i) * m) / h;
    const double weight = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi) / h;
    for (Eigen::Index r = 0; r < k; ++r) {
      for (Eigen::Index c = 0; c < k; ++c) {
        const double zr = r == 0 ? 1.0 : d.row(i)(r - 1);
        const double zc = c == 0 ? 1.0 : d.row(i)(c - 1);
        out(r, c) += weight * zr * zc;
      }
    }
  }
  return out / static_cast<double>(d.n());
}

}  // namespace

TEST(JMatrix, EmptyIndicatorGivesZero) {
  Vector y(2);
  y << 1.0, -1.0;
  Matrix x(2, 1);
  x << 2.0, -2.0;
  EXPECT_TRUE(j_matrix_hat(Dataset(y, x), Theta(0.0, Vector::Ones(1))).isZero(0.0));
}

TEST(JMatrix, ZeroThetaGivesSecondMoment) {
  const Dataset d = table1_like(1, 30);
  EXPECT_LE((j_matrix_hat(d, Theta(0.0, Vector::Zero(2))) - second_moment(d)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(JMatrix, TwoPointHandComputation) {
  // y = (+1, -1), x = (0.5, 2), theta = (0, [1]): margins 0.5 and -2, both
  // hinges active, so J = 1/2 [[2, 2.5], [2.5, 4.25]].
  Vector y(2);
  y << 1.0, -1.0;
  Matrix x(2, 1);
  x << 0.5, 2.0;
  const Matrix j = j_matrix_hat(Dataset(y, x), Theta(0.0, Vector::Ones(1)));
  EXPECT_DOUBLE_EQ(j(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(j(0, 1), 1.25);
  EXPECT_DOUBLE_EQ(j(1, 1), 2.125);
}

TEST(JMatrix, OuterProductOfSubgradients) {
  const Dataset d = table1_like(2, 200);
  const Theta theta(0.1, Vector{{0.6, 0.4}});
  Matrix outer = Matrix::Zero(3, 3);
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double m = linear_index(theta, d.row(i).transpose());
    if (1.0 - d.label(i) * m <= 0.0) continue;
    Vector g(3);
    g << 1.0, d.row(i).transpose();
    g *= -d.label(i);
    outer += g * g.transpose();
  }
  outer /= static_cast<double>(d.n());
  EXPECT_LE((outer - j_matrix_hat(d, theta)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HessianHat, MatchesDirectSum) {
  const Dataset d = table1_like(3, 10);
  const Theta theta(-0.2, Vector{{0.8, 1.1}});
  EXPECT_LE((hessian_hat(d, theta, 0.5) - direct_hessian(d, theta, 0.5)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(HessianHat, ExactMarginHitAndWideKernel) {
  Vector y(2);
  y << 1.0, 1.0;
  Matrix x(2, 1);
  x << 1.0, 1.0;
  const Dataset d(y, x);
  const double h = 0.3;
  const Matrix hh = hessian_hat(d, Theta(0.0, Vector::Ones(1)), h);
  const double peak = 1.0 / std::sqrt(2.0 * std::numbers::pi) / h;
  EXPECT_NEAR(hh(0, 0), peak, 1e-15);
  EXPECT_NEAR(hh(1, 1), peak, 1e-15);

  const Dataset wide = table1_like(4, 50);
  const Matrix flat = hessian_hat(wide, Theta(0.0, Vector::Zero(2)), 1e8);
  EXPECT_LE(flat.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_THROW(hessian_hat(wide, Theta(0.0, Vector::Zero(2)), 0.0), Error);
}

TEST(Sandwich, MagnitudeAndShapeOnLargeSample) {
  const Dataset d = table1_like(5, 5000);
  const SvmFit fit = svm_fit(d, SvmConfig{});
  const CovarianceEstimate est = sandwich_covariance(d, fit);
  ASSERT_EQ(est.covariance.rows(), 3);
  for (Eigen::Index k = 0; k < 3; ++k) {
    EXPECT_GT(est.covariance(k, k), 0.0);
    EXPECT_LT(est.covariance(k, k), 1.0);
  }
  EXPECT_TRUE(est.covariance.isApprox(est.covariance.transpose(), 0.0));
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(est.covariance).eigenvalues().minCoeff(), -1e-10);
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(est.j_hat).eigenvalues().minCoeff(), -1e-12);
  const double n = static_cast<double>(d.n());
  double mean = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < d.n(); ++i) {
    const double v = d.label(i) * linear_index(fit.theta, d.row(i).transpose());
    mean += v;
    sq += v * v;
  }
  mean /= n;
  const double sd = std::sqrt((sq - n * mean * mean) / (n - 1.0));
  EXPECT_NEAR(est.bandwidth, 1.06 * sd * std::pow(n, -0.2), 1e-12);
}

TEST(Sandwich, DuplicatingObservationsHalvesCovariance) {
  const Dataset d = table1_like(6, 5000);
  Matrix x2(10000, 2);
  Vector y2(10000);
  x2 << d.covariates(), d.covariates();
  y2 << d.labels(), d.labels();
  const Dataset doubled(y2, x2);
  const CovarianceEstimate a = sandwich_covariance(d, svm_fit(d, SvmConfig{}));
  const CovarianceEstimate b = sandwich_covariance(doubled, svm_fit(doubled, SvmConfig{}));
  for (Eigen::Index k = 0; k < 3; ++k) {
    EXPECT_NEAR(b.covariance(k, k) / a.covariance(k, k), 0.5, 0.5 * 0.02);
  }
}

TEST(Sandwich, EmptyKernelMassIsSingular) {
  // Widely separated classes: every margin sits far beyond 1 relative to the
  // bandwidth, except the few support vectors, which we remove by hand.
  const int n = 60;
  Matrix x(n, 1);
  Vector y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = i % 2 == 0 ? 1.0 : -1.0;
    x(i, 0) = y(i) * (1000.0 + i);
  }
  const Dataset d(y, x);
  SvmFit fit = svm_fit(d, SvmConfig{});
  fit.theta = Theta(0.0, Vector::Ones(1));
  EXPECT_THROW(sandwich_covariance(d, fit), SingularHessianError);
}

TEST(Sandwich, Preconditions) {
  const Dataset small = table1_like(7, 30);
  SvmFit fit = svm_fit(small, SvmConfig{});
  EXPECT_THROW(sandwich_covariance(small, fit), Error);
  const Dataset d = table1_like(8, 200);
  fit = svm_fit(d, SvmConfig{});
  fit.converged = false;
  EXPECT_THROW(sandwich_covariance(d, fit), NotConvergedError);
}
