#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "svmbcm/qmle_logit.hpp"

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

}  // namespace

TEST(LogitLoglik, ZeroParameterGivesLogHalf) {
  const Dataset d = table1_like(1, 50);
  EXPECT_NEAR(logit_loglik(Theta(0.0, Vector::Zero(2)), d), std::log(0.5), 1e-15);
}

TEST(LogitLoglik, StableForHugeMargins) {
  Vector y(2);
  y << 1.0, -1.0;
  Matrix x(2, 1);
  x << 1.0, -1.0;
  const Dataset d(y, x);
  double previous = -1.0;
  for (double b : {1.0, 10.0, 100.0, 1e3, 1e6}) {
    const double value = logit_loglik(Theta(0.0, Vector::Constant(1, b)), d);
    EXPECT_TRUE(std::isfinite(value));
    EXPECT_LE(value, 0.0);
    EXPECT_GE(value, previous);
    previous = value;
  }
  EXPECT_NEAR(previous, 0.0, 1e-300);
  EXPECT_TRUE(std::isfinite(logit_loglik(Theta(0.0, Vector::Constant(1, -1e6)), d)));
  EXPECT_NEAR(log1p_exp_neg(-800.0), 800.0, 1e-12);
  EXPECT_NEAR(log1p_exp_neg(0.0), std::log(2.0), 1e-15);
}

TEST(LogitLoglik, InterceptOnlySymmetricMaximum) {
  Vector y(2);
  y << 1.0, -1.0;
  const Dataset d(y, Matrix::Zero(2, 1));
  const double at_zero = logit_loglik(Theta(0.0, Vector::Zero(1)), d);
  EXPECT_NEAR(at_zero, std::log(0.5), 1e-15);
  for (double a : {-1.0, -0.1, 0.1, 2.0}) EXPECT_LT(logit_loglik(Theta(a, Vector::Zero(1)), d), at_zero);
}

TEST(LogitFit, UninformativeBalancedData) {
  Vector y(4);
  y << 1.0, -1.0, 1.0, -1.0;
  Matrix x(4, 1);
  x << 1.0, -1.0, -1.0, 1.0;
  const LogitFit fit = logit_fit(Dataset(y, x));
  ASSERT_TRUE(fit.converged);
  EXPECT_NEAR(fit.theta.alpha, 0.0, 1e-12);
  EXPECT_NEAR(fit.theta.beta(0), 0.0, 1e-12);
}

TEST(LogitFit, SeparationIsFlagged) {
  Vector y(2);
  y << -1.0, 1.0;
  Matrix x(2, 1);
  x << -1.0, 1.0;
  const LogitFit fit = logit_fit(Dataset(y, x));
  EXPECT_FALSE(fit.converged);
  EXPECT_TRUE(fit.separation);
  EXPECT_TRUE(fit.theta.is_finite());
}

TEST(LogitFit, MissingClassThrows) {
  EXPECT_THROW(logit_fit(Dataset(Vector::Ones(3), Matrix::Random(3, 1))), MissingClassError);
}

TEST(LogitFit, ConsistentRescaledSlopeOnLargeSample) {
  const LogitFit fit = logit_fit(table1_like(2, 5000));
  ASSERT_TRUE(fit.converged);
  EXPECT_LE(fit.gradient_norm, LogitConfig{}.tol);
  EXPECT_NEAR(fit.theta.beta(0) / fit.theta.beta(1), 1.0, 0.05);
}

TEST(LogitFit, ConvergedMeansSmallGradient) {
  const Dataset d = table1_like(3, 400);
  const LogitFit fit = logit_fit(d);
  ASSERT_TRUE(fit.converged);
  EXPECT_LE(logit_gradient(fit.theta, d).cwiseAbs().maxCoeff(), LogitConfig{}.tol);
}

TEST(LogitProperties, GradientMatchesFiniteDifferences) {
  const Dataset d = table1_like(4, 120);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  for (int k = 0; k < 20; ++k) {
    const Theta theta(normal(rng), Vector{{normal(rng), normal(rng)}});
    const Vector g = logit_gradient(theta, d);
    const Vector fd = oracle::central_difference(
        [&](const Vector& v) { return logit_loglik(Theta::from_stacked(v), d); }, theta.stacked(), 1e-5);
    EXPECT_LE((g - fd).cwiseAbs().maxCoeff(), 1e-6 * std::max(1.0, g.cwiseAbs().maxCoeff()));
  }
}

TEST(LogitProperties, HessianNegativeSemidefinite) {
  const Dataset d = table1_like(5, 90);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int k = 0; k < 30; ++k) {
    const Theta theta(normal(rng), Vector{{normal(rng), normal(rng)}});
    const Matrix h = logit_hessian(theta, d);
    EXPECT_LE((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LE(Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().maxCoeff(), 1e-10);
  }
}

TEST(LogitProperties, HessianMatchesFiniteDifferencesOfGradient) {
  const Dataset d = table1_like(6, 70);
  const Theta theta(0.3, Vector{{-0.4, 0.9}});
  const Matrix h = logit_hessian(theta, d);
  for (Eigen::Index j = 0; j < 3; ++j) {
    const Vector fd = oracle::central_difference(
        [&](const Vector& v) { return logit_gradient(Theta::from_stacked(v), d)(j); }, theta.stacked(), 1e-5);
    EXPECT_LE((h.row(j).transpose() - fd).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(LogitProperties, ColumnScaleEquivariance) {
  const Dataset d = table1_like(7, 600);
  const LogitFit base = logit_fit(d);
  for (double c : {3.0, -0.25}) {
    Matrix x = d.covariates();
    x.col(1) *= c;
    const LogitFit scaled = logit_fit(Dataset(d.labels(), x));
    ASSERT_TRUE(scaled.converged);
    EXPECT_NEAR(scaled.theta.beta(1), base.theta.beta(1) / c, 1e-8);
    EXPECT_NEAR(scaled.theta.beta(0), base.theta.beta(0), 1e-8);
    EXPECT_NEAR(scaled.theta.alpha, base.theta.alpha, 1e-8);
  }
}

TEST(LogitProperties, IteratesAscend) {
  // Capping the iteration budget exposes the intermediate iterates.
  const Dataset d = table1_like(8, 300);
  double previous = logit_loglik(Theta(0.0, Vector::Zero(2)), d);
  for (std::size_t k = 1; k <= 8; ++k) {
    LogitConfig config;
    config.max_iter = k;
    const LogitFit fit = logit_fit(d, config);
    EXPECT_GE(fit.loglik, previous - 1e-15);
    previous = fit.loglik;
  }
}
