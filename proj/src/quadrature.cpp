#include "svmbcm/quadrature.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace svmbcm {

namespace {

constexpr int kOrder = 20;
constexpr int kMaxDepth = 40;

struct GaussLegendreRule {
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};

  GaussLegendreRule() {
    // Newton iteration on P_n from the Chebyshev-like initial guesses.
    for (int k = 0; k < kOrder; ++k) {
      double x = std::cos(std::numbers::pi * (k + 0.75) / (kOrder + 0.5));
      double derivative = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= kOrder; ++j) {
          const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
          p0 = p1;
          p1 = p2;
        }
        derivative = kOrder * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / derivative;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[static_cast<std::size_t>(k)] = x;
      weights[static_cast<std::size_t>(k)] = 2.0 / ((1.0 - x * x) * derivative * derivative);
    }
  }
};

const GaussLegendreRule& rule() {
  static const GaussLegendreRule instance;
  return instance;
}

double panel(const std::function<double(double)>& f, double a, double b) {
  const auto& r = rule();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  for (int k = 0; k < kOrder; ++k) {
    sum += r.weights[static_cast<std::size_t>(k)] * f(mid + half * r.nodes[static_cast<std::size_t>(k)]);
  }
  return half * sum;
}

double adapt(const std::function<double(double)>& f, double a, double b, double whole, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = panel(f, a, mid);
  const double right = panel(f, mid, b);
  if (depth >= kMaxDepth || std::abs(left + right - whole) <= tol) return left + right;
  return adapt(f, a, mid, left, 0.5 * tol, depth + 1) + adapt(f, mid, b, right, 0.5 * tol, depth + 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol) {
  if (!(b > a)) return 0.0;
  return adapt(f, a, b, panel(f, a, b), abs_tol, 0);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace svmbcm
