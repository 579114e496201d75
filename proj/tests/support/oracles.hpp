#pragma once

// Independent reference computations used by the unit and acceptance tests.
// None of these call into the solver code they are checked against.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "svmbcm/model_core.hpp"

namespace oracle {

using svmbcm::Dataset;
using svmbcm::Matrix;
using svmbcm::Vector;

struct QpSolution {
  Vector duals;
  Vector beta;
  double alpha = 0.0;
  double dual_value = 0.0;     // unscaled: sum a - 1/2 |sum a y x|^2
  double objective = 0.0;      // in Q_n units
  bool found = false;
};

inline double primal(double alpha, const Vector& beta, const Dataset& data, double lambda, double weight) {
  double sum = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double y = data.label(i);
    const double w = y > 0 ? 1.0 : weight;
    const double m = alpha + data.row(i).dot(beta);
    sum += w * std::max(0.0, 1.0 - y * m);
  }
  const double n = static_cast<double>(data.n());
  return sum / n + lambda / n * beta.squaredNorm();
}

// Minimizes the primal over alpha with beta held fixed. The objective is
// convex piecewise linear in alpha with kinks at y_i - x_i'beta, so the
// minimizing set is an interval with kink endpoints; returns its midpoint.
inline double best_intercept(const Vector& beta, const Dataset& data, double lambda, double weight) {
  std::vector<double> kinks;
  for (std::size_t i = 0; i < data.n(); ++i) kinks.push_back(data.label(i) - data.row(i).dot(beta));
  std::sort(kinks.begin(), kinks.end());
  double best = std::numeric_limits<double>::infinity();
  for (double k : kinks) best = std::min(best, primal(k, beta, data, lambda, weight));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double k : kinks) {
    if (primal(k, beta, data, lambda, weight) <= best + 1e-13) {
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  return 0.5 * (lo + hi);
}

// Brute-force dual QP: every assignment of each a_i to {0, C_i, free}; on the
// free set solve the equality-constrained stationarity system exactly, keep
// box-feasible solutions, return the best. Exponential in n (3^n patterns).
inline QpSolution brute_force_qp(const Dataset& data, double lambda, double weight) {
  const auto n = static_cast<int>(data.n());
  const Vector& y = data.labels();
  Matrix z(n, data.m());
  for (int i = 0; i < n; ++i) z.row(i) = y(i) * data.covariates().row(i);
  const Matrix q = z * z.transpose();
  Vector cap(n);
  for (int i = 0; i < n; ++i) cap(i) = (y(i) > 0 ? 1.0 : weight) / (2.0 * lambda);

  QpSolution best;
  best.dual_value = -std::numeric_limits<double>::infinity();
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 lower, 1 upper, 2 free
  long total = 1;
  for (int i = 0; i < n; ++i) total *= 3;
  for (long code = 0; code < total; ++code) {
    long c = code;
    std::vector<int> free_idx;
    Vector a = Vector::Zero(n);
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(c % 3);
      c /= 3;
      if (state[static_cast<std::size_t>(i)] == 1) a(i) = cap(i);
      if (state[static_cast<std::size_t>(i)] == 2) free_idx.push_back(i);
    }
    const auto k = static_cast<int>(free_idx.size());
    if (k == 0) {
      if (std::abs(y.dot(a)) > 1e-12) continue;
    } else {
      Matrix kkt = Matrix::Zero(k + 1, k + 1);
      Vector rhs(k + 1);
      const Vector qa = q * a;  // bound part only, free entries are zero
      for (int r = 0; r < k; ++r) {
        for (int s = 0; s < k; ++s) kkt(r, s) = q(free_idx[static_cast<std::size_t>(r)], free_idx[static_cast<std::size_t>(s)]);
        kkt(r, k) = y(free_idx[static_cast<std::size_t>(r)]);
        kkt(k, r) = y(free_idx[static_cast<std::size_t>(r)]);
        rhs(r) = 1.0 - qa(free_idx[static_cast<std::size_t>(r)]);
      }
      rhs(k) = -y.dot(a);
      Eigen::FullPivLU<Matrix> lu(kkt);
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(rhs);
      bool feasible = true;
      for (int r = 0; r < k; ++r) {
        const int i = free_idx[static_cast<std::size_t>(r)];
        if (sol(r) < -1e-12 || sol(r) > cap(i) + 1e-12) feasible = false;
        a(i) = std::clamp(sol(r), 0.0, cap(i));
      }
      if (!feasible) continue;
    }
    const Vector w = z.transpose() * a;
    const double value = a.sum() - 0.5 * w.squaredNorm();
    if (value > best.dual_value) {
      best.dual_value = value;
      best.duals = a;
      best.beta = w;
      best.found = true;
    }
  }
  if (best.found) {
    best.alpha = best_intercept(best.beta, data, lambda, weight);
    best.objective = primal(best.alpha, best.beta, data, lambda, weight);
  }
  return best;
}

// Max score by evaluating the step function on every piece of A cut at the
// distinct breakpoints. Adjacent equal-valued pieces are merged.
struct ScorePiece {
  double lower = 0.0;
  double upper = 0.0;
  double value = 0.0;
};

inline double score(double alpha, const Vector& beta, const Dataset& data) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (alpha + data.row(i).dot(beta) >= 0.0) s += data.label(i);
  }
  return s / static_cast<double>(data.n());
}

inline std::vector<ScorePiece> score_pieces(const Vector& beta, const Dataset& data, double a_lo, double a_hi) {
  std::vector<double> cuts{a_lo};
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double b = -data.row(i).dot(beta);
    if (b > a_lo && b <= a_hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<ScorePiece> pieces;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    const double upper = k + 1 < cuts.size() ? cuts[k + 1] : a_hi;
    const double value = score(cuts[k], beta, data);
    if (!pieces.empty() && pieces.back().value == value) {
      pieces.back().upper = upper;
    } else {
      pieces.push_back({cuts[k], upper, value});
    }
  }
  return pieces;
}

inline ScorePiece leftmost_best_piece(const std::vector<ScorePiece>& pieces) {
  ScorePiece best = pieces.front();
  for (const auto& p : pieces) {
    if (p.value > best.value) best = p;
  }
  return best;
}

// Central differences of f at x with step h in every coordinate.
inline Vector central_difference(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    Vector up = x, down = x;
    up(j) += h;
    down(j) -= h;
    g(j) = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

// Small deterministic datasets for solver cross-checks. Covariates are drawn
// on a coarse grid or continuously; a fraction of rows can be duplicated and
// the positive-class share is controlled by `positive_share`.
inline Dataset small_dataset(std::uint64_t seed, int n, int m, double positive_share, bool duplicates) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uniform;
  Matrix x(n, m);
  Vector y(n);
  const int positives = std::clamp(static_cast<int>(std::lround(positive_share * n)), 1, n - 1);
  for (int i = 0; i < n; ++i) {
    y(i) = i < positives ? 1.0 : -1.0;
    for (int j = 0; j < m; ++j) x(i, j) = normal(rng) + (y(i) > 0 ? 0.7 : -0.7) * (j == 0 ? 1.0 : 0.3);
  }
  if (duplicates && n >= 4) {
    x.row(1) = x.row(0);
    x.row(n - 1) = x.row(n - 2);
    if (uniform(rng) < 0.5) x.row(n - 1) = x.row(0);  // same point, opposite labels
  }
  return {y, x};
}

}  // namespace oracle
