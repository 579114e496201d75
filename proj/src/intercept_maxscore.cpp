#include "svmbcm/intercept_maxscore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace svmbcm {

double maxscore_objective(double alpha, const Vector& beta, const Dataset& data) {
  if (static_cast<std::size_t>(beta.size()) != data.m()) throw DimensionMismatch("maxscore_objective: beta size");
  const Vector index = data.covariates() * beta;
  double total = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (alpha + index(static_cast<Eigen::Index>(i)) >= 0.0) total += data.label(i);
  }
  return total / static_cast<double>(data.n());
}

Interval default_intercept_range(const Vector& beta) {
  const double half_width = 10.0 * (1.0 + beta.norm());
  return {-half_width, half_width};
}

MaxScoreResult maxscore_intercept(const Dataset& data, const Vector& beta, Interval search) {
  if (static_cast<std::size_t>(beta.size()) != data.m()) throw DimensionMismatch("maxscore_intercept: beta size");
  if (!beta.allFinite()) throw Error("maxscore_intercept: beta must be finite");
  if (!(search.lower < search.upper) || !std::isfinite(search.lower) || !std::isfinite(search.upper)) {
    throw Error("maxscore_intercept: need a finite range with lower < upper");
  }

  // alpha + s_i >= 0  <=>  alpha >= -s_i, so observation i switches on at b_i = -s_i.
  const Vector index = data.covariates() * beta;
  std::vector<std::pair<double, int>> breaks;
  breaks.reserve(data.n());
  long long score = 0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double b = -index(static_cast<Eigen::Index>(i));
    const int y = data.label(i) > 0 ? 1 : -1;
    if (b <= search.lower) {
      score += y;
    } else if (b <= search.upper) {
      breaks.emplace_back(b, y);
    }
  }
  std::sort(breaks.begin(), breaks.end());

  // Sweep the pieces left to right; a piece starts at a_lo or at a breakpoint
  // whose net jump is nonzero (zero-jump breakpoints do not split a piece).
  long long best = score;
  double best_start = search.lower;
  double best_end = search.upper;
  bool best_open = false;  // piece still running: its end is the next effective breakpoint
  bool tracking = true;
  std::size_t distinct = 0;
  for (std::size_t k = 0; k < breaks.size();) {
    const double b = breaks[k].first;
    long long jump = 0;
    while (k < breaks.size() && breaks[k].first == b) jump += breaks[k++].second;
    ++distinct;
    if (jump == 0) continue;
    if (tracking) {
      best_end = b;
      best_open = true;
      tracking = false;
    }
    score += jump;
    if (score > best) {
      best = score;
      best_start = b;
      best_end = search.upper;
      best_open = false;
      tracking = true;
    }
  }
  if (tracking) {
    best_end = search.upper;
    best_open = false;
  }

  MaxScoreResult result;
  result.optimal_interval = {best_start, best_end};
  result.breakpoint_count = distinct;
  double mid = 0.5 * (best_start + best_end);
  if (best_open && mid >= best_end) mid = best_start;  // adjacent doubles
  result.alpha_ms = mid;
  result.score = static_cast<double>(best) / static_cast<double>(data.n());
  return result;
}

}  // namespace svmbcm
