#pragma once

// Second-stage maximum score for the intercept given a first-stage slope:
//
//   alpha_ms = argmax_{alpha in A} (1/n) sum_i y_i 1{alpha + beta' x_i >= 0}
//
// The objective is a right-continuous step function of alpha that jumps by
// y_i / n at alpha = -beta' x_i, so it is maximized exactly by sweeping the
// sorted breakpoints.

#include <cstddef>

#include "svmbcm/model_core.hpp"

namespace svmbcm {

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

struct MaxScoreResult {
  double alpha_ms = 0.0;
  /// Leftmost maximizing piece clipped to A. Pieces are [b_k, b_{k+1}), so the
  /// upper end is excluded unless it is A's right endpoint.
  Interval optimal_interval;
  double score = 0.0;
  std::size_t breakpoint_count = 0;  ///< distinct breakpoints inside (a_lo, a_hi]
};

double maxscore_objective(double alpha, const Vector& beta, const Dataset& data);

/// Throws Error unless a_lo < a_hi and beta is finite.
MaxScoreResult maxscore_intercept(const Dataset& data, const Vector& beta, Interval search);

/// [-10 (1 + |beta|), 10 (1 + |beta|)].
Interval default_intercept_range(const Vector& beta);

}  // namespace svmbcm
