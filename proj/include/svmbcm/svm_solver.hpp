#pragma once

// Linear soft-margin SVM with an unpenalized intercept:
//
//   Q_n(theta) = (1/n) sum_i w_i [1 - y_i (alpha + x_i' beta)]_+ + (lambda/n) |beta|^2
//
// with w_i = 1 for y_i = +1 and w_i = class weight for y_i = -1. Solved
// through the dual QP
//
//   max  sum_i a_i - 1/2 |sum_i a_i y_i x_i|^2
//   s.t. 0 <= a_i <= C_i,  sum_i a_i y_i = 0,  C_i = w_i / (2 lambda)
//
// by SMO with maximal-violating-pair selection.

#include <cstddef>
#include <functional>
#include <ostream>
#include <variant>
#include <vector>

#include "svmbcm/model_core.hpp"

namespace svmbcm {

struct NoWeight {};
/// w = #{y = +1} / #{y = -1}, estimated from the sample.
struct AutoWeight {};
struct FixedWeight {
  double w = 1.0;
};
using WeightMode = std::variant<NoWeight, AutoWeight, FixedWeight>;

struct SvmConfig {
  double lambda = 0.5;
  WeightMode weight_mode = NoWeight{};
  double tol = 1e-8;                       ///< duality gap, in Q_n units
  std::size_t max_iter = 10'000'000;       ///< pairwise updates

  void validate() const;
};

/// One solver trace record, emitted after each pairwise update.
struct SvmTraceEvent {
  std::size_t iteration = 0;
  double dual_objective = 0.0;  ///< in Q_n units
  double kkt_gap = 0.0;         ///< maximal violating pair gap m(a) - M(a)
};
using SvmTraceSink = std::function<void(const SvmTraceEvent&)>;

/// Writes the header `iteration,dual_objective,kkt_gap` now and one CSV row
/// per event. The stream must outlive the sink.
SvmTraceSink csv_trace_sink(std::ostream& out);

struct SvmFit {
  Theta theta;
  Vector duals;                               ///< a_i, 0 <= a_i <= C_i
  Vector upper_bounds;                        ///< C_i
  std::vector<std::size_t> support_indices;   ///< {i : a_i > 0}
  double primal_objective = 0.0;              ///< Q_n(theta_hat)
  double dual_objective = 0.0;                ///< dual value rescaled to Q_n units
  double gap = 0.0;
  std::size_t iterations = 0;
  double weight_used = 1.0;
  bool converged = false;
};

/// #{y = +1} / #{y = -1}. Throws MissingClassError on a one-class sample.
double estimate_class_weight(const Dataset& data);

/// Weight applied to the y = -1 hinge terms under `config` on `data`.
double resolve_class_weight(const Dataset& data, const SvmConfig& config);

/// Q_n(theta) under the config's lambda and weight mode.
double svm_primal_objective(const Theta& theta, const Dataset& data, const SvmConfig& config);

/// Gradient of Q_n at a point where no observation sits on a hinge kink.
Vector svm_objective_gradient(const Theta& theta, const Dataset& data, const SvmConfig& config);

/// Exact minimizer of Q_n. Throws MissingClassError when only one label is
/// present; returns the last iterate with converged = false when max_iter is
/// exhausted.
SvmFit svm_fit(const Dataset& data, const SvmConfig& config, const SvmTraceSink& trace = {});

/// Largest KKT residual of (fit.duals, fit.theta) on `data`:
///   a_i = 0      : max(0, 1 - y_i f_i)
///   a_i = C_i    : max(0, y_i f_i - 1)
///   0 < a_i < C_i: |y_i f_i - 1|
/// where f_i = alpha + x_i' beta.
double kkt_violation(const SvmFit& fit, const Dataset& data, const SvmConfig& config);

/// Dual objective sum a_i - 1/2 |sum a_i y_i x_i|^2 (unscaled).
double svm_dual_objective(const Vector& duals, const Dataset& data);

}  // namespace svmbcm
