#pragma once

// Population diagnostics for the non-severe imbalance condition.
//
// For the index V = alpha_0 + X'beta_0 with choice probability
// Pi(v) = P{Y = 1 | V = v}, and P{Y = 1} >= 1/2:
//
//   p(v)     = P{U <= V < v}        q(v)     = P{U > V > v}
//   tau(v)   = E V 1{U <= V < v}    sigma(v) = E V 1{U > V > v}
//   v_bar    solves p(v_bar) = q(-inf) = P{Y = -1}   (+inf when balanced)
//
// The restricted SVM objective Q_r(c, r) = E[1 - Y (cV + r)]_+ has a
// minimizer with c* > 0 exactly when tau(v_bar) > sigma(-inf).

#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "svmbcm/model_core.hpp"

namespace svmbcm {

class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Law of the index V and the conditional choice probability. Integrals are
/// truncated to [lower, upper].
struct IndexDistribution {
  std::function<double(double)> choice_probability;  ///< Pi(v)
  std::function<double(double)> density;              ///< density of V
  double lower = 0.0;
  double upper = 0.0;
};

/// V ~ N(mu, 1), U ~ N(0, 1) independent: Pi = Phi, support mu +/- 10.
IndexDistribution gaussian_illustration(double mu);

/// Same model with Y and V negated: Pi(v) -> 1 - Pi(-v), f(v) -> f(-v).
IndexDistribution mirrored(const IndexDistribution& dist);

struct RestrictedMinimizer {
  double c_star = 0.0;
  double r_star = 0.0;
  bool exists = false;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
};

struct DiagnosticReport {
  double mu = 0.0;
  double v_bar = 0.0;                 ///< +infinity in the balanced limit
  double tau_at_vbar = 0.0;
  double sigma_at_neg_inf = 0.0;
  bool condition_holds = false;
  double prob_y1 = 0.5;
  std::optional<double> c_star;
  std::optional<double> r_star;
};

/// Quadrature-backed evaluation of p, q, tau, sigma and the restricted
/// objective for one index distribution. Assumes P{Y = 1} >= 1/2.
class ImbalanceModel {
 public:
  explicit ImbalanceModel(IndexDistribution dist, double abs_tol = 1e-12);

  double p(double v) const;
  double q(double v) const;
  double tau(double v) const;
  double sigma(double v) const;

  double prob_y1() const { return p(dist_.upper); }
  double sigma_at_neg_inf() const { return sigma(dist_.lower); }

  /// Root of p(v) = q(-inf) by bisection to 1e-10; +infinity when
  /// p(+inf) does not exceed q(-inf) by more than 1e-12.
  double v_bar() const;
  /// tau(v_bar), read as tau(+inf) when v_bar is infinite.
  double tau_at(double v) const;

  /// Q_r(c, r) for c > 0.
  double restricted_objective(double c, double r) const;
  /// (dQ_r/dr, dQ_r/dc).
  std::pair<double, double> restricted_gradient(double c, double r) const;
  RestrictedMinimizer restricted_minimizer() const;

  /// Assembles the report and cross-checks the tau/sigma verdict against the
  /// existence of c* > 0; throws InternalConsistencyError on disagreement
  /// beyond 1e-6.
  DiagnosticReport report(double mu_label) const;

  const IndexDistribution& distribution() const { return dist_; }

 private:
  double mass_p(double v) const;   // Pi(v) f(v)
  double mass_q(double v) const;   // (1 - Pi(v)) f(v)

  IndexDistribution dist_;
  double tol_;
};

// Gaussian illustration, V ~ N(mu, 1). For mu < 0 the labels are mirrored so
// that the majority class is +1; c* is unchanged and r* changes sign.

/// Phi(v).
double pi_v(double v);
double p_fun(double v, double mu);
double q_fun(double v, double mu);
double tau_fun(double v, double mu);
double sigma_fun(double v, double mu);
double v_bar(double mu);
/// Phi(mu / sqrt 2).
double class_prob(double mu);
RestrictedMinimizer restricted_population_minimizer(double mu);
DiagnosticReport check_imbalance_condition(double mu);
/// Root of mu -> tau(v_bar(mu)) - sigma(-inf; mu) on [1, 2] to 1e-6.
double threshold_mu();
/// tau(v_bar(mu)) - sigma(-inf; mu).
double imbalance_margin(double mu);

std::vector<DiagnosticReport> figure1_curve(const std::vector<double>& mu_grid);

/// Header `mu,tau_vbar,sigma_neginf,prob_y1,condition_holds,c_star,r_star`;
/// absent c_star / r_star are written as empty fields.
void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticReport>& rows);

}  // namespace svmbcm
