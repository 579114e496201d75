#include "svmbcm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "svmbcm/quadrature.hpp"

namespace svmbcm {

namespace {

constexpr double kTruncation = 10.0;
constexpr double kMinSlope = 1e-4;
constexpr double kGradientTol = 1e-8;
constexpr double kVerdictTol = 1e-6;
constexpr std::size_t kMaxNewton = 500;

}  // namespace

IndexDistribution gaussian_illustration(double mu) {
  if (!std::isfinite(mu)) throw Error("gaussian_illustration: mu must be finite");
  return {[](double v) { return normal_cdf(v); }, [mu](double v) { return normal_pdf(v - mu); }, mu - kTruncation,
          mu + kTruncation};
}

IndexDistribution mirrored(const IndexDistribution& dist) {
  return {[pi = dist.choice_probability](double v) { return 1.0 - pi(-v); },
          [f = dist.density](double v) { return f(-v); }, -dist.upper, -dist.lower};
}

ImbalanceModel::ImbalanceModel(IndexDistribution dist, double abs_tol) : dist_(std::move(dist)), tol_(abs_tol) {
  if (!(dist_.lower < dist_.upper)) throw Error("imbalance model: empty support");
}

double ImbalanceModel::mass_p(double v) const { return dist_.choice_probability(v) * dist_.density(v); }
double ImbalanceModel::mass_q(double v) const { return (1.0 - dist_.choice_probability(v)) * dist_.density(v); }

double ImbalanceModel::p(double v) const {
  return integrate([this](double s) { return mass_p(s); }, dist_.lower, std::min(v, dist_.upper), tol_);
}

double ImbalanceModel::q(double v) const {
  return integrate([this](double s) { return mass_q(s); }, std::max(v, dist_.lower), dist_.upper, tol_);
}

double ImbalanceModel::tau(double v) const {
  return integrate([this](double s) { return s * mass_p(s); }, dist_.lower, std::min(v, dist_.upper), tol_);
}

double ImbalanceModel::sigma(double v) const {
  return integrate([this](double s) { return s * mass_q(s); }, std::max(v, dist_.lower), dist_.upper, tol_);
}

double ImbalanceModel::v_bar() const {
  const double target = q(dist_.lower);
  if (p(dist_.upper) <= target + 1e-12) return std::numeric_limits<double>::infinity();
  double lo = dist_.lower;
  double hi = dist_.upper;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (p(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double ImbalanceModel::tau_at(double v) const { return tau(std::isinf(v) ? dist_.upper : v); }

double ImbalanceModel::restricted_objective(double c, double r) const {
  if (!(c > 0.0)) throw Error("restricted_objective: c must be positive");
  const double v_up = (1.0 - r) / c;
  const double v_low = (-1.0 - r) / c;
  return (1.0 - r) * p(v_up) - c * tau(v_up) + (1.0 + r) * q(v_low) + c * sigma(v_low);
}

std::pair<double, double> ImbalanceModel::restricted_gradient(double c, double r) const {
  if (!(c > 0.0)) throw Error("restricted_gradient: c must be positive");
  const double v_up = (1.0 - r) / c;
  const double v_low = (-1.0 - r) / c;
  return {-p(v_up) + q(v_low), -tau(v_up) + sigma(v_low)};
}

RestrictedMinimizer ImbalanceModel::restricted_minimizer() const {
  auto inside = [this](double v) { return v > dist_.lower && v < dist_.upper; };
  double c = 1.0;
  double r = 0.0;
  double value = restricted_objective(c, r);
  RestrictedMinimizer out;
  for (std::size_t it = 0; it < kMaxNewton; ++it) {
    const auto [g_r, g_c] = restricted_gradient(c, r);
    out.gradient_norm = std::hypot(g_r, g_c);
    out.iterations = it;
    if (out.gradient_norm <= kGradientTol && c > kMinSlope) {
      out.exists = true;
      break;
    }
    if (c <= kMinSlope && g_c > 0.0) break;  // still descending toward c = 0

    // Newton step on (r, c) with the analytic Hessian; the kinks at
    // cV + r = +/-1 contribute point masses of Pi f and (1 - Pi) f.
    const double v_up = (1.0 - r) / c;
    const double v_low = (-1.0 - r) / c;
    const double fu = inside(v_up) ? mass_p(v_up) : 0.0;
    const double fl = inside(v_low) ? mass_q(v_low) : 0.0;
    const double h_rr = (fu + fl) / c;
    const double h_rc = (v_up * fu + v_low * fl) / c;
    const double h_cc = (v_up * v_up * fu + v_low * v_low * fl) / c;
    const double det = h_rr * h_cc - h_rc * h_rc;
    double d_r = -g_r;
    double d_c = -g_c;
    if (det > 0.0 && h_rr > 0.0 && std::isfinite(det)) {
      d_r = -(h_cc * g_r - h_rc * g_c) / det;
      d_c = -(h_rr * g_c - h_rc * g_r) / det;
    }
    double slope = d_r * g_r + d_c * g_c;
    if (!(slope < 0.0)) {
      d_r = -g_r;
      d_c = -g_c;
      slope = -(g_r * g_r + g_c * g_c);
    }

    // Backtracking with c kept at no less than half its current value.
    double t = 1.0;
    if (d_c < 0.0) t = std::min(t, 0.5 * c / -d_c);
    bool moved = false;
    for (int k = 0; k < 80; ++k, t *= 0.5) {
      const double c_new = c + t * d_c;
      const double r_new = r + t * d_r;
      const double trial = restricted_objective(c_new, r_new);
      if (trial <= value + 1e-4 * t * slope + 1e-14) {
        c = c_new;
        r = r_new;
        value = trial;
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  out.c_star = c;
  out.r_star = r;
  if (!out.exists) {
    const auto [g_r, g_c] = restricted_gradient(c, r);
    out.gradient_norm = std::hypot(g_r, g_c);
  }
  return out;
}

DiagnosticReport ImbalanceModel::report(double mu_label) const {
  DiagnosticReport rep;
  rep.mu = mu_label;
  rep.prob_y1 = prob_y1();
  rep.v_bar = v_bar();
  rep.tau_at_vbar = tau_at(rep.v_bar);
  rep.sigma_at_neg_inf = sigma_at_neg_inf();
  rep.condition_holds = rep.tau_at_vbar > rep.sigma_at_neg_inf;

  const RestrictedMinimizer minimizer = restricted_minimizer();
  if (minimizer.exists) {
    rep.c_star = minimizer.c_star;
    rep.r_star = minimizer.r_star;
  }
  const double margin = rep.tau_at_vbar - rep.sigma_at_neg_inf;
  if (minimizer.exists != rep.condition_holds && std::abs(margin) > kVerdictTol) {
    throw InternalConsistencyError("imbalance diagnostics: tau/sigma verdict disagrees with restricted minimizer at mu = " +
                                   format_double(mu_label));
  }
  return rep;
}

double pi_v(double v) { return normal_cdf(v); }

double p_fun(double v, double mu) { return ImbalanceModel(gaussian_illustration(mu)).p(v); }
double q_fun(double v, double mu) { return ImbalanceModel(gaussian_illustration(mu)).q(v); }
double tau_fun(double v, double mu) { return ImbalanceModel(gaussian_illustration(mu)).tau(v); }
double sigma_fun(double v, double mu) { return ImbalanceModel(gaussian_illustration(mu)).sigma(v); }

double class_prob(double mu) { return normal_cdf(mu / std::numbers::sqrt2); }

double v_bar(double mu) { return ImbalanceModel(gaussian_illustration(std::abs(mu))).v_bar(); }

RestrictedMinimizer restricted_population_minimizer(double mu) {
  RestrictedMinimizer out = ImbalanceModel(gaussian_illustration(std::abs(mu))).restricted_minimizer();
  if (mu < 0.0) out.r_star = -out.r_star;
  return out;
}

DiagnosticReport check_imbalance_condition(double mu) {
  DiagnosticReport rep = ImbalanceModel(gaussian_illustration(std::abs(mu))).report(mu);
  if (mu < 0.0) {
    rep.prob_y1 = class_prob(mu);
    if (rep.r_star) rep.r_star = -*rep.r_star;
  }
  return rep;
}

double imbalance_margin(double mu) {
  const ImbalanceModel model(gaussian_illustration(std::abs(mu)));
  return model.tau_at(model.v_bar()) - model.sigma_at_neg_inf();
}

double threshold_mu() {
  double lo = 1.0;
  double hi = 2.0;
  if (!(imbalance_margin(lo) > 0.0 && imbalance_margin(hi) < 0.0)) {
    throw InternalConsistencyError("threshold_mu: no sign change on [1, 2]");
  }
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (imbalance_margin(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<DiagnosticReport> figure1_curve(const std::vector<double>& mu_grid) {
  std::vector<DiagnosticReport> rows;
  rows.reserve(mu_grid.size());
  for (std::size_t k = 0; k < mu_grid.size(); ++k) {
    if (!std::isfinite(mu_grid[k])) throw Error("figure1_curve: grid values must be finite");
    if (k > 0 && !(mu_grid[k] > mu_grid[k - 1])) throw Error("figure1_curve: grid must be strictly increasing");
    rows.push_back(check_imbalance_condition(mu_grid[k]));
  }
  return rows;
}

void write_diagnostics_csv(std::ostream& out, const std::vector<DiagnosticReport>& rows) {
  out << "mu,tau_vbar,sigma_neginf,prob_y1,condition_holds,c_star,r_star\n";
  for (const auto& row : rows) {
    out << format_double(row.mu) << ',' << format_double(row.tau_at_vbar) << ',' << format_double(row.sigma_at_neg_inf)
        << ',' << format_double(row.prob_y1) << ',' << (row.condition_holds ? "true" : "false") << ','
        << (row.c_star ? format_double(*row.c_star) : "") << ',' << (row.r_star ? format_double(*row.r_star) : "")
        << '\n';
  }
}

}  // namespace svmbcm
