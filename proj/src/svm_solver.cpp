#include "svmbcm/svm_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace svmbcm {

namespace {

constexpr double kTau = 1e-12;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_dims(const Theta& theta, const Dataset& data, const char* where) {
  if (theta.dim() != data.m()) {
    throw DimensionMismatch(std::string(where) + ": theta has " + std::to_string(theta.dim()) +
                            " slopes, data has " + std::to_string(data.m()) + " covariates");
  }
}

// Row-major copy of the covariates for the O(n m) inner loops.
struct DenseRows {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<double> x;
  std::vector<double> y;

  explicit DenseRows(const Dataset& data) : n(data.n()), m(data.m()), x(n * m), y(n) {
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = data.label(i);
      for (std::size_t j = 0; j < m; ++j) {
        x[i * m + j] = data.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
  }
  const double* row(std::size_t i) const { return x.data() + i * m; }
  double dot(std::size_t i, const std::vector<double>& v) const {
    const double* r = row(i);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += r[j] * v[j];
    return s;
  }
  double dot(std::size_t i, std::size_t k) const {
    const double* a = row(i);
    const double* b = row(k);
    double s = 0.0;
    for (std::size_t j = 0; j < m; ++j) s += a[j] * b[j];
    return s;
  }
};

class SmoSolver {
 public:
  SmoSolver(const Dataset& data, const SvmConfig& config, double weight, const SvmTraceSink& trace)
      : data_(data), rows_(data), config_(config), trace_(trace), n_(data.n()), m_(data.m()) {
    upper_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      upper_[i] = (rows_.y[i] > 0 ? 1.0 : weight) / (2.0 * config.lambda);
    }
    alpha_.assign(n_, 0.0);
    grad_.assign(n_, -1.0);
    w_.assign(m_, 0.0);
    diag_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) diag_[i] = rows_.dot(i, i);
  }

  SvmFit run() {
    double eps = config_.tol;
    std::size_t iter = 0;
    bool converged = false;
    SvmFit fit;
    while (true) {
      iter = optimize(eps, iter);
      refresh_gradient();
      fit = assemble(iter);
      if (fit.gap <= config_.tol) {
        converged = true;
        break;
      }
      if (iter >= config_.max_iter || eps < 1e-15) break;
      eps *= 0.1;
    }
    fit.converged = converged;
    return fit;
  }

 private:
  bool in_up(std::size_t t) const {
    return rows_.y[t] > 0 ? alpha_[t] < upper_[t] : alpha_[t] > 0.0;
  }
  bool in_low(std::size_t t) const {
    return rows_.y[t] > 0 ? alpha_[t] > 0.0 : alpha_[t] < upper_[t];
  }

  // Maximal violating pair; ties resolved toward the lowest index.
  double select(std::size_t& i_out, std::size_t& j_out) const {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n_, j = n_;
    for (std::size_t t = 0; t < n_; ++t) {
      const double v = -rows_.y[t] * grad_[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    i_out = i;
    j_out = j;
    if (i == n_ || j == n_) return 0.0;
    return gmax - gmin;
  }

  // Applies the gradient change from dw and selects the next pair in one pass.
  double update_and_select(const std::vector<double>& dw, std::size_t& i_out, std::size_t& j_out) {
    double gmax = -std::numeric_limits<double>::infinity();
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t i = n_, j = n_;
    for (std::size_t t = 0; t < n_; ++t) {
      grad_[t] += rows_.y[t] * rows_.dot(t, dw);
      const double v = -rows_.y[t] * grad_[t];
      if (in_up(t) && v > gmax) {
        gmax = v;
        i = t;
      }
      if (in_low(t) && v < gmin) {
        gmin = v;
        j = t;
      }
    }
    i_out = i;
    j_out = j;
    if (i == n_ || j == n_) return 0.0;
    return gmax - gmin;
  }

  std::size_t optimize(double eps, std::size_t iter) {
    std::size_t i = 0, j = 0;
    double violation = select(i, j);
    std::vector<double> dw(m_);
    while (violation > eps && iter < config_.max_iter) {
      const double yi = rows_.y[i], yj = rows_.y[j];
      const double ci = upper_[i], cj = upper_[j];
      const double old_ai = alpha_[i], old_aj = alpha_[j];
      const double kij = rows_.dot(i, j);
      double ai = old_ai, aj = old_aj;

      if (yi != yj) {
        double quad = diag_[i] + diag_[j] - 2.0 * kij;
        if (quad <= 0.0) quad = kTau;
        const double delta = (-grad_[i] - grad_[j]) / quad;
        const double diff = ai - aj;
        ai += delta;
        aj += delta;
        if (diff > 0.0) {
          if (aj < 0.0) {
            aj = 0.0;
            ai = diff;
          }
        } else if (ai < 0.0) {
          ai = 0.0;
          aj = -diff;
        }
        if (diff > ci - cj) {
          if (ai > ci) {
            ai = ci;
            aj = ci - diff;
          }
        } else if (aj > cj) {
          aj = cj;
          ai = cj + diff;
        }
      } else {
        double quad = diag_[i] + diag_[j] - 2.0 * kij;
        if (quad <= 0.0) quad = kTau;
        const double delta = (grad_[i] - grad_[j]) / quad;
        const double sum = ai + aj;
        ai -= delta;
        aj += delta;
        if (sum > ci) {
          if (ai > ci) {
            ai = ci;
            aj = sum - ci;
          }
        } else if (aj < 0.0) {
          aj = 0.0;
          ai = sum;
        }
        if (sum > cj) {
          if (aj > cj) {
            aj = cj;
            ai = sum - cj;
          }
        } else if (ai < 0.0) {
          ai = 0.0;
          aj = sum;
        }
      }
      alpha_[i] = ai;
      alpha_[j] = aj;

      const double dai = (ai - old_ai) * yi;
      const double daj = (aj - old_aj) * yj;
      const double* xi = rows_.row(i);
      const double* xj = rows_.row(j);
      for (std::size_t d = 0; d < m_; ++d) {
        dw[d] = dai * xi[d] + daj * xj[d];
        w_[d] += dw[d];
      }
      ++iter;
      violation = update_and_select(dw, i, j);
      if (trace_) trace_({iter, scaled_dual(), violation});
    }
    return iter;
  }

  double scaled_dual() const {
    double sum = 0.0;
    for (double a : alpha_) sum += a;
    double ww = 0.0;
    for (double v : w_) ww += v * v;
    return (2.0 * config_.lambda / static_cast<double>(n_)) * (sum - 0.5 * ww);
  }

  void refresh_gradient() {
    std::fill(w_.begin(), w_.end(), 0.0);
    for (std::size_t t = 0; t < n_; ++t) {
      if (alpha_[t] == 0.0) continue;
      const double* r = rows_.row(t);
      for (std::size_t d = 0; d < m_; ++d) w_[d] += alpha_[t] * rows_.y[t] * r[d];
    }
    for (std::size_t t = 0; t < n_; ++t) grad_[t] = rows_.y[t] * rows_.dot(t, w_) - 1.0;
  }

  double intercept() const {
    double sum = 0.0;
    std::size_t free = 0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n_; ++t) {
      const double y = rows_.y[t];
      const double value = y - rows_.dot(t, w_);
      if (alpha_[t] > 0.0 && alpha_[t] < upper_[t]) {
        sum += value;
        ++free;
        continue;
      }
      const bool at_zero = alpha_[t] == 0.0;
      // KKT: a = 0 needs y f >= 1, a = C needs y f <= 1; each bounds alpha on one side.
      if ((y > 0) == at_zero) {
        lower = std::max(lower, value);
      } else {
        upper = std::min(upper, value);
      }
    }
    if (free > 0) return sum / static_cast<double>(free);
    if (std::isinf(lower)) return upper;
    if (std::isinf(upper)) return lower;
    return 0.5 * (lower + upper);
  }

  SvmFit assemble(std::size_t iter) const {
    SvmFit fit;
    Vector beta(static_cast<Eigen::Index>(m_));
    for (std::size_t d = 0; d < m_; ++d) beta(static_cast<Eigen::Index>(d)) = w_[d];
    fit.theta = Theta(intercept(), beta);
    fit.duals = Eigen::Map<const Vector>(alpha_.data(), static_cast<Eigen::Index>(n_));
    fit.upper_bounds = Eigen::Map<const Vector>(upper_.data(), static_cast<Eigen::Index>(n_));
    for (std::size_t t = 0; t < n_; ++t) {
      if (alpha_[t] > 0.0) fit.support_indices.push_back(t);
    }
    fit.primal_objective = svm_primal_objective(fit.theta, data_, config_);
    fit.dual_objective = scaled_dual();
    fit.gap = fit.primal_objective - fit.dual_objective;
    fit.iterations = iter;
    fit.weight_used = resolve_class_weight(data_, config_);
    return fit;
  }

  const Dataset& data_;
  DenseRows rows_;
  const SvmConfig& config_;
  const SvmTraceSink& trace_;
  std::size_t n_;
  std::size_t m_;
  std::vector<double> upper_;
  std::vector<double> alpha_;
  std::vector<double> grad_;
  std::vector<double> w_;
  std::vector<double> diag_;
};

}  // namespace

void SvmConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error("svm config: lambda must be positive");
  if (!(tol > 0.0)) throw Error("svm config: tol must be positive");
  if (max_iter == 0) throw Error("svm config: max_iter must be positive");
  if (const auto* fixed = std::get_if<FixedWeight>(&weight_mode); fixed && !(fixed->w > 0.0 && std::isfinite(fixed->w))) {
    throw Error("svm config: fixed class weight must be positive");
  }
}

double estimate_class_weight(const Dataset& data) {
  if (!data.has_both_classes()) throw MissingClassError("class weight: sample contains a single class");
  return static_cast<double>(data.count_positive()) / static_cast<double>(data.count_negative());
}

double resolve_class_weight(const Dataset& data, const SvmConfig& config) {
  return std::visit(Overloaded{[](NoWeight) { return 1.0; },
                               [&](AutoWeight) { return estimate_class_weight(data); },
                               [](FixedWeight f) { return f.w; }},
                    config.weight_mode);
}

double svm_primal_objective(const Theta& theta, const Dataset& data, const SvmConfig& config) {
  check_dims(theta, data, "svm_primal_objective");
  const double weight = resolve_class_weight(data, config);
  const Vector index = data.covariates() * theta.beta;
  double hinge = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double margin = data.label(i) * (theta.alpha + index(static_cast<Eigen::Index>(i)));
    const double loss = std::max(0.0, 1.0 - margin);
    hinge += (data.label(i) > 0 ? 1.0 : weight) * loss;
  }
  const double n = static_cast<double>(data.n());
  return hinge / n + config.lambda / n * theta.beta.squaredNorm();
}

Vector svm_objective_gradient(const Theta& theta, const Dataset& data, const SvmConfig& config) {
  check_dims(theta, data, "svm_objective_gradient");
  const double weight = resolve_class_weight(data, config);
  const auto m = static_cast<Eigen::Index>(data.m());
  Vector grad = Vector::Zero(m + 1);
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double y = data.label(i);
    const double margin = y * (theta.alpha + data.row(i).dot(theta.beta));
    if (1.0 - margin <= 0.0) continue;
    const double scale = -(y > 0 ? 1.0 : weight) * y;
    grad(0) += scale;
    grad.tail(m) += scale * data.row(i).transpose();
  }
  const double n = static_cast<double>(data.n());
  grad /= n;
  grad.tail(m) += 2.0 * config.lambda / n * theta.beta;
  return grad;
}

double svm_dual_objective(const Vector& duals, const Dataset& data) {
  if (static_cast<std::size_t>(duals.size()) != data.n()) throw DimensionMismatch("svm_dual_objective: size");
  const Vector w = data.covariates().transpose() * duals.cwiseProduct(data.labels());
  return duals.sum() - 0.5 * w.squaredNorm();
}

SvmTraceSink csv_trace_sink(std::ostream& out) {
  out << "iteration,dual_objective,kkt_gap\n";
  return [&out](const SvmTraceEvent& e) {
    out << e.iteration << ',' << format_double(e.dual_objective) << ',' << format_double(e.kkt_gap) << '\n';
  };
}

SvmFit svm_fit(const Dataset& data, const SvmConfig& config, const SvmTraceSink& trace) {
  config.validate();
  if (!data.has_both_classes()) throw MissingClassError("svm_fit: both classes must be present");
  const double weight = resolve_class_weight(data, config);
  SmoSolver solver(data, config, weight, trace);
  return solver.run();
}

double kkt_violation(const SvmFit& fit, const Dataset& data, const SvmConfig& config) {
  check_dims(fit.theta, data, "kkt_violation");
  if (static_cast<std::size_t>(fit.duals.size()) != data.n()) throw DimensionMismatch("kkt_violation: dual size");
  const double weight = resolve_class_weight(data, config);
  double worst = 0.0;
  for (std::size_t i = 0; i < data.n(); ++i) {
    const double y = data.label(i);
    const double c = (y > 0 ? 1.0 : weight) / (2.0 * config.lambda);
    const double a = fit.duals(static_cast<Eigen::Index>(i));
    const double yf = y * (fit.theta.alpha + data.row(i).dot(fit.theta.beta));
    double residual = 0.0;
    if (a <= 0.0) {
      residual = std::max(0.0, 1.0 - yf);
    } else if (a >= c) {
      residual = std::max(0.0, yf - 1.0);
    } else {
      residual = std::abs(yf - 1.0);
    }
    worst = std::max(worst, residual);
  }
  return worst;
}

}  // namespace svmbcm
