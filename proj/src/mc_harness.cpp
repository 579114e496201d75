#include "svmbcm/mc_harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

namespace svmbcm {

std::string to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::Svm:
      return "svm";
    case Estimator::Wsvm:
      return "wsvm";
    case Estimator::Logit:
      return "logit";
  }
  return "unknown";
}

Estimator parse_estimator(std::string_view tag) {
  if (tag == "svm") return Estimator::Svm;
  if (tag == "wsvm") return Estimator::Wsvm;
  if (tag == "logit") return Estimator::Logit;
  throw Error("unknown estimator '" + std::string(tag) + "' (expected svm, wsvm or logit)");
}

DgpSpec DgpSpec::table1(double alpha, std::size_t n) { return {Kind::Table1, alpha, n}; }
DgpSpec DgpSpec::table2(double mu, std::size_t n) { return {Kind::Table2, mu, n}; }

std::string DgpSpec::name() const { return kind == Kind::Table1 ? "table1" : "table2"; }

Theta DgpSpec::true_theta() const {
  Vector beta(2);
  if (kind == Kind::Table1) {
    beta << std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0;
    return {param, beta};
  }
  beta << 0.0, 1.0;
  return {0.5, beta};
}

double DgpSpec::true_rescaled_slope() const { return kind == Kind::Table1 ? 1.0 : 0.0; }

void DgpSpec::validate() const {
  if (n < 2) throw Error("dgp: n must be at least 2");
  if (!std::isfinite(param)) throw Error("dgp: parameter must be finite");
  if (kind == Kind::Table2 && param < 0.0) throw Error("dgp: table2 requires mu >= 0");
}

Dataset generate_sample(const DgpSpec& spec, RngSeed seed) {
  spec.validate();
  RngStream rng(seed);
  const auto n = static_cast<Eigen::Index>(spec.n);
  Matrix x(n, 2);
  Vector y(n);
  const double alpha = spec.kind == DgpSpec::Kind::Table1 ? spec.param : 0.5;
  const double scale = 1.0 / std::sqrt(1.0 + spec.param * spec.param);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = rng.normal();
    double index = alpha;
    double x2 = 0.0;
    if (spec.kind == DgpSpec::Kind::Table1) {
      x2 = rng.normal();
      index += (x1 + x2) / std::numbers::sqrt2;
    } else {
      const double centre = rng.uniform() < 0.5 ? -spec.param : spec.param;
      x2 = (centre + rng.normal()) * scale;
      index += x2;
    }
    const double u = rng.normal();
    x(i, 0) = x1;
    x(i, 1) = x2;
    y(i) = index - u >= 0.0 ? 1.0 : -1.0;
  }
  return {std::move(y), std::move(x)};
}

SummaryStats summarize(const std::vector<double>& estimates, double true_value) {
  if (estimates.empty()) throw Error("summarize: no estimates");
  double sum = 0.0, abs_sum = 0.0, sq_sum = 0.0;
  for (double e : estimates) {
    if (!std::isfinite(e)) throw Error("summarize: non-finite estimate");
    const double d = e - true_value;
    sum += d;
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const double count = static_cast<double>(estimates.size());
  return {sum / count, abs_sum / count, std::sqrt(sq_sum / count)};
}

std::optional<double> fitted_rescaled_slope(Estimator estimator, const Dataset& data, const SvmConfig& svm,
                                            const LogitConfig& logit) {
  if (!data.has_both_classes()) return std::nullopt;
  Theta theta;
  if (estimator == Estimator::Logit) {
    const LogitFit fit = logit_fit(data, logit);
    if (!fit.converged || fit.separation) return std::nullopt;
    theta = fit.theta;
  } else {
    SvmConfig config = svm;
    config.weight_mode = estimator == Estimator::Wsvm ? WeightMode{AutoWeight{}} : WeightMode{NoWeight{}};
    const SvmFit fit = svm_fit(data, config);
    if (!fit.converged) return std::nullopt;
    theta = fit.theta;
  }
  if (theta.dim() < 2 || theta.beta(1) == 0.0) return std::nullopt;
  const double ratio = theta.beta(0) / theta.beta(1);
  if (!std::isfinite(ratio)) return std::nullopt;
  return ratio;
}

void for_each_replication(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t r = 0; r < count; ++r) body(r);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t r = next++; r < count; r = next++) {
      try {
        body(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

std::vector<SimSummary> run_simulation(const DgpSpec& spec, const std::vector<Estimator>& estimators,
                                       const SimulationOptions& options) {
  spec.validate();
  if (options.nsim < 1) throw Error("run_simulation: nsim must be at least 1");
  if (estimators.empty()) throw Error("run_simulation: no estimators requested");
  options.svm.validate();
  options.logit.validate();

  const std::size_t k = estimators.size();
  std::vector<std::optional<double>> slots(options.nsim * k);
  for_each_replication(options.nsim, options.threads, [&](std::size_t r) {
    const Dataset data = generate_sample(spec, {options.master_seed, r});
    for (std::size_t e = 0; e < k; ++e) {
      slots[r * k + e] = fitted_rescaled_slope(estimators[e], data, options.svm, options.logit);
    }
  });

  std::vector<SimSummary> out;
  for (std::size_t e = 0; e < k; ++e) {
    SimSummary row;
    row.estimator = estimators[e];
    row.spec = spec;
    std::vector<double> kept;
    kept.reserve(options.nsim);
    for (std::size_t r = 0; r < options.nsim; ++r) {
      if (slots[r * k + e]) kept.push_back(*slots[r * k + e]);
    }
    row.nsim_completed = kept.size();
    row.failures = options.nsim - kept.size();
    if (kept.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.stats = {nan, nan, nan};
    } else {
      row.stats = summarize(kept, spec.true_rescaled_slope());
    }
    out.push_back(row);
  }
  return out;
}

void write_simulation_csv(std::ostream& out, const std::vector<SimSummary>& rows) {
  out << "estimator,dgp,param,n,nsim,failures,mean_bias,mean_abs_dev,rmse\n";
  for (const auto& row : rows) {
    out << to_string(row.estimator) << ',' << row.spec.name() << ',' << format_double(row.spec.param) << ','
        << row.spec.n << ',' << row.nsim_completed + row.failures << ',' << row.failures << ','
        << format_double(row.stats.mean_bias) << ',' << format_double(row.stats.mean_abs_dev) << ','
        << format_double(row.stats.rmse) << '\n';
  }
}

}  // namespace svmbcm
