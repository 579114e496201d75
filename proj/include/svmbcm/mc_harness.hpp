#pragma once

// Monte Carlo replication engine for the rescaled slope beta_1 / beta_2.
//
//   table1(alpha): y = sgn(alpha + (X1 + X2) / sqrt 2 - U),  X1, X2, U iid N(0, 1)
//   table2(mu):    y = sgn(1/2 + X2 - U),  X2 = Z / sqrt(1 + mu^2),
//                  Z ~ 1/2 N(-mu, 1) + 1/2 N(mu, 1),  X1, U iid N(0, 1)

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "svmbcm/model_core.hpp"
#include "svmbcm/qmle_logit.hpp"
#include "svmbcm/svm_solver.hpp"

namespace svmbcm {

enum class Estimator { Svm, Wsvm, Logit };

std::string to_string(Estimator estimator);
/// Accepts "svm", "wsvm", "logit"; throws Error otherwise.
Estimator parse_estimator(std::string_view tag);

struct DgpSpec {
  enum class Kind { Table1, Table2 };

  Kind kind = Kind::Table1;
  double param = 0.0;  ///< alpha for table1, mu for table2
  std::size_t n = 0;

  static DgpSpec table1(double alpha, std::size_t n);
  static DgpSpec table2(double mu, std::size_t n);

  std::string name() const;
  Theta true_theta() const;
  /// 1 for table1, 0 for table2.
  double true_rescaled_slope() const;
  void validate() const;
};

/// Draws n observations from the stream (seed.master_seed, seed.stream_index).
/// Per observation the draw order is X1, X2 (or mixture sign then Z), U.
Dataset generate_sample(const DgpSpec& spec, RngSeed seed);

struct SummaryStats {
  double mean_bias = 0.0;
  double mean_abs_dev = 0.0;
  double rmse = 0.0;
};

/// Throws Error on empty input or non-finite estimates.
SummaryStats summarize(const std::vector<double>& estimates, double true_value);

struct SimSummary {
  Estimator estimator = Estimator::Svm;
  DgpSpec spec;
  std::size_t nsim_completed = 0;
  std::size_t failures = 0;
  /// NaN moments when every replication failed.
  SummaryStats stats;
};

struct SimulationOptions {
  std::size_t nsim = 1;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
  SvmConfig svm;
  LogitConfig logit;
};

/// Fits one estimator and returns beta_1 / beta_2, or nullopt when the fit
/// fails (one-class sample, non-convergence, separation, beta_2 = 0).
std::optional<double> fitted_rescaled_slope(Estimator estimator, const Dataset& data, const SvmConfig& svm,
                                            const LogitConfig& logit);

/// Runs body(r) for r = 0..count-1 on `threads` workers. Bodies must only
/// write to per-replication slots; the first exception is rethrown.
void for_each_replication(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// One summary per requested estimator, in request order. Replication r uses
/// stream (master_seed, r); the reduction runs in replication order, so the
/// result does not depend on the thread count.
std::vector<SimSummary> run_simulation(const DgpSpec& spec, const std::vector<Estimator>& estimators,
                                       const SimulationOptions& options);

/// Header `estimator,dgp,param,n,nsim,failures,mean_bias,mean_abs_dev,rmse`.
void write_simulation_csv(std::ostream& out, const std::vector<SimSummary>& rows);

}  // namespace svmbcm
