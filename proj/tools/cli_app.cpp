#include "cli_app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "svmbcm/diagnostics.hpp"
#include "svmbcm/inference.hpp"
#include "svmbcm/intercept_maxscore.hpp"
#include "svmbcm/mc_harness.hpp"
#include "svmbcm/qmle_logit.hpp"
#include "svmbcm/svm_solver.hpp"

namespace svmbcm::cli {

namespace {

using nlohmann::json;

struct UsageError : Error {
  using Error::Error;
};

struct EstimateFlags {
  std::string input;
  std::string estimator = "svm";
  double lambda = 0.5;
  std::optional<double> tol;
  std::optional<std::size_t> max_iter;
  bool intercept_maxscore = false;
  bool covariance = false;
  std::string output;
};

struct SimulateFlags {
  std::string dgp;
  std::optional<double> alpha;
  std::optional<double> mu;
  std::size_t n = 0;
  std::size_t nsim = 0;
  std::uint64_t seed = 0;
  std::string estimators = "svm";
  std::string output;
  std::size_t threads = 1;
};

struct DiagnoseFlags {
  std::optional<double> mu;
  std::string mu_grid;
  bool threshold = false;
  std::string output;
};

// Writes to --output when given, otherwise to the caller's stream.
void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError("cannot open output file '" + path + "'");
  file << text;
  if (!file) throw UsageError("failed writing output file '" + path + "'");
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(number(m(i, j)));
    rows.push_back(row);
  }
  return rows;
}

json theta_json(const Theta& theta) {
  json beta = json::array();
  for (Eigen::Index j = 0; j < theta.beta.size(); ++j) beta.push_back(number(theta.beta(j)));
  return {{"alpha", number(theta.alpha)}, {"beta", beta}};
}

int cmd_estimate(const EstimateFlags& flags, std::ostream& out) {
  const Estimator estimator = parse_estimator(flags.estimator);
  if (flags.covariance && estimator != Estimator::Svm) {
    throw UsageError("--covariance is only available with --estimator svm");
  }
  const Dataset data = load_csv_file(flags.input);

  json doc;
  doc["estimator"] = to_string(estimator);
  bool converged = false;
  Theta theta;
  std::optional<SvmFit> svm;

  if (estimator == Estimator::Logit) {
    LogitConfig config;
    if (flags.tol) config.tol = *flags.tol;
    if (flags.max_iter) config.max_iter = *flags.max_iter;
    config.validate();
    const LogitFit fit = logit_fit(data, config);
    theta = fit.theta;
    converged = fit.converged;
    doc["theta"] = theta_json(theta);
    doc["objective"] = number(fit.loglik);
    doc["iterations"] = fit.iterations;
    doc["converged"] = fit.converged;
    doc["weight_used"] = nullptr;
    doc["separation"] = fit.separation;
  } else {
    SvmConfig config;
    config.lambda = flags.lambda;
    config.weight_mode = estimator == Estimator::Wsvm ? WeightMode{AutoWeight{}} : WeightMode{NoWeight{}};
    if (flags.tol) config.tol = *flags.tol;
    if (flags.max_iter) config.max_iter = *flags.max_iter;
    config.validate();
    svm = svm_fit(data, config);
    theta = svm->theta;
    converged = svm->converged;
    doc["theta"] = theta_json(theta);
    doc["objective"] = number(svm->primal_objective);
    doc["iterations"] = svm->iterations;
    doc["converged"] = svm->converged;
    doc["weight_used"] = number(svm->weight_used);
  }

  if (flags.intercept_maxscore && theta.is_finite()) {
    const MaxScoreResult ms = maxscore_intercept(data, theta.beta, default_intercept_range(theta.beta));
    doc["alpha_ms"] = number(ms.alpha_ms);
    doc["optimal_interval"] = {number(ms.optimal_interval.lower), number(ms.optimal_interval.upper)};
  }
  if (flags.covariance && converged) {
    const CovarianceEstimate cov = sandwich_covariance(data, *svm);
    doc["covariance"] = matrix_json(cov.covariance);
    doc["bandwidth"] = number(cov.bandwidth);
  }

  emit(flags.output, out, doc.dump(2) + "\n");
  return converged ? kExitOk : kExitNotConverged;
}

std::vector<Estimator> parse_estimator_list(const std::string& list) {
  std::vector<Estimator> out;
  std::stringstream stream(list);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const Estimator e = parse_estimator(item);
    for (Estimator seen : out) {
      if (seen == e) throw UsageError("estimator '" + item + "' listed twice");
    }
    out.push_back(e);
  }
  if (out.empty()) throw UsageError("--estimators is empty");
  return out;
}

int cmd_simulate(const SimulateFlags& flags, std::ostream& out) {
  DgpSpec spec;
  if (flags.dgp == "table1") {
    if (flags.mu) throw UsageError("--mu applies to --dgp table2 only");
    spec = DgpSpec::table1(flags.alpha.value_or(0.0), flags.n);
  } else if (flags.dgp == "table2") {
    if (flags.alpha) throw UsageError("--alpha applies to --dgp table1 only");
    spec = DgpSpec::table2(flags.mu.value_or(0.0), flags.n);
  } else {
    throw UsageError("--dgp must be table1 or table2");
  }
  spec.validate();
  if (flags.nsim < 1) throw UsageError("--nsim must be at least 1");
  if (flags.threads < 1) throw UsageError("--threads must be at least 1");

  SimulationOptions options;
  options.nsim = flags.nsim;
  options.master_seed = flags.seed;
  options.threads = flags.threads;
  const auto rows = run_simulation(spec, parse_estimator_list(flags.estimators), options);
  std::ostringstream csv;
  write_simulation_csv(csv, rows);
  emit(flags.output, out, csv.str());
  return kExitOk;
}

double parse_real(const std::string& text, const std::string& what) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw UsageError("malformed " + what + " '" + text + "'");
  }
  return value;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ':')) parts.push_back(part);
  if (parts.size() != 3 || text.back() == ':') throw UsageError("--mu-grid must look like lo:hi:step");
  const double lo = parse_real(parts[0], "grid start");
  const double hi = parse_real(parts[1], "grid end");
  const double step = parse_real(parts[2], "grid step");
  if (!(step > 0.0) || hi < lo) throw UsageError("--mu-grid needs step > 0 and lo <= hi");
  const double span = (hi - lo) / step;
  if (span > 1e6) throw UsageError("--mu-grid has too many points");
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  std::vector<double> grid(count);
  for (std::size_t k = 0; k < count; ++k) grid[k] = lo + static_cast<double>(k) * step;
  return grid;
}

int cmd_diagnose(const DiagnoseFlags& flags, std::ostream& out) {
  const int modes = (flags.mu ? 1 : 0) + (flags.mu_grid.empty() ? 0 : 1) + (flags.threshold ? 1 : 0);
  if (modes != 1) throw UsageError("diagnose needs exactly one of --mu, --mu-grid, --threshold");
  std::ostringstream csv;
  if (flags.threshold) {
    csv << "mu_star\n" << format_double(threshold_mu()) << '\n';
  } else {
    const std::vector<double> grid = flags.mu ? std::vector<double>{*flags.mu} : parse_grid(flags.mu_grid);
    write_diagnostics_csv(csv, figure1_curve(grid));
  }
  emit(flags.output, out, csv.str());
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Soft-margin SVM and logit estimation for binary choice models"};
  app.name("svmbcm");
  app.require_subcommand(1);

  EstimateFlags est;
  auto* estimate = app.add_subcommand("estimate", "Fit one estimator to a CSV sample and print JSON");
  estimate->add_option("--input", est.input, "CSV with header y,x1,...")->required();
  estimate->add_option("--estimator", est.estimator, "svm | wsvm | logit")->capture_default_str();
  estimate->add_option("--lambda", est.lambda, "ridge penalty (svm, wsvm)")->capture_default_str();
  estimate->add_option("--tol", est.tol, "convergence tolerance");
  estimate->add_option("--max-iter", est.max_iter, "iteration cap");
  estimate->add_flag("--intercept-maxscore", est.intercept_maxscore, "add the maximum score intercept");
  estimate->add_flag("--covariance", est.covariance, "add the sandwich covariance (svm only)");
  estimate->add_option("--output", est.output, "output path (default stdout)");

  SimulateFlags sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study of the rescaled slope; prints CSV");
  simulate->add_option("--dgp", sim.dgp, "table1 | table2")->required();
  simulate->add_option("--alpha", sim.alpha, "intercept for table1 (default 0)");
  simulate->add_option("--mu", sim.mu, "mixture separation for table2 (default 0)");
  simulate->add_option("--n", sim.n, "sample size")->required();
  simulate->add_option("--nsim", sim.nsim, "replications")->required();
  simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate->add_option("--estimators", sim.estimators, "comma list of svm, wsvm, logit")->capture_default_str();
  simulate->add_option("--output", sim.output, "output path (default stdout)");
  simulate->add_option("--threads", sim.threads, "worker threads")->capture_default_str();

  DiagnoseFlags diag;
  auto* diagnose = app.add_subcommand("diagnose", "Imbalance condition in the Gaussian illustration; prints CSV");
  diagnose->add_option("--mu", diag.mu, "single mean of the index");
  diagnose->add_option("--mu-grid", diag.mu_grid, "lo:hi:step");
  diagnose->add_flag("--threshold", diag.threshold, "solve for the threshold mean");
  diagnose->add_option("--output", diag.output, "output path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "svmbcm: " << e.what() << '\n';
    return kExitInput;
  }

  try {
    if (estimate->parsed()) return cmd_estimate(est, out);
    if (simulate->parsed()) return cmd_simulate(sim, out);
    return cmd_diagnose(diag, out);
  } catch (const NotConvergedError& e) {
    err << "svmbcm: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "svmbcm: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace svmbcm::cli
