#pragma once

// Core data model shared by every estimator: the labelled sample, the
// affine parameter (intercept + slope), deterministic random streams and
// the sgn-based classifier.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace svmbcm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// CSV ingestion failure. Row numbers count data rows from 1 (the header is
/// row 0).
class ParseError : public Error {
 public:
  enum class Kind { BadHeader, RaggedRow, MissingValue, NonNumeric, InvalidLabel, MixedLabels, TooFewRows };

  ParseError(Kind kind, std::size_t row, std::string column, const std::string& detail);
  Kind kind() const noexcept { return kind_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  Kind kind_;
  std::size_t row_;
  std::string column_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidDataset : public Error {
 public:
  using Error::Error;
};

/// Raised by estimators that need both labels present.
class MissingClassError : public Error {
 public:
  using Error::Error;
};

/// A ratio of slope components whose denominator is exactly zero.
class DegenerateEstimateError : public Error {
 public:
  using Error::Error;
};

/// Labelled sample (y_i, x_i), i = 1..n. Labels live in {-1, +1}.
class Dataset {
 public:
  /// Validates: n >= 2, m >= 1, labels in {-1,+1}, all covariates finite.
  Dataset(Vector labels, Matrix covariates);

  std::size_t n() const noexcept { return static_cast<std::size_t>(labels_.size()); }
  std::size_t m() const noexcept { return static_cast<std::size_t>(covariates_.cols()); }

  const Vector& labels() const noexcept { return labels_; }
  const Matrix& covariates() const noexcept { return covariates_; }
  double label(std::size_t i) const { return labels_(static_cast<Eigen::Index>(i)); }
  auto row(std::size_t i) const { return covariates_.row(static_cast<Eigen::Index>(i)); }

  std::size_t count_positive() const noexcept;
  std::size_t count_negative() const noexcept { return n() - count_positive(); }
  bool has_both_classes() const noexcept;

  /// Covariate names; defaults to x1..xm.
  const std::vector<std::string>& column_names() const noexcept { return names_; }
  void set_column_names(std::vector<std::string> names);

 private:
  Vector labels_;
  Matrix covariates_;
  std::vector<std::string> names_;
};

/// theta = (alpha, beta')'.
struct Theta {
  double alpha = 0.0;
  Vector beta;

  Theta() = default;
  Theta(double a, Vector b);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(beta.size()); }
  /// Stacked (alpha, beta')' of length 1 + m.
  Vector stacked() const;
  static Theta from_stacked(const Vector& v);
  bool is_finite() const noexcept;
};

/// Identifies one reproducible random stream: replication k of a study with
/// master seed s uses RngSeed{s, k}.
struct RngSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
};

/// Random engine for a single stream. The engine state is a pure function of
/// (master_seed, stream_index), so streams can be drawn in any order.
class RngStream {
 public:
  explicit RngStream(RngSeed seed);

  double normal();
  double uniform();
  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Reads a CSV with header row `y,<covariates...>`. Labels may use the
/// {-1,1} or {0,1} alphabet (0 maps to -1) but not both in one file.
Dataset load_csv(std::istream& source);
Dataset load_csv_file(const std::string& path);

/// Writes `y,x1,...` with 17 significant digits, the inverse of load_csv.
void write_csv(std::ostream& sink, const Dataset& data);

/// alpha + x'beta.
double linear_index(const Theta& theta, const Eigen::Ref<const Vector>& x);

/// sgn(alpha + x'beta) with sgn(0) = +1.
int classify(const Theta& theta, const Eigen::Ref<const Vector>& x);

/// beta[numerator] / beta[denominator]; throws DegenerateEstimateError when
/// the denominator component is zero.
double rescaled_slope(const Theta& theta, std::size_t numerator, std::size_t denominator);

/// Round-trip decimal formatting (17 significant digits).
std::string format_double(double value);

}  // namespace svmbcm
