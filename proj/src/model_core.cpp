#include "svmbcm/model_core.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace svmbcm {

namespace {

std::string describe(ParseError::Kind kind) {
  switch (kind) {
    case ParseError::Kind::BadHeader: return "bad header";
    case ParseError::Kind::RaggedRow: return "wrong number of fields";
    case ParseError::Kind::MissingValue: return "missing value";
    case ParseError::Kind::NonNumeric: return "non-numeric value";
    case ParseError::Kind::InvalidLabel: return "invalid label";
    case ParseError::Kind::MixedLabels: return "mixed label alphabets";
    case ParseError::Kind::TooFewRows: return "fewer than 2 data rows";
  }
  return "parse error";
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

bool parse_number(std::string_view text, double& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

}  // namespace

ParseError::ParseError(Kind kind, std::size_t row, std::string column, const std::string& detail)
    : Error("parse error at row " + std::to_string(row) + ", column " + column + ": " + describe(kind) +
            (detail.empty() ? std::string{} : " (" + detail + ")")),
      kind_(kind),
      row_(row),
      column_(std::move(column)) {}

Dataset::Dataset(Vector labels, Matrix covariates) : labels_(std::move(labels)), covariates_(std::move(covariates)) {
  if (labels_.size() != covariates_.rows()) {
    throw DimensionMismatch("dataset: " + std::to_string(labels_.size()) + " labels but " +
                            std::to_string(covariates_.rows()) + " covariate rows");
  }
  if (labels_.size() < 2) throw InvalidDataset("dataset: need at least 2 observations");
  if (covariates_.cols() < 1) throw InvalidDataset("dataset: need at least 1 covariate");
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    if (labels_(i) != 1.0 && labels_(i) != -1.0) {
      throw InvalidDataset("dataset: label at index " + std::to_string(i) + " is not -1 or +1");
    }
  }
  if (!covariates_.allFinite()) throw InvalidDataset("dataset: non-finite covariate");
  names_.reserve(m());
  for (std::size_t j = 0; j < m(); ++j) names_.push_back("x" + std::to_string(j + 1));
}

std::size_t Dataset::count_positive() const noexcept {
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < labels_.size(); ++i) count += labels_(i) > 0.0 ? 1 : 0;
  return count;
}

bool Dataset::has_both_classes() const noexcept {
  const auto pos = count_positive();
  return pos > 0 && pos < n();
}

void Dataset::set_column_names(std::vector<std::string> names) {
  if (names.size() != m()) throw DimensionMismatch("dataset: column name count does not match covariates");
  names_ = std::move(names);
}

Theta::Theta(double a, Vector b) : alpha(a), beta(std::move(b)) {}

Vector Theta::stacked() const {
  Vector v(beta.size() + 1);
  v(0) = alpha;
  v.tail(beta.size()) = beta;
  return v;
}

Theta Theta::from_stacked(const Vector& v) {
  if (v.size() < 2) throw DimensionMismatch("theta: stacked vector needs length >= 2");
  return Theta(v(0), v.tail(v.size() - 1));
}

bool Theta::is_finite() const noexcept { return std::isfinite(alpha) && beta.allFinite(); }

RngStream::RngStream(RngSeed seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.master_seed), static_cast<std::uint32_t>(seed.master_seed >> 32),
                    static_cast<std::uint32_t>(seed.stream_index), static_cast<std::uint32_t>(seed.stream_index >> 32)};
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }
double RngStream::uniform() { return uniform_(engine_); }

Dataset load_csv(std::istream& source) {
  std::string line;
  if (!std::getline(source, line)) throw ParseError(ParseError::Kind::BadHeader, 0, "y", "empty input");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM

  const auto header_fields = split(line);
  if (header_fields.empty() || header_fields.front() != "y") {
    throw ParseError(ParseError::Kind::BadHeader, 0, header_fields.empty() ? "" : std::string(header_fields.front()),
                     "first column must be named y");
  }
  if (header_fields.size() < 2) throw ParseError(ParseError::Kind::BadHeader, 0, "y", "no covariate columns");
  std::vector<std::string> names;
  for (std::size_t j = 1; j < header_fields.size(); ++j) names.emplace_back(header_fields[j]);
  const std::size_t m = names.size();

  enum class Alphabet { Unknown, ZeroOne, MinusOne } alphabet = Alphabet::Unknown;
  std::vector<double> labels;
  std::vector<double> values;
  std::size_t row = 0;
  while (std::getline(source, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto fields = split(line);
    if (fields.size() != m + 1) {
      throw ParseError(ParseError::Kind::RaggedRow, row, fields.size() < m + 1 ? names[fields.size() - 1] : "y",
                       "expected " + std::to_string(m + 1) + " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t j = 0; j <= m; ++j) {
      const std::string column = j == 0 ? "y" : names[j - 1];
      if (fields[j].empty()) throw ParseError(ParseError::Kind::MissingValue, row, column, "");
      double value = 0.0;
      if (!parse_number(fields[j], value)) {
        throw ParseError(ParseError::Kind::NonNumeric, row, column, std::string(fields[j]));
      }
      if (j > 0) {
        values.push_back(value);
        continue;
      }
      if (value == 1.0) {
        labels.push_back(1.0);
      } else if (value == 0.0 || value == -1.0) {
        const Alphabet seen = value == 0.0 ? Alphabet::ZeroOne : Alphabet::MinusOne;
        if (alphabet != Alphabet::Unknown && alphabet != seen) {
          throw ParseError(ParseError::Kind::MixedLabels, row, column, "both 0 and -1 labels present");
        }
        alphabet = seen;
        labels.push_back(-1.0);
      } else {
        throw ParseError(ParseError::Kind::InvalidLabel, row, column, std::string(fields[j]));
      }
    }
  }
  if (row < 2) throw ParseError(ParseError::Kind::TooFewRows, row, "y", "");

  Vector y = Eigen::Map<const Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  Matrix x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(m));
  Dataset data(std::move(y), std::move(x));
  data.set_column_names(std::move(names));
  return data;
}

Dataset load_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return load_csv(in);
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_csv(std::ostream& sink, const Dataset& data) {
  sink << "y";
  for (const auto& name : data.column_names()) sink << ',' << name;
  sink << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    sink << (data.label(i) > 0 ? "1" : "-1");
    for (std::size_t j = 0; j < data.m(); ++j) {
      sink << ',' << format_double(data.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    sink << '\n';
  }
}

double linear_index(const Theta& theta, const Eigen::Ref<const Vector>& x) {
  if (x.size() != theta.beta.size()) {
    throw DimensionMismatch("linear_index: x has " + std::to_string(x.size()) + " entries, beta has " +
                            std::to_string(theta.beta.size()));
  }
  return theta.alpha + x.dot(theta.beta);
}

int classify(const Theta& theta, const Eigen::Ref<const Vector>& x) {
  return linear_index(theta, x) >= 0.0 ? 1 : -1;
}

double rescaled_slope(const Theta& theta, std::size_t numerator, std::size_t denominator) {
  if (numerator >= theta.dim() || denominator >= theta.dim()) {
    throw DimensionMismatch("rescaled_slope: component index out of range");
  }
  const double denom = theta.beta(static_cast<Eigen::Index>(denominator));
  if (denom == 0.0) throw DegenerateEstimateError("rescaled_slope: zero denominator component");
  return theta.beta(static_cast<Eigen::Index>(numerator)) / denom;
}

}  // namespace svmbcm
