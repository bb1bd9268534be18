#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace buyback {

// Error taxonomy. The CLI maps each to its own exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class TaskKind { Classification, Regression };

/// Dense row-major matrix of doubles. Rows are samples, columns features.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  static Matrix fromRows(const std::vector<std::vector<double>>& rows);
  static Matrix column(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return rows_ == 0; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> columnValues(std::size_t c) const;
  Matrix selectRows(std::span<const std::size_t> indices) const;
  Matrix selectColumns(std::span<const std::size_t> indices) const;
  /// Horizontal concatenation; row counts must agree.
  Matrix hconcat(const Matrix& right) const;

  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Seeded generator with hand-rolled distributions so draws are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next();
  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n). n must be > 0.
  std::size_t below(std::size_t n);
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

 private:
  std::uint64_t state_[4];
  bool hasSpare_ = false;
  double spare_ = 0.0;
};

/// Independent child seed for stream `stream` of a root seed (splitmix64 mix).
std::uint64_t deriveSeed(std::uint64_t root, std::uint64_t stream);

/// Identity permutation 0..n-1.
std::vector<std::size_t> iota(std::size_t n);

/// Diagnostics go to stderr; quiet mode suppresses notes but not warnings.
void setQuiet(bool quiet);
void note(const std::string& message);
void warn(const std::string& message);

namespace stats {

double sum(std::span<const double> values);  // Neumaier-compensated
double mean(std::span<const double> values);
/// Sample standard deviation (denominator n - 1); 0 for a single value.
double sampleStd(std::span<const double> values);
/// Population standard deviation (denominator n).
double populationStd(std::span<const double> values);
/// Percentile with linear interpolation between order statistics, p in [0, 1].
double percentile(std::span<const double> values, double p);
double percentileSorted(std::span<const double> sorted, double p);
double median(std::span<const double> values);

}  // namespace stats

}  // namespace buyback
