#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "buyback/common.hpp"
#include "buyback/dates.hpp"
#include "buyback/io.hpp"
#include "json.hpp"

namespace buyback::data {

enum class ColumnKind { Numeric, Categorical };

/// One named column; numeric cells use NaN for missing.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::Numeric;
  std::vector<double> numeric;
  std::vector<std::string> text;

  std::size_t size() const { return kind == ColumnKind::Numeric ? numeric.size() : text.size(); }
};

class FeatureTable {
 public:
  std::size_t rowCount() const { return rowCount_; }
  std::size_t columnCount() const { return columns_.size(); }
  const std::vector<Column>& columns() const { return columns_; }

  void addNumeric(std::string name, std::vector<double> values);
  void addCategorical(std::string name, std::vector<std::string> values);
  bool hasColumn(std::string_view name) const;
  const Column& column(std::string_view name) const;
  Column& column(std::string_view name);

  FeatureTable selectRows(std::span<const std::size_t> rows) const;

  /// Columns named in `categorical` are read as text; all others as numbers.
  static FeatureTable fromCsv(const io::CsvTable& csv, std::span<const std::string_view> categorical);
  io::CsvTable toCsv() const;

 private:
  void checkNewColumn(const std::string& name, std::size_t size);

  std::size_t rowCount_ = 0;
  std::vector<Column> columns_;
};

// Schema names shared with the synthetic generator and the CLI.
inline constexpr std::array<std::string_view, 4> kCategoricalFeatures{"country", "primaryIndustry",
                                                                      "announcementMonth", "announcementDay"};
inline constexpr std::array<std::string_view, 4> kRequiredColumns{"marketCap", "lastSalePrice",
                                                                  "totalEnterpriseValue", "ebit"};
inline constexpr std::array<std::string_view, 4> kIdColumns{"announcementId", "companyId", "announcementDate",
                                                            "split"};

enum class Target { Performance, Overperformance };

std::string targetColumn(Target target, TimeFrame frame);
/// Benchmark return over the frame, e.g. "benchmark_1M".
std::string benchmarkColumn(TimeFrame frame);
/// Every text column name a dataset CSV may carry (ids plus categoricals).
std::vector<std::string_view> textColumns();
/// Feature columns: everything except ids and outcome (performance,
/// overperformance, benchmark) columns, in table order.
std::vector<std::string> featureColumns(const FeatureTable& table);

struct TaskSpec {
  TimeFrame frame = TimeFrame::W1;
  Target target = Target::Performance;
  TaskKind kind = TaskKind::Classification;

  /// e.g. "class-perf-1M", "reg-over-5Y".
  std::string name() const;
  static TaskSpec parse(std::string_view name);
  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// All 24 tasks: frame-major, then classification before regression,
/// performance before overperformance.
std::vector<TaskSpec> allTasks();

struct FilterResult {
  FeatureTable table;
  std::size_t dropped = 0;
};

/// Keeps rows where market cap, last sale price, enterprise value and EBIT
/// are all present and finite.
FilterResult filterMinInfo(const FeatureTable& table);

struct TrimResult {
  std::vector<std::size_t> keptRows;
  double lowerBound = 0.0;
  double upperBound = 0.0;
};

/// Drops values strictly below the `lower` or strictly above the `upper`
/// percentile. Values must be finite; needs at least 3.
TrimResult trimPercentiles(std::span<const double> labels, double lower = 0.01, double upper = 0.99);
FeatureTable trimPercentiles(const FeatureTable& table, std::string_view labelColumn, double lower = 0.01,
                             double upper = 0.99);

/// Z-score of regression labels with its inverse.
struct LabelTransform {
  double mean = 0.0;
  double scale = 1.0;

  double forward(double v) const { return (v - mean) / scale; }
  double inverse(double z) const { return z * scale + mean; }
  static LabelTransform fit(std::span<const double> values);
};

struct Labels {
  std::vector<double> values;
  std::vector<std::size_t> rows;  // table rows the values belong to
  std::size_t excluded = 0;       // rows without a finite target
  std::optional<LabelTransform> transform;
};

/// Classification: 1 when the value is >= 0, else 0. Regression: z-scored
/// with `fitted` when given, otherwise with a transform fitted on these rows.
Labels makeLabels(const FeatureTable& table, const TaskSpec& task,
                  const std::optional<LabelTransform>& fitted = std::nullopt);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded uniform shuffle, test side floor((1 - f) * n). Throws ConfigError
/// unless 0 < f < 1.
Split splitTrainTest(std::size_t rowCount, double trainFraction = 0.8, std::uint64_t seed = 42);

struct ColumnScaling {
  std::string name;
  double median = 0.0;  // imputation value
  double mean = 0.0;
  double scale = 1.0;
  bool constant = false;
  std::size_t missing = 0;
};

struct CategoryCoding {
  std::string name;
  std::vector<std::string> categories;  // most frequent first; code = position / size
};

/// Training-split feature scaling: median imputation, then (x - mean) / std
/// on numeric columns; categoricals are coded by training frequency rank,
/// scaled into [0, 1], when a design matrix is built.
class Standardizer {
 public:
  static Standardizer fit(const FeatureTable& train, const std::vector<std::string>& featureNames);

  FeatureTable apply(const FeatureTable& table) const;
  Matrix design(const FeatureTable& table) const;

  const std::vector<std::string>& featureNames() const { return featureNames_; }
  const std::vector<ColumnScaling>& numeric() const { return numeric_; }
  const std::vector<CategoryCoding>& categorical() const { return categorical_; }
  std::vector<std::string> constantColumns() const;
  std::map<std::string, std::size_t> missingReport() const;

  nlohmann::json toJson() const;
  static Standardizer fromJson(const nlohmann::json& j);

 private:
  std::vector<std::string> featureNames_;
  std::vector<ColumnScaling> numeric_;
  std::vector<CategoryCoding> categorical_;
};

/// Learner-ready matrices for one task over a fixed announcement split.
/// Test rows keep every test announcement; testY is NaN where the target is
/// missing so predictions exist for all of them.
struct TaskData {
  TaskSpec task;
  Matrix trainX;
  std::vector<double> trainY;
  Matrix testX;
  std::vector<double> testY;
  std::vector<std::size_t> trainRows;
  std::vector<std::size_t> testRows;
  std::optional<LabelTransform> labelTransform;
  Standardizer standardizer;
  std::size_t excludedTrain = 0;
  std::size_t trimmed = 0;
};

TaskData buildTaskData(const FeatureTable& announcements, const TaskSpec& task, const Split& split);

}  // namespace buyback::data
