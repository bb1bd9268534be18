#include "buyback/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

namespace buyback::data {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool isOutcomeColumn(std::string_view name) {
  return name.starts_with("performance_") || name.starts_with("overperformance_") ||
         name.starts_with("benchmark_");
}

bool isIdColumn(std::string_view name) {
  return std::find(kIdColumns.begin(), kIdColumns.end(), name) != kIdColumns.end();
}

bool isCategoricalFeature(std::string_view name) {
  return std::find(kCategoricalFeatures.begin(), kCategoricalFeatures.end(), name) != kCategoricalFeatures.end();
}

}  // namespace

void FeatureTable::checkNewColumn(const std::string& name, std::size_t size) {
  if (hasColumn(name)) throw DataError("duplicate column '" + name + "'");
  if (!columns_.empty() && size != rowCount_) {
    throw DataError("column '" + name + "' has " + std::to_string(size) + " rows, table has " +
                    std::to_string(rowCount_));
  }
  rowCount_ = size;
}

void FeatureTable::addNumeric(std::string name, std::vector<double> values) {
  checkNewColumn(name, values.size());
  columns_.push_back({std::move(name), ColumnKind::Numeric, std::move(values), {}});
}

void FeatureTable::addCategorical(std::string name, std::vector<std::string> values) {
  checkNewColumn(name, values.size());
  columns_.push_back({std::move(name), ColumnKind::Categorical, {}, std::move(values)});
}

bool FeatureTable::hasColumn(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(), [name](const Column& c) { return c.name == name; });
}

const Column& FeatureTable::column(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw ConfigError("table has no column '" + std::string(name) + "'");
}

Column& FeatureTable::column(std::string_view name) {
  return const_cast<Column&>(static_cast<const FeatureTable&>(*this).column(name));
}

FeatureTable FeatureTable::selectRows(std::span<const std::size_t> rows) const {
  FeatureTable out;
  for (const auto& c : columns_) {
    if (c.kind == ColumnKind::Numeric) {
      std::vector<double> v(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) v[i] = c.numeric.at(rows[i]);
      out.addNumeric(c.name, std::move(v));
    } else {
      std::vector<std::string> v(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) v[i] = c.text.at(rows[i]);
      out.addCategorical(c.name, std::move(v));
    }
  }
  out.rowCount_ = rows.size();
  return out;
}

FeatureTable FeatureTable::fromCsv(const io::CsvTable& csv, std::span<const std::string_view> categorical) {
  FeatureTable table;
  for (std::size_t c = 0; c < csv.header.size(); ++c) {
    const std::string& name = csv.header[c];
    const bool isText = std::find(categorical.begin(), categorical.end(), name) != categorical.end();
    if (isText) {
      std::vector<std::string> v;
      v.reserve(csv.rows.size());
      for (const auto& row : csv.rows) v.push_back(row[c]);
      table.addCategorical(name, std::move(v));
    } else {
      std::vector<double> v;
      v.reserve(csv.rows.size());
      for (const auto& row : csv.rows) v.push_back(io::parseNumber(row[c]));
      table.addNumeric(name, std::move(v));
    }
  }
  table.rowCount_ = csv.rows.size();
  return table;
}

io::CsvTable FeatureTable::toCsv() const {
  io::CsvTable csv;
  for (const auto& c : columns_) csv.header.push_back(c.name);
  csv.rows.assign(rowCount_, std::vector<std::string>(columns_.size()));
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto& c = columns_[j];
    for (std::size_t r = 0; r < rowCount_; ++r) {
      csv.rows[r][j] = c.kind == ColumnKind::Numeric ? io::formatNumber(c.numeric[r]) : c.text[r];
    }
  }
  return csv;
}

std::string targetColumn(Target target, TimeFrame frame) {
  return std::string(target == Target::Performance ? "performance_" : "overperformance_") +
         std::string(frameLabel(frame));
}

std::string benchmarkColumn(TimeFrame frame) { return "benchmark_" + std::string(frameLabel(frame)); }

std::vector<std::string_view> textColumns() {
  std::vector<std::string_view> names(kIdColumns.begin(), kIdColumns.end());
  names.insert(names.end(), kCategoricalFeatures.begin(), kCategoricalFeatures.end());
  return names;
}

std::vector<std::string> featureColumns(const FeatureTable& table) {
  std::vector<std::string> names;
  for (const auto& c : table.columns()) {
    if (!isIdColumn(c.name) && !isOutcomeColumn(c.name)) names.push_back(c.name);
  }
  return names;
}

std::string TaskSpec::name() const {
  std::string s = kind == TaskKind::Classification ? "class-" : "reg-";
  s += target == Target::Performance ? "perf-" : "over-";
  s += frameLabel(frame);
  return s;
}

TaskSpec TaskSpec::parse(std::string_view name) {
  for (const auto& t : allTasks()) {
    if (t.name() == name) return t;
  }
  throw ConfigError("unknown task '" + std::string(name) + "' (expected e.g. class-perf-1M, reg-over-5Y)");
}

std::vector<TaskSpec> allTasks() {
  std::vector<TaskSpec> tasks;
  for (TimeFrame f : kAllFrames) {
    for (TaskKind k : {TaskKind::Classification, TaskKind::Regression}) {
      for (Target t : {Target::Performance, Target::Overperformance}) tasks.push_back({f, t, k});
    }
  }
  return tasks;
}

FilterResult filterMinInfo(const FeatureTable& table) {
  std::vector<const Column*> required;
  for (auto name : kRequiredColumns) {
    if (!table.hasColumn(name)) throw ConfigError("filterMinInfo: schema lacks column '" + std::string(name) + "'");
    const Column& c = table.column(name);
    if (c.kind != ColumnKind::Numeric) throw ConfigError("filterMinInfo: column '" + c.name + "' is not numeric");
    required.push_back(&c);
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rowCount(); ++r) {
    if (std::all_of(required.begin(), required.end(), [r](const Column* c) { return std::isfinite(c->numeric[r]); })) {
      keep.push_back(r);
    }
  }
  return {table.selectRows(keep), table.rowCount() - keep.size()};
}

TrimResult trimPercentiles(std::span<const double> labels, double lower, double upper) {
  if (labels.size() < 3) throw DataError("trimPercentiles: need at least 3 rows");
  if (!(lower >= 0.0 && lower < upper && upper <= 1.0)) throw DomainError("trimPercentiles: invalid bounds");
  for (double v : labels) {
    if (!std::isfinite(v)) throw DataError("trimPercentiles: non-finite label");
  }
  std::vector<double> sorted(labels.begin(), labels.end());
  std::sort(sorted.begin(), sorted.end());
  TrimResult out;
  out.lowerBound = stats::percentileSorted(sorted, lower);
  out.upperBound = stats::percentileSorted(sorted, upper);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= out.lowerBound && labels[i] <= out.upperBound) out.keptRows.push_back(i);
  }
  return out;
}

FeatureTable trimPercentiles(const FeatureTable& table, std::string_view labelColumn, double lower, double upper) {
  const Column& c = table.column(labelColumn);
  if (c.kind != ColumnKind::Numeric) throw ConfigError("trimPercentiles: label column must be numeric");
  return table.selectRows(trimPercentiles(c.numeric, lower, upper).keptRows);
}

LabelTransform LabelTransform::fit(std::span<const double> values) {
  if (values.empty()) throw DataError("LabelTransform::fit: no values");
  LabelTransform t;
  t.mean = stats::mean(values);
  const double sd = stats::populationStd(values);
  t.scale = sd > 0.0 ? sd : 1.0;
  return t;
}

Labels makeLabels(const FeatureTable& table, const TaskSpec& task, const std::optional<LabelTransform>& fitted) {
  const Column& c = table.column(targetColumn(task.target, task.frame));
  Labels out;
  std::vector<double> raw;
  for (std::size_t r = 0; r < table.rowCount(); ++r) {
    const double v = c.numeric[r];
    if (!std::isfinite(v)) {
      ++out.excluded;
      continue;
    }
    out.rows.push_back(r);
    raw.push_back(v);
  }
  if (task.kind == TaskKind::Classification) {
    out.values.reserve(raw.size());
    for (double v : raw) out.values.push_back(v >= 0.0 ? 1.0 : 0.0);
    return out;
  }
  if (raw.empty() && !fitted) return out;
  out.transform = fitted ? *fitted : LabelTransform::fit(raw);
  out.values.reserve(raw.size());
  for (double v : raw) out.values.push_back(out.transform->forward(v));
  return out;
}

Split splitTrainTest(std::size_t rowCount, double trainFraction, std::uint64_t seed) {
  if (!(trainFraction > 0.0 && trainFraction < 1.0)) throw ConfigError("trainFraction must lie in (0, 1)");
  std::vector<std::size_t> order = iota(rowCount);
  Rng rng(seed);
  rng.shuffle(order);
  // ceil on the train side == floor on the test side; the epsilon absorbs
  // representation error such as 0.8 * 10 = 8.000000000000002.
  const double exact = trainFraction * static_cast<double>(rowCount);
  auto trainCount = static_cast<std::size_t>(std::ceil(exact - 1e-9));
  trainCount = std::min(trainCount, rowCount);
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(trainCount));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(trainCount), order.end());
  return split;
}

Standardizer Standardizer::fit(const FeatureTable& train, const std::vector<std::string>& featureNames) {
  if (train.rowCount() == 0) throw DataError("Standardizer::fit: empty training table");
  Standardizer s;
  s.featureNames_ = featureNames;
  for (const auto& name : featureNames) {
    const Column& c = train.column(name);
    if (c.kind == ColumnKind::Categorical || isCategoricalFeature(name)) {
      if (c.kind != ColumnKind::Categorical) throw ConfigError("column '" + name + "' must be categorical");
      std::map<std::string, std::size_t> counts;
      for (const auto& v : c.text) ++counts[v];
      std::vector<std::pair<std::string, std::size_t>> ordered(counts.begin(), counts.end());
      std::stable_sort(ordered.begin(), ordered.end(),
                       [](const auto& a, const auto& b) { return a.second > b.second; });
      CategoryCoding coding{name, {}};
      for (auto& [cat, n] : ordered) coding.categories.push_back(cat);
      s.categorical_.push_back(std::move(coding));
      continue;
    }
    ColumnScaling scaling;
    scaling.name = name;
    std::vector<double> present;
    for (double v : c.numeric) {
      if (std::isfinite(v)) present.push_back(v);
    }
    scaling.missing = c.numeric.size() - present.size();
    scaling.median = present.empty() ? 0.0 : stats::median(present);
    std::vector<double> imputed(c.numeric);
    for (double& v : imputed) {
      if (!std::isfinite(v)) v = scaling.median;
    }
    scaling.mean = stats::mean(imputed);
    const double sd = stats::populationStd(imputed);
    scaling.constant = !(sd > 0.0);
    scaling.scale = scaling.constant ? 1.0 : sd;
    s.numeric_.push_back(std::move(scaling));
  }
  return s;
}

FeatureTable Standardizer::apply(const FeatureTable& table) const {
  FeatureTable out;
  for (const auto& c : table.columns()) {
    auto it = std::find_if(numeric_.begin(), numeric_.end(), [&c](const ColumnScaling& s) { return s.name == c.name; });
    if (it == numeric_.end()) {
      if (c.kind == ColumnKind::Numeric) out.addNumeric(c.name, c.numeric);
      else out.addCategorical(c.name, c.text);
      continue;
    }
    std::vector<double> v(c.numeric.size());
    for (std::size_t r = 0; r < v.size(); ++r) {
      const double x = std::isfinite(c.numeric[r]) ? c.numeric[r] : it->median;
      v[r] = it->constant ? 0.0 : (x - it->mean) / it->scale;
    }
    out.addNumeric(c.name, std::move(v));
  }
  return out;
}

Matrix Standardizer::design(const FeatureTable& table) const {
  Matrix x(table.rowCount(), featureNames_.size());
  for (std::size_t j = 0; j < featureNames_.size(); ++j) {
    const Column& c = table.column(featureNames_[j]);
    auto num = std::find_if(numeric_.begin(), numeric_.end(),
                            [&](const ColumnScaling& s) { return s.name == featureNames_[j]; });
    if (num != numeric_.end()) {
      if (c.kind != ColumnKind::Numeric) throw DataError("column '" + c.name + "' changed kind");
      for (std::size_t r = 0; r < table.rowCount(); ++r) {
        const double v = std::isfinite(c.numeric[r]) ? c.numeric[r] : num->median;
        x(r, j) = num->constant ? 0.0 : (v - num->mean) / num->scale;
      }
      continue;
    }
    auto cat = std::find_if(categorical_.begin(), categorical_.end(),
                            [&](const CategoryCoding& cc) { return cc.name == featureNames_[j]; });
    // Frequency rank over the category count keeps codes in [0, 1]; unseen
    // categories share the code 1.
    const double known = static_cast<double>(cat->categories.size());
    std::unordered_map<std::string, double> codes;
    for (std::size_t k = 0; k < cat->categories.size(); ++k) codes[cat->categories[k]] = static_cast<double>(k) / known;
    for (std::size_t r = 0; r < table.rowCount(); ++r) {
      auto it = codes.find(c.text[r]);
      x(r, j) = it != codes.end() ? it->second : 1.0;
    }
  }
  return x;
}

std::vector<std::string> Standardizer::constantColumns() const {
  std::vector<std::string> out;
  for (const auto& s : numeric_) {
    if (s.constant) out.push_back(s.name);
  }
  return out;
}

std::map<std::string, std::size_t> Standardizer::missingReport() const {
  std::map<std::string, std::size_t> out;
  for (const auto& s : numeric_) out[s.name] = s.missing;
  return out;
}

nlohmann::json Standardizer::toJson() const {
  nlohmann::json j;
  j["featureNames"] = featureNames_;
  j["numeric"] = nlohmann::json::array();
  for (const auto& s : numeric_) {
    j["numeric"].push_back({{"name", s.name},
                            {"median", s.median},
                            {"mean", s.mean},
                            {"scale", s.scale},
                            {"constant", s.constant},
                            {"missing", s.missing}});
  }
  j["categorical"] = nlohmann::json::array();
  for (const auto& c : categorical_) j["categorical"].push_back({{"name", c.name}, {"categories", c.categories}});
  return j;
}

Standardizer Standardizer::fromJson(const nlohmann::json& j) {
  Standardizer s;
  s.featureNames_ = j.at("featureNames").get<std::vector<std::string>>();
  for (const auto& n : j.at("numeric")) {
    s.numeric_.push_back({n.at("name").get<std::string>(), n.at("median").get<double>(), n.at("mean").get<double>(),
                          n.at("scale").get<double>(), n.at("constant").get<bool>(),
                          n.at("missing").get<std::size_t>()});
  }
  for (const auto& c : j.at("categorical")) {
    s.categorical_.push_back({c.at("name").get<std::string>(), c.at("categories").get<std::vector<std::string>>()});
  }
  return s;
}

TaskData buildTaskData(const FeatureTable& announcements, const TaskSpec& task, const Split& split) {
  TaskData out;
  out.task = task;
  const Column& target = announcements.column(targetColumn(task.target, task.frame));

  std::vector<std::size_t> trainRows;
  for (std::size_t r : split.train) {
    if (std::isfinite(target.numeric.at(r))) trainRows.push_back(r);
    else ++out.excludedTrain;
  }
  if (task.kind == TaskKind::Regression && trainRows.size() >= 3) {
    std::vector<double> values;
    for (std::size_t r : trainRows) values.push_back(target.numeric[r]);
    const TrimResult trim = trimPercentiles(values);
    std::vector<std::size_t> kept;
    for (std::size_t i : trim.keptRows) kept.push_back(trainRows[i]);
    out.trimmed = trainRows.size() - kept.size();
    trainRows = std::move(kept);
  }
  if (trainRows.empty()) throw DataError("task " + task.name() + ": no training rows with a target");

  const FeatureTable train = announcements.selectRows(trainRows);
  const FeatureTable test = announcements.selectRows(split.test);
  out.standardizer = Standardizer::fit(train, featureColumns(announcements));
  out.trainX = out.standardizer.design(train);
  out.testX = out.standardizer.design(test);

  const Labels trainLabels = makeLabels(train, task);
  out.trainY = trainLabels.values;
  out.labelTransform = trainLabels.transform;
  out.trainRows = trainRows;
  out.testRows = split.test;

  out.testY.assign(split.test.size(), kNaN);
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    const double v = target.numeric.at(split.test[i]);
    if (!std::isfinite(v)) continue;
    if (task.kind == TaskKind::Classification) out.testY[i] = v >= 0.0 ? 1.0 : 0.0;
    else out.testY[i] = out.labelTransform->forward(v);
  }
  return out;
}

}  // namespace buyback::data
