#include "buyback/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "buyback/backtest.hpp"
#include "buyback/dataset.hpp"
#include "buyback/event_study.hpp"
#include "buyback/io.hpp"
#include "buyback/learners.hpp"
#include "buyback/news_classifier.hpp"

namespace buyback::cli {

namespace fs = std::filesystem;

std::string configHash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string nowTimestamp() {
  return formatTimestamp(std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()));
}

void require(const fs::path& path) {
  if (!fs::exists(path)) throw MissingArtifact(path);
}

class Manifest {
 public:
  Manifest(const Context& ctx, std::string command)
      : ctx_(ctx), command_(std::move(command)), startedAt_(nowTimestamp()) {}

  void input(const fs::path& p) { inputs_.push_back(p.string()); }
  void output(const fs::path& p) { outputs_.push_back(p.string()); }
  nlohmann::json& details() { return details_; }

  void write() const {
    nlohmann::json j{{"command", command_},
                     {"configHash", configHash(ctx_.resolvedConfig)},
                     {"seeds", {{"seed", ctx_.seed}}},
                     {"budgetMode", ctx_.budgetMode == automl::Budget::Mode::Trials ? "trials" : "wallclock"},
                     {"inputs", inputs_},
                     {"outputs", outputs_},
                     {"startedAt", startedAt_},
                     {"finishedAt", nowTimestamp()},
                     {"versions", {{"tool", kToolVersion}, {"modelFormat", learn::kModelFormatVersion}}},
                     {"details", details_}};
    const fs::path path = Paths{ctx_.work}.manifest(command_);
    fs::create_directories(path.parent_path());
    io::writeText(path, j.dump(2) + "\n");
  }

 private:
  const Context& ctx_;
  std::string command_;
  std::string startedAt_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  nlohmann::json details_ = nlohmann::json::object();
};

// Writes a CSV and validates it against its own header.
void writeTable(const fs::path& path, const io::CsvTable& table, Manifest& manifest) {
  fs::create_directories(path.parent_path());
  io::writeCsv(path, table);
  io::validateCsv(path, table.header);
  manifest.output(path);
}

std::string fixed(double v) { return std::isfinite(v) ? io::formatFixed(v, 6) : ""; }
std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : ""; }

data::FeatureTable loadDataset(const Paths& paths, Manifest& manifest) {
  require(paths.dataset());
  manifest.input(paths.dataset());
  const auto text = data::textColumns();
  return data::FeatureTable::fromCsv(io::readCsv(paths.dataset()), text);
}

data::Split splitOf(const data::FeatureTable& table) {
  const auto& col = table.column("split");
  data::Split split;
  for (std::size_t r = 0; r < table.rowCount(); ++r) {
    if (col.text[r] == "train") split.train.push_back(r);
    else if (col.text[r] == "test") split.test.push_back(r);
    else throw DataError("dataset row " + std::to_string(r) + ": split must be train or test");
  }
  return split;
}

std::string markdownTable(const io::CsvTable& t) {
  std::string out = "|";
  for (const auto& h : t.header) out += " " + h + " |";
  out += "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) out += " --- |";
  out += "\n";
  for (const auto& row : t.rows) {
    out += "|";
    for (const auto& cell : row) out += " " + (cell.empty() ? std::string("-") : cell) + " |";
    out += "\n";
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- synth

void runSynth(const Context& ctx, synth::GeneratorConfig config) {
  config.seed = ctx.seed;
  synth::validate(config);
  Manifest manifest(ctx, "synth");
  const Paths paths{ctx.work};
  const auto corpus = synth::generateCorpus(config);
  const auto market = synth::generateMarket(config);
  synth::writeAll(paths.raw(), market, corpus);
  for (const auto& p : {paths.benchmark(), paths.vix(), paths.news(), paths.fundamentals(), paths.corpus()}) {
    manifest.output(p);
  }
  manifest.output(paths.prices());
  std::size_t flagged = 0;
  for (const auto& a : market.announcements) flagged += a.flagged ? 1 : 0;
  manifest.details() = {{"corpusItems", corpus.size()},
                        {"newsItems", market.news.size()},
                        {"announcements", market.announcements.size()},
                        {"flaggedAnnouncements", flagged},
                        {"companies", market.stocks.size()},
                        {"plantedEffect", config.plantedEffect},
                        {"plantedFrame", frameLabel(config.plantedFrame)}};
  manifest.write();
  note("synth: " + std::to_string(market.news.size()) + " news items, " +
       std::to_string(market.announcements.size()) + " announcements, " + std::to_string(corpus.size()) +
       " corpus items");
}

// ---------------------------------------------------------------- classify

ClassifySummary runClassify(const Context& ctx, const ClassifyOptions& options) {
  const Paths paths{ctx.work};
  Manifest manifest(ctx, "classify");
  const fs::path input = options.input.value_or(paths.news());
  require(input);
  manifest.input(input);
  if (options.dedupDays < 0) throw ConfigError("--dedup-days must be >= 0");

  std::optional<news::CompiledRuleSet> rules;
  if (options.classifier == "regex") {
    const fs::path rulePath = options.rules.empty() ? news::defaultRuleSetPath() : options.rules;
    rules.emplace(news::loadRuleSet(rulePath));
    manifest.input(rulePath);
  } else if (options.classifier != "transformer") {
    throw ConfigError("unknown classifier '" + options.classifier + "' (expected regex or transformer)");
  } else if (options.transformerCommand.empty() && !options.transformerPredictions) {
    throw ConfigError("--classifier transformer needs --transformer-cmd or --transformer-predictions");
  }

  const auto records = io::readJsonl(input);
  std::vector<news::NewsItem> items;
  std::vector<std::string> partitions;
  for (std::size_t i = 0; i < records.size(); ++i) {
    items.push_back(news::newsItemFromJson(records[i]));
    if (items.back().id.empty()) items.back().id = "item" + std::to_string(i + 1);
    partitions.push_back(records[i].contains("partition") ? records[i].at("partition").get<std::string>() : "");
  }
  std::vector<std::size_t> order = iota(items.size());
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return items[a].timestamp < items[b].timestamp; });

  std::vector<bool> predicted(items.size(), false);
  std::map<std::string, double> probability;
  if (rules) {
    for (std::size_t i = 0; i < items.size(); ++i) predicted[i] = news::isBuyback(items[i].headline, *rules);
  } else {
    fs::path predictionPath;
    if (options.transformerPredictions) {
      predictionPath = *options.transformerPredictions;
      require(predictionPath);
    } else {
      const fs::path dir = paths.classified().parent_path();
      fs::create_directories(dir);
      const fs::path in = dir / "transformer_input.jsonl";
      predictionPath = dir / "transformer_predictions.jsonl";
      std::vector<nlohmann::json> rows;
      for (const auto& item : items) rows.push_back(news::toJson(item));
      io::writeJsonl(in, rows);
      fs::remove(predictionPath);
      const std::string command =
          options.transformerCommand + " \"" + in.string() + "\" \"" + predictionPath.string() + "\"";
      const int status = std::system(command.c_str());
      if (status != 0) throw DataError("transformer command failed with status " + std::to_string(status));
      require(predictionPath);
    }
    manifest.input(predictionPath);
    const auto predictions = news::readExternalPredictions(predictionPath);
    const auto aligned = news::alignPredictions(items, predictions);
    for (std::size_t i = 0; i < items.size(); ++i) predicted[i] = aligned[i];
    for (const auto& p : predictions) probability[p.id] = p.probBuyback;
  }

  std::vector<nlohmann::json> classified;
  std::vector<news::NewsItem> positives;
  for (std::size_t i : order) {
    nlohmann::json j = news::toJson(items[i]);
    j["isBuyback"] = static_cast<bool>(predicted[i]);
    if (auto it = probability.find(items[i].id); it != probability.end()) j["probBuyback"] = it->second;
    classified.push_back(std::move(j));
    if (predicted[i]) positives.push_back(items[i]);
  }
  const auto announcements = news::dedupWindow(positives, options.dedupDays);
  std::vector<nlohmann::json> announcementRows;
  for (const auto& a : announcements) announcementRows.push_back(news::toJson(a));

  fs::create_directories(paths.classified().parent_path());
  io::writeJsonl(paths.classified(), classified);
  io::writeJsonl(paths.announcements(), announcementRows);
  manifest.output(paths.classified());
  manifest.output(paths.announcements());

  ClassifySummary summary;
  summary.items = items.size();
  summary.positives = positives.size();
  summary.announcements = announcements.size();
  const bool labeled =
      !items.empty() && std::all_of(items.begin(), items.end(), [](const auto& it) { return it.label.has_value(); });
  if (labeled) {
    std::vector<bool> labels;
    for (const auto& it : items) labels.push_back(*it.label);
    const auto counts = news::score(predicted, labels);
    nlohmann::json metrics{{"classifier", options.classifier},
                           {"total", counts.total()},
                           {"truePositives", counts.truePositives},
                           {"falsePositives", counts.falsePositives},
                           {"trueNegatives", counts.trueNegatives},
                           {"falseNegatives", counts.falseNegatives},
                           {"accuracy", counts.accuracy()}};
    std::map<std::string, std::pair<std::size_t, std::size_t>> byPartition;  // items, errors
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (partitions[i].empty()) continue;
      auto& [n, errors] = byPartition[partitions[i]];
      ++n;
      errors += predicted[i] != labels[i] ? 1 : 0;
    }
    for (const auto& [name, pe] : byPartition) {
      metrics["partitions"][name] = {{"items", pe.first}, {"errors", pe.second}};
    }
    io::writeText(paths.classifyMetrics(), metrics.dump(2) + "\n");
    manifest.output(paths.classifyMetrics());
    std::printf("accuracy %.4f (TP %zu, FP %zu, TN %zu, FN %zu)\n", counts.accuracy(), counts.truePositives,
                counts.falsePositives, counts.trueNegatives, counts.falseNegatives);
    summary.metrics = std::move(metrics);
  } else {
    fs::remove(paths.classifyMetrics());
  }
  manifest.details() = {{"classifier", options.classifier},
                        {"items", summary.items},
                        {"positives", summary.positives},
                        {"announcements", summary.announcements},
                        {"dedupDays", options.dedupDays}};
  manifest.write();
  note("classify: " + std::to_string(summary.positives) + " of " + std::to_string(summary.items) +
       " items flagged, " + std::to_string(summary.announcements) + " announcements after dedup");
  return summary;
}

// ---------------------------------------------------------------- dataset

void runDataset(const Context& ctx, const DatasetOptions& options) {
  const Paths paths{ctx.work};
  Manifest manifest(ctx, "dataset");
  if (!(options.trainFraction > 0.0 && options.trainFraction < 1.0)) {
    throw ConfigError("--train-fraction must lie in (0, 1)");
  }
  for (const auto& p : {paths.announcements(), paths.fundamentals(), paths.benchmark(), paths.vix()}) {
    require(p);
    manifest.input(p);
  }
  const auto text = data::textColumns();
  const data::FeatureTable fundamentals = data::FeatureTable::fromCsv(io::readCsv(paths.fundamentals()), text);
  const event::PriceSeries benchmark = event::readPriceCsv(paths.benchmark(), "benchmark");
  const event::PriceSeries vix = event::readPriceCsv(paths.vix(), "vix");

  std::map<std::string, std::size_t> fundamentalRow;
  const auto& idCol = fundamentals.column("announcementId");
  for (std::size_t r = 0; r < fundamentals.rowCount(); ++r) fundamentalRow.emplace(idCol.text[r], r);

  std::map<std::string, std::optional<event::PriceSeries>> prices;
  std::vector<std::size_t> rows;
  std::vector<news::NewsItem> kept;
  std::size_t noFundamentals = 0;
  std::size_t noPrices = 0;
  for (const auto& record : io::readJsonl(paths.announcements())) {
    const news::NewsItem item = news::newsItemFromJson(record);
    const auto it = fundamentalRow.find(item.id);
    if (it == fundamentalRow.end()) {
      ++noFundamentals;
      continue;
    }
    auto [slot, inserted] = prices.try_emplace(item.companyId);
    if (inserted) {
      const fs::path file = paths.prices() / (item.companyId + ".csv");
      if (fs::exists(file)) slot->second = event::readPriceCsv(file, item.companyId);
    }
    if (!slot->second) {
      ++noPrices;
      continue;
    }
    rows.push_back(it->second);
    kept.push_back(item);
  }
  manifest.input(paths.prices());

  const data::FeatureTable selected = fundamentals.selectRows(rows);
  data::FeatureTable table;
  std::vector<std::string> ids, companies, dates, months, dayOfMonth;
  std::vector<double> vixValues;
  std::map<std::string, std::vector<double>> outcomes;
  for (const auto& item : kept) {
    const Date date = dateOf(item.timestamp);
    const std::chrono::year_month_day ymd{date};
    ids.push_back(item.id);
    companies.push_back(item.companyId);
    dates.push_back(formatDate(date));
    months.push_back(std::to_string(static_cast<unsigned>(ymd.month())));
    dayOfMonth.push_back(std::to_string(static_cast<unsigned>(ymd.day())));
    const auto vixPoint = vix.atOrBefore(date);
    vixValues.push_back(vixPoint && (date - vixPoint->date).count() <= event::kMaxStalenessDays ? vixPoint->close
                                                                                                 : kNaN);
    const auto& series = *prices.at(item.companyId);
    for (TimeFrame f : kAllFrames) {
      const auto stock = event::horizonReturn(series, date, f);
      const auto bench = event::horizonReturn(benchmark, date, f);
      outcomes[data::targetColumn(data::Target::Performance, f)].push_back(stock.value_or(kNaN));
      outcomes[data::benchmarkColumn(f)].push_back(bench.value_or(kNaN));
      outcomes[data::targetColumn(data::Target::Overperformance, f)].push_back(
          stock && bench ? event::overperformance(*stock, *bench) : kNaN);
    }
  }
  table.addCategorical("announcementId", std::move(ids));
  table.addCategorical("companyId", std::move(companies));
  table.addCategorical("announcementDate", std::move(dates));
  table.addCategorical("announcementMonth", std::move(months));
  table.addCategorical("announcementDay", std::move(dayOfMonth));
  for (const auto& c : selected.columns()) {
    if (c.name == "announcementId" || c.name == "companyId") continue;
    if (c.kind == data::ColumnKind::Categorical) table.addCategorical(c.name, c.text);
    else table.addNumeric(c.name, c.numeric);
  }
  table.addNumeric("vix", std::move(vixValues));
  for (TimeFrame f : kAllFrames) {
    for (const std::string& name : {data::targetColumn(data::Target::Performance, f), data::benchmarkColumn(f),
                                    data::targetColumn(data::Target::Overperformance, f)}) {
      table.addNumeric(name, std::move(outcomes[name]));
    }
  }

  const data::FilterResult filtered = data::filterMinInfo(table);
  data::FeatureTable out = filtered.table;
  const data::Split split = data::splitTrainTest(out.rowCount(), options.trainFraction, options.splitSeed);
  std::vector<std::string> splitCol(out.rowCount());
  for (std::size_t r : split.train) splitCol[r] = "train";
  for (std::size_t r : split.test) splitCol[r] = "test";
  out.addCategorical("split", std::move(splitCol));

  writeTable(paths.dataset(), out.toCsv(), manifest);
  manifest.details() = {{"announcements", kept.size() + noFundamentals + noPrices},
                        {"droppedNoFundamentals", noFundamentals},
                        {"droppedNoPrices", noPrices},
                        {"droppedMinInfo", filtered.dropped},
                        {"rows", out.rowCount()},
                        {"trainRows", split.train.size()},
                        {"testRows", split.test.size()},
                        {"splitSeed", options.splitSeed},
                        {"trainFraction", options.trainFraction}};
  manifest.write();
  note("dataset: " + std::to_string(out.rowCount()) + " rows (" + std::to_string(split.train.size()) + " train, " +
       std::to_string(split.test.size()) + " test), " + std::to_string(filtered.dropped) +
       " dropped for missing required values");
}

// ---------------------------------------------------------------- stats

namespace {

std::vector<double> finiteValues(const data::FeatureTable& table, const std::string& column,
                                 const std::vector<std::size_t>* rows = nullptr) {
  const auto& values = table.column(column).numeric;
  std::vector<double> out;
  auto take = [&](std::size_t r) {
    if (std::isfinite(values[r])) out.push_back(values[r]);
  };
  if (rows) {
    for (std::size_t r : *rows) take(r);
  } else {
    for (std::size_t r = 0; r < values.size(); ++r) take(r);
  }
  return out;
}

std::string targetName(data::Target t) { return t == data::Target::Performance ? "performance" : "overperformance"; }

}  // namespace

void runStats(const Context& ctx, const StatsOptions& options) {
  const Paths paths{ctx.work};
  Manifest manifest(ctx, "stats");
  if (!(options.vixThreshold > 0.0)) throw ConfigError("--vix-threshold must be positive");
  const data::FeatureTable table = loadDataset(paths, manifest);
  const fs::path dir = paths.stats();

  for (data::Target target : {data::Target::Performance, data::Target::Overperformance}) {
    io::CsvTable t;
    t.header = {"timeFrame", "count", "mean", "standardDeviation", "percentile25", "median", "percentile75"};
    for (TimeFrame f : kAllFrames) {
      const auto values = finiteValues(table, data::targetColumn(target, f));
      std::vector<std::string> row{std::string(frameLongLabel(f)), std::to_string(values.size())};
      if (!values.empty()) {
        const auto s = event::summarize(values, f);
        for (double v : {s.mean, s.standardDeviation, s.percentile25, s.median, s.percentile75}) {
          row.push_back(fixed(v));
        }
      }
      row.resize(t.header.size());
      t.rows.push_back(std::move(row));
    }
    writeTable(dir / (targetName(target) + ".csv"), t, manifest);
  }

  {
    io::CsvTable t;
    t.header = {"timeFrame", "count", "mean", "median"};
    for (TimeFrame f : kAllFrames) {
      const auto values = finiteValues(table, data::targetColumn(data::Target::Performance, f));
      std::vector<std::string> row{std::string(frameLongLabel(f)), std::to_string(values.size())};
      if (!values.empty()) {
        const auto s = event::annualizedSummary(values, f);
        row.push_back(fixed(s.mean));
        row.push_back(fixed(s.median));
      }
      row.resize(t.header.size());
      t.rows.push_back(std::move(row));
    }
    writeTable(dir / "performance_annualized.csv", t, manifest);
  }

  {
    io::CsvTable t;
    t.header = {"target",   "timeFrame",  "bearCount", "bearMean",  "bearMedian",
                "bullCount", "bullMean", "bullMedian", "deltaMean", "deltaMedian"};
    const auto& vix = table.column("vix").numeric;
    for (data::Target target : {data::Target::Performance, data::Target::Overperformance}) {
      for (TimeFrame f : kAllFrames) {
        const auto& values = table.column(data::targetColumn(target, f)).numeric;
        std::vector<event::RegimeSample> samples;
        for (std::size_t r = 0; r < values.size(); ++r) {
          if (std::isfinite(values[r]) && std::isfinite(vix[r])) samples.push_back({vix[r], values[r]});
        }
        const auto split = event::regimeSplit(samples, f, options.vixThreshold);
        std::vector<std::string> row{targetName(target), std::string(frameLabel(f))};
        for (const auto* side : {&split.bear, &split.bull}) {
          row.push_back(std::to_string(*side ? (*side)->count : 0));
          row.push_back(*side ? fixed((*side)->mean) : "");
          row.push_back(*side ? fixed((*side)->median) : "");
        }
        row.push_back(fixed(split.deltaMean));
        row.push_back(fixed(split.deltaMedian));
        t.rows.push_back(std::move(row));
      }
    }
    writeTable(dir / "regime.csv", t, manifest);
  }

  const auto& caps = table.column("marketCap").numeric;
  std::map<event::MarketCapClass, std::vector<std::size_t>> byClass;
  for (std::size_t r = 0; r < caps.size(); ++r) {
    if (std::isfinite(caps[r]) && caps[r] >= 0.0) byClass[event::classifyMarketCap(caps[r] * 1e6)].push_back(r);
  }
  {
    io::CsvTable t;
    t.header = {"target", "capClass", "timeFrame", "count", "mean", "median"};
    for (data::Target target : {data::Target::Performance, data::Target::Overperformance}) {
      for (event::MarketCapClass c : event::kAllCapClasses) {
        for (TimeFrame f : kAllFrames) {
          const std::vector<std::size_t> empty;
          const auto it = byClass.find(c);
          const auto values = finiteValues(table, data::targetColumn(target, f), it == byClass.end() ? &empty : &it->second);
          std::vector<std::string> row{targetName(target), std::string(event::capClassLabel(c)),
                                       std::string(frameLabel(f)), std::to_string(values.size())};
          if (!values.empty()) {
            row.push_back(fixed(stats::mean(values)));
            row.push_back(fixed(stats::median(values)));
          }
          row.resize(t.header.size());
          t.rows.push_back(std::move(row));
        }
      }
    }
    writeTable(dir / "cap_class.csv", t, manifest);
  }

  // Plot series.
  {
    io::CsvTable t;
    t.header = {"x", "y"};
    std::map<std::string, std::size_t> perYear;
    for (const auto& d : table.column("announcementDate").text) ++perYear[d.substr(0, 4)];
    for (const auto& [year, n] : perYear) t.rows.push_back({year, std::to_string(n)});
    writeTable(dir / "plots" / "announcements_per_year.csv", t, manifest);
  }
  {
    io::CsvTable t;
    t.header = {"x", "y"};
    for (event::MarketCapClass c : event::kAllCapClasses) {
      const auto it = byClass.find(c);
      t.rows.push_back({std::string(event::capClassLabel(c)), std::to_string(it == byClass.end() ? 0 : it->second.size())});
    }
    writeTable(dir / "plots" / "cap_class_counts.csv", t, manifest);
  }
  {
    io::CsvTable t;
    t.header = {"series", "x", "y"};
    for (data::Target target : {data::Target::Performance, data::Target::Overperformance}) {
      for (TimeFrame f : kAllFrames) {
        const auto values = finiteValues(table, data::targetColumn(target, f));
        t.rows.push_back({targetName(target), std::string(frameLabel(f)),
                          values.empty() ? "" : fixed(stats::mean(values))});
      }
    }
    writeTable(dir / "plots" / "mean_by_frame.csv", t, manifest);
  }
  manifest.details() = {{"rows", table.rowCount()}, {"vixThreshold", options.vixThreshold}};
  manifest.write();
  note("stats: wrote " + dir.string());
}

// ---------------------------------------------------------------- train

namespace {

std::vector<data::TaskSpec> resolveTasks(const std::vector<std::string>& names) {
  if (names.empty() || (names.size() == 1 && names[0] == "all")) return data::allTasks();
  std::vector<data::TaskSpec> out;
  for (const auto& n : names) {
    const auto t = data::TaskSpec::parse(n);
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
  }
  return out;
}

}  // namespace

void runTrain(const Context& ctx, const TrainOptions& options) {
  const Paths paths{ctx.work};
  Manifest manifest(ctx, "train-" + std::string(automl::modeName(options.mode)));
  const auto tasks = resolveTasks(options.tasks);
  automl::ModeConfig config = automl::modeConfig(options.mode, ctx.budgetMode);
  if (options.trials) {
    if (*options.trials < 1) throw ConfigError("--trials must be >= 1");
    config.search.trials = *options.trials;
  }
  if (options.seconds) {
    if (!(*options.seconds > 0.0)) throw ConfigError("--seconds must be positive");
    config.search.seconds = *options.seconds;
  }
  const data::FeatureTable table = loadDataset(paths, manifest);
  const data::Split split = splitOf(table);
  const auto& ids = table.column("announcementId").text;
  const fs::path modeDir = paths.train(options.mode);

  for (const auto& task : tasks) {
    const std::size_t taskIndex = static_cast<std::size_t>(
        std::find(data::allTasks().begin(), data::allTasks().end(), task) - data::allTasks().begin());
    const data::TaskData td = data::buildTaskData(table, task, split);
    automl::TrainingSet train{td.trainX, td.trainY, task.kind, {}};
    const auto& names = td.standardizer.featureNames();
    for (std::size_t j = 0; j < names.size(); ++j) {
      const bool categorical =
          std::any_of(td.standardizer.categorical().begin(), td.standardizer.categorical().end(),
                      [&](const data::CategoryCoding& c) { return c.name == names[j]; });
      if (!categorical) train.numericColumns.push_back(j);
    }
    automl::EvaluationSet test{td.testX, td.testY, 0.0};
    if (td.labelTransform) test.zeroLevel = -td.labelTransform->mean / td.labelTransform->scale;

    note("train " + std::string(automl::modeName(options.mode)) + " " + task.name() + ": " +
         std::to_string(td.trainY.size()) + " train rows");
    const automl::RunResult result = automl::runMode(train, config, deriveSeed(ctx.seed, taskIndex), &test);

    const fs::path dir = modeDir / task.name();
    io::CsvTable board;
    board.header = {"name", "learner", "loss", "accuracy", "evalLoss", "runTimeSeconds"};
    for (const auto& row : result.leaderboard) {
      board.rows.push_back({row.name, row.learner, row.loss ? io::formatNumber(*row.loss) : "",
                            row.accuracy ? io::formatNumber(*row.accuracy) : "", io::formatNumber(row.evalLoss),
                            io::formatFixed(row.runTimeSeconds, 3)});
    }
    writeTable(dir / "leaderboard.csv", board, manifest);

    learn::saveModel(dir / "model.json", *result.finalModel);
    manifest.output(dir / "model.json");
    nlohmann::json prep{{"task", task.name()}, {"standardizer", td.standardizer.toJson()}};
    if (td.labelTransform) prep["labelTransform"] = {{"mean", td.labelTransform->mean}, {"scale", td.labelTransform->scale}};
    io::writeText(dir / "preprocessing.json", prep.dump(2) + "\n");
    manifest.output(dir / "preprocessing.json");

    const Matrix p = result.finalModel->predict(td.testX);
    io::CsvTable preds;
    preds.header = {"announcementId", "prediction", "score"};
    const auto labels = learn::pointPredictions(p, task.kind);
    const auto scores = learn::scoreColumn(p, task.kind);
    for (std::size_t i = 0; i < td.testRows.size(); ++i) {
      const double raw = td.labelTransform ? td.labelTransform->inverse(scores[i]) : labels[i];
      preds.rows.push_back({ids[td.testRows[i]], io::formatNumber(raw), io::formatNumber(scores[i])});
    }
    writeTable(dir / "predictions.csv", preds, manifest);

    const auto& final = result.leaderboard.back();
    const auto best = std::min_element(result.leaderboard.begin(), result.leaderboard.end(),
                                       [](const auto& a, const auto& b) { return a.evalLoss < b.evalLoss; });
    const auto baseline = std::find_if(result.leaderboard.begin(), result.leaderboard.end(),
                                       [](const auto& r) { return r.learner == "baseline"; });
    nlohmann::json summary{{"task", task.name()},
                           {"bestModel", best->name},
                           {"loss", final.loss ? nlohmann::json(*final.loss) : nlohmann::json()},
                           {"accuracy", final.accuracy ? nlohmann::json(*final.accuracy) : nlohmann::json()},
                           {"evalLoss", final.evalLoss},
                           {"baselineLoss", baseline != result.leaderboard.end() && baseline->loss
                                                ? nlohmann::json(*baseline->loss)
                                                : nlohmann::json()},
                           {"trainRows", td.trainY.size()},
                           {"trimmed", td.trimmed},
                           {"members", nlohmann::json::array()},
                           {"log", result.log}};
    for (const auto& m : result.members) {
      summary["members"].push_back({{"name", m.name}, {"weight", m.weight}, {"stacked", m.stacked}});
    }
    io::writeText(dir / "result.json", summary.dump(2) + "\n");
    manifest.output(dir / "result.json");
  }

  // Summary over every task trained so far in this mode.
  io::CsvTable t;
  t.header = {"task", "bestModel", "loss", "accuracy", "evalLoss", "baselineLoss"};
  for (const auto& task : data::allTasks()) {
    const fs::path file = modeDir / task.name() / "result.json";
    if (!fs::exists(file)) continue;
    const auto j = nlohmann::json::parse(io::readText(file));
    auto num = [&](const char* key) { return j.at(key).is_null() ? std::string() : fixed(j.at(key).get<double>()); };
    t.rows.push_back({task.name(), j.at("bestModel").get<std::string>(), num("loss"), num("accuracy"),
                      num("evalLoss"), num("baselineLoss")});
  }
  writeTable(modeDir / "summary.csv", t, manifest);
  std::vector<std::string> taskNames;
  for (const auto& task : tasks) taskNames.push_back(task.name());
  manifest.details() = {{"mode", automl::modeName(options.mode)},
                        {"tasks", taskNames},
                        {"trials", config.search.trials},
                        {"seconds", config.search.seconds}};
  manifest.write();
}

// ---------------------------------------------------------------- backtest

void runBacktest(const Context& ctx, const BacktestOptions& options) {
  const Paths paths{ctx.work};
  Manifest manifest(ctx, "backtest");
  const std::set<std::string> approaches{"naive", "gate", "combos", "all"};
  if (!approaches.contains(options.approach)) {
    throw ConfigError("unknown approach '" + options.approach + "' (expected naive, gate, combos or all)");
  }
  const bool all = options.approach == "all";
  const data::FeatureTable table = loadDataset(paths, manifest);
  const data::Split split = splitOf(table);
  const auto& ids = table.column("announcementId").text;

  std::vector<backtest::TestRow> rows;
  std::map<std::string, std::size_t> rowOf;
  for (std::size_t r : split.test) {
    backtest::TestRow row;
    row.id = ids[r];
    for (TimeFrame f : kAllFrames) {
      const double stock = table.column(data::targetColumn(data::Target::Performance, f)).numeric[r];
      const double bench = table.column(data::benchmarkColumn(f)).numeric[r];
      if (std::isfinite(stock) && std::isfinite(bench)) {
        row.stockReturn[frameIndex(f)] = stock;
        row.benchmarkReturn[frameIndex(f)] = bench;
      }
    }
    rowOf.emplace(row.id, rows.size());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("backtest: the dataset has no test rows");
  const fs::path dir = paths.backtest();
  std::size_t files = 0;

  if (all || options.approach == "naive") {
    io::CsvTable t;
    t.header = backtest::reportHeader();
    for (TimeFrame f : kAllFrames) {
      std::optional<backtest::BacktestStats> s;
      try {
        s = backtest::runNaive(rows, f);
      } catch (const DataError& e) {
        warn(e.what());
      }
      t.rows.push_back(backtest::reportRow(f, "", s));
    }
    writeTable(dir / "naive.csv", t, manifest);
    ++files;
  }
  if (!all && options.approach == "naive") {
    manifest.write();
    return;
  }

  // Gate signals from the four models of each frame.
  std::vector<std::array<backtest::GateOutputs, 6>> outputs(rows.size());
  std::size_t found = 0;
  const fs::path modeDir = paths.train(options.mode);
  for (const auto& task : data::allTasks()) {
    const fs::path file = modeDir / task.name() / "predictions.csv";
    if (!fs::exists(file)) {
      warn("backtest: no predictions for " + task.name() + "; its frame never signals");
      continue;
    }
    ++found;
    manifest.input(file);
    const io::CsvTable preds = io::readCsv(file);
    const std::size_t idCol = preds.columnIndex("announcementId");
    const std::size_t predCol = preds.columnIndex("prediction");
    for (const auto& p : preds.rows) {
      const auto it = rowOf.find(p[idCol]);
      if (it == rowOf.end()) throw DataError(file.string() + ": unknown announcement " + p[idCol]);
      const double v = io::parseNumber(p[predCol]);
      if (!std::isfinite(v)) continue;
      auto& o = outputs[it->second][frameIndex(task.frame)];
      const bool perf = task.target == data::Target::Performance;
      if (task.kind == TaskKind::Classification) (perf ? o.classPerf : o.classOver) = static_cast<int>(v);
      else (perf ? o.regPerf : o.regOver) = v;
    }
  }
  if (found == 0) throw MissingArtifact(modeDir / data::allTasks().front().name() / "predictions.csv");
  backtest::GateSignals signals(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (TimeFrame f : kAllFrames) signals[r][frameIndex(f)] = backtest::gateSignal(outputs[r][frameIndex(f)]);
  }

  if (all || options.approach == "gate") {
    io::CsvTable t;
    t.header = backtest::reportHeader();
    for (TimeFrame f : kAllFrames) {
      const backtest::StrategyCombo combo{static_cast<std::uint8_t>(1U << frameIndex(f)), f};
      t.rows.push_back(backtest::reportRow(f, combo.build(), backtest::runCombo(rows, signals, combo)));
    }
    writeTable(dir / "gate.csv", t, manifest);
    ++files;
  }
  if (all || options.approach == "combos") {
    const auto enumeration = backtest::enumerateCombos();
    std::vector<backtest::ComboResult> results;
    io::CsvTable t;
    t.header = backtest::reportHeader();
    for (const auto& combo : enumeration.combos) {
      results.push_back({combo, backtest::runCombo(rows, signals, combo)});
      t.rows.push_back(backtest::reportRow(combo.target, combo.build(), results.back().stats));
    }
    writeTable(dir / "combos.csv", t, manifest);
    for (auto [criterion, name] : {std::pair{backtest::Criterion::Sharpe, "best_sharpe.csv"},
                                   std::pair{backtest::Criterion::ValueAtRisk, "best_var.csv"}}) {
      io::CsvTable best;
      best.header = backtest::reportHeader();
      for (const auto& b : backtest::optimizeStrategies(results, criterion)) {
        best.rows.push_back(b.best ? backtest::reportRow(b.target, b.best->combo.build(), b.best->stats)
                                   : backtest::reportRow(b.target, "", std::nullopt));
      }
      writeTable(dir / name, best, manifest);
    }
    manifest.details()["rawCombos"] = enumeration.rawCount;
    manifest.details()["uniqueCombos"] = enumeration.combos.size();
    files += 3;
  }
  manifest.details()["mode"] = automl::modeName(options.mode);
  manifest.details()["testRows"] = rows.size();
  manifest.details()["approach"] = options.approach;
  manifest.write();
  note("backtest: wrote " + std::to_string(files) + " reports to " + dir.string());
}

// ---------------------------------------------------------------- report

void runReport(const Context& ctx) {
  const Paths paths{ctx.work};
  Manifest manifest(ctx, "report");
  const data::FeatureTable table = loadDataset(paths, manifest);
  const data::Split split = splitOf(table);
  std::ostringstream md;
  md << "# Share buyback pipeline report\n\n";

  md << "## Announcement classification\n\n";
  if (fs::exists(paths.classifyMetrics())) {
    manifest.input(paths.classifyMetrics());
    const auto m = nlohmann::json::parse(io::readText(paths.classifyMetrics()));
    md << "Classifier: " << m.at("classifier").get<std::string>() << "\n\n";
    md << "| items | TP | FP | TN | FN | accuracy |\n| --- | --- | --- | --- | --- | --- |\n";
    md << "| " << m.at("total").get<std::size_t>() << " | " << m.at("truePositives").get<std::size_t>() << " | "
       << m.at("falsePositives").get<std::size_t>() << " | " << m.at("trueNegatives").get<std::size_t>() << " | "
       << m.at("falseNegatives").get<std::size_t>() << " | " << fixed(m.at("accuracy").get<double>()) << " |\n\n";
  } else {
    md << "No labeled classification run found.\n\n";
  }

  md << "## Dataset\n\n";
  md << "Rows: " << table.rowCount() << " (train " << split.train.size() << ", test " << split.test.size()
     << ")\n\n";

  auto section = [&](const std::string& title, const fs::path& file) {
    md << "### " << title << "\n\n";
    if (!fs::exists(file)) {
      md << "Not available.\n\n";
      return;
    }
    manifest.input(file);
    md << markdownTable(io::readCsv(file)) << "\n";
  };
  md << "## Event study\n\n";
  section("Performance after announcement", paths.stats() / "performance.csv");
  section("Overperformance after announcement", paths.stats() / "overperformance.csv");
  section("Performance annualized", paths.stats() / "performance_annualized.csv");
  section("Bear and bull regimes", paths.stats() / "regime.csv");

  md << "## Training\n\n";
  bool anyMode = false;
  for (automl::Mode mode : {automl::Mode::Explain, automl::Mode::Perform, automl::Mode::Tuned}) {
    const fs::path file = paths.train(mode) / "summary.csv";
    if (!fs::exists(file)) continue;
    anyMode = true;
    section("Mode " + std::string(automl::modeName(mode)), file);
  }
  if (!anyMode) md << "No training results found.\n\n";

  md << "## Backtesting\n\n";
  section("Naive approach", paths.backtest() / "naive.csv");
  section("Four-model gate", paths.backtest() / "gate.csv");
  section("Best combination by Sharpe ratio", paths.backtest() / "best_sharpe.csv");
  section("Best combination by value at risk", paths.backtest() / "best_var.csv");
  if (fs::exists(paths.backtest() / "combos.csv")) {
    md << "All " << io::readCsv(paths.backtest() / "combos.csv").rows.size()
       << " evaluated combinations are listed in backtest/combos.csv.\n";
  }

  io::writeText(paths.report(), md.str());
  manifest.output(paths.report());
  manifest.write();
  note("report: wrote " + paths.report().string());
}

}  // namespace buyback::cli
