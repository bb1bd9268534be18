#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "buyback/automl.hpp"
#include "buyback/synth.hpp"
#include "json.hpp"

namespace buyback::cli {

/// A required output of an earlier stage is absent (exit code 3).
class MissingArtifact : public std::runtime_error {
 public:
  explicit MissingArtifact(const std::filesystem::path& path)
      : std::runtime_error("missing artifact: " + path.string()), path_(path) {}
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitMissing = 3;
inline constexpr int kExitData = 4;
inline constexpr std::string_view kToolVersion = "1.0.0";

/// Settings shared by every command.
struct Context {
  std::filesystem::path work = "work";
  std::uint64_t seed = 42;
  automl::Budget::Mode budgetMode = automl::Budget::Mode::Trials;
  /// Resolved option text; its hash identifies the configuration.
  std::string resolvedConfig;
};

/// Layout of the work directory.
struct Paths {
  std::filesystem::path root;

  std::filesystem::path raw() const { return root / "raw"; }
  std::filesystem::path news() const { return raw() / "news.jsonl"; }
  std::filesystem::path corpus() const { return raw() / "corpus.jsonl"; }
  std::filesystem::path fundamentals() const { return raw() / "fundamentals.csv"; }
  std::filesystem::path benchmark() const { return raw() / "benchmark.csv"; }
  std::filesystem::path vix() const { return raw() / "vix.csv"; }
  std::filesystem::path prices() const { return raw() / "prices"; }
  std::filesystem::path classified() const { return root / "classify" / "classified.jsonl"; }
  std::filesystem::path announcements() const { return root / "classify" / "announcements.jsonl"; }
  std::filesystem::path classifyMetrics() const { return root / "classify" / "metrics.json"; }
  std::filesystem::path dataset() const { return root / "dataset" / "dataset.csv"; }
  std::filesystem::path stats() const { return root / "stats"; }
  std::filesystem::path train(automl::Mode mode) const { return root / "train" / std::string(automl::modeName(mode)); }
  std::filesystem::path backtest() const { return root / "backtest"; }
  std::filesystem::path report() const { return root / "report.md"; }
  std::filesystem::path manifest(std::string_view command) const {
    return root / "manifests" / (std::string(command) + ".json");
  }
};

/// 64-bit FNV-1a of the text, as 16 hex digits.
std::string configHash(std::string_view text);

void runSynth(const Context& ctx, synth::GeneratorConfig config);

struct ClassifyOptions {
  std::optional<std::filesystem::path> input;  // default: work/raw/news.jsonl
  std::filesystem::path rules;                 // default rule file when empty
  std::string classifier = "regex";            // regex | transformer
  /// Invoked as `<command> <input.jsonl> <output.jsonl>`.
  std::string transformerCommand;
  std::optional<std::filesystem::path> transformerPredictions;
  int dedupDays = 30;
};

/// Confusion counts when every item carries a label, otherwise nullopt.
struct ClassifySummary {
  std::size_t items = 0;
  std::size_t positives = 0;
  std::size_t announcements = 0;
  std::optional<nlohmann::json> metrics;
};
ClassifySummary runClassify(const Context& ctx, const ClassifyOptions& options);

struct DatasetOptions {
  double trainFraction = 0.8;
  std::uint64_t splitSeed = 42;
};
void runDataset(const Context& ctx, const DatasetOptions& options);

struct StatsOptions {
  double vixThreshold = 25.0;
};
void runStats(const Context& ctx, const StatsOptions& options);

struct TrainOptions {
  automl::Mode mode = automl::Mode::Explain;
  std::vector<std::string> tasks;  // empty: all 24
  std::optional<std::size_t> trials;
  std::optional<double> seconds;
};
void runTrain(const Context& ctx, const TrainOptions& options);

struct BacktestOptions {
  automl::Mode mode = automl::Mode::Explain;
  std::string approach = "all";  // naive | gate | combos | all
};
void runBacktest(const Context& ctx, const BacktestOptions& options);

void runReport(const Context& ctx);

}  // namespace buyback::cli
