#include <cstdio>
#include <exception>
#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "buyback/common.hpp"
#include "buyback/pipeline.hpp"

namespace {

using namespace buyback;

int fail(int code, const std::string& message) {
  std::cerr << "buyback: " << message << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Share buyback announcement pipeline"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cli::kToolVersion));
  app.set_config("--config", "", "TOML file with option values; command-line flags win");

  cli::Context ctx;
  std::string work = "work";
  std::string budgetMode = "trials";
  bool quiet = false;
  app.add_option("--seed", ctx.seed, "Root seed")->capture_default_str();
  app.add_option("--work", work, "Work directory holding every stage's artifacts")->capture_default_str();
  app.add_option("--budget-mode", budgetMode, "Search budget: trial count or wall clock")
      ->check(CLI::IsMember({"trials", "wallclock"}))
      ->capture_default_str();
  app.add_flag("--quiet", quiet, "Suppress progress notes");

  // synth
  synth::GeneratorConfig gen;
  auto* synthCmd = app.add_subcommand("synth", "Generate a seeded synthetic market, news stream and labeled corpus");
  synthCmd->add_option("--companies", gen.nCompanies)->capture_default_str();
  synthCmd->add_option("--announcements", gen.nAnnouncements)->capture_default_str();
  synthCmd->add_option("--planted-effect", gen.plantedEffect, "Post-announcement drift at 1M on flagged rows")
      ->capture_default_str();
  synthCmd->add_option("--duplicate-rate", gen.duplicateRate)->capture_default_str();
  synthCmd->add_option("--noise-per-announcement", gen.noisePerAnnouncement)->capture_default_str();

  // classify
  cli::ClassifyOptions classify;
  std::string classifyInput;
  std::string transformerPredictions;
  std::string rules;
  auto* classifyCmd = app.add_subcommand("classify", "Flag buyback announcements and deduplicate them");
  classifyCmd->add_option("--input", classifyInput, "News JSONL (default: <work>/raw/news.jsonl)");
  classifyCmd->add_option("--rules", rules, "Rule file (default: bundled rules)");
  classifyCmd->add_option("--classifier", classify.classifier)
      ->check(CLI::IsMember({"regex", "transformer"}))
      ->capture_default_str();
  classifyCmd->add_option("--transformer-cmd", classify.transformerCommand,
                          "Command run as `<cmd> <in.jsonl> <out.jsonl>`");
  classifyCmd->add_option("--transformer-predictions", transformerPredictions,
                          "Precomputed {id, probBuyback, isBuyback} JSONL");
  classifyCmd->add_option("--dedup-days", classify.dedupDays)->capture_default_str();

  // dataset
  cli::DatasetOptions dataset;
  auto* datasetCmd = app.add_subcommand("dataset", "Join announcements with fundamentals and returns");
  datasetCmd->add_option("--train-fraction", dataset.trainFraction)->capture_default_str();
  datasetCmd->add_option("--split-seed", dataset.splitSeed)->capture_default_str();

  // stats
  cli::StatsOptions statsOptions;
  auto* statsCmd = app.add_subcommand("stats", "Event-study statistics and plot series");
  statsCmd->add_option("--vix-threshold", statsOptions.vixThreshold)->capture_default_str();

  // train
  const std::map<std::string, automl::Mode> modes{
      {"explain", automl::Mode::Explain}, {"perform", automl::Mode::Perform}, {"tuned", automl::Mode::Tuned}};
  cli::TrainOptions train;
  std::size_t trials = 0;
  double seconds = 0.0;
  auto* trainCmd = app.add_subcommand("train", "Run the automated training modes over the 24 tasks");
  trainCmd->add_option("--mode", train.mode)->transform(CLI::CheckedTransformer(modes))->default_str("explain");
  trainCmd->add_option("--task", train.tasks, "Task name such as class-perf-1M, or all (repeatable)");
  auto* trialsOpt = trainCmd->add_option("--trials", trials, "Trials per learner in tuned mode");
  auto* secondsOpt = trainCmd->add_option("--seconds", seconds, "Seconds per learner in wallclock budget mode");

  // backtest
  cli::BacktestOptions backtestOptions;
  auto* backtestCmd = app.add_subcommand("backtest", "Evaluate the naive, gate and combination strategies");
  backtestCmd->add_option("--mode", backtestOptions.mode, "Training mode whose predictions drive the gates")
      ->transform(CLI::CheckedTransformer(modes))
      ->default_str("explain");
  backtestCmd->add_option("--approach", backtestOptions.approach)
      ->check(CLI::IsMember({"naive", "gate", "combos", "all"}))
      ->capture_default_str();

  auto* reportCmd = app.add_subcommand("report", "Render a markdown summary of every stage");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitConfig;
  }

  setQuiet(quiet);
  ctx.work = work;
  ctx.budgetMode = budgetMode == "wallclock" ? automl::Budget::Mode::Wallclock : automl::Budget::Mode::Trials;
  ctx.resolvedConfig = app.config_to_str(true, false);
  if (!classifyInput.empty()) classify.input = classifyInput;
  if (!transformerPredictions.empty()) classify.transformerPredictions = transformerPredictions;
  classify.rules = rules;
  if (trialsOpt->count() > 0) train.trials = trials;
  if (secondsOpt->count() > 0) train.seconds = seconds;

  try {
    if (*synthCmd) cli::runSynth(ctx, gen);
    else if (*classifyCmd) cli::runClassify(ctx, classify);
    else if (*datasetCmd) cli::runDataset(ctx, dataset);
    else if (*statsCmd) cli::runStats(ctx, statsOptions);
    else if (*trainCmd) cli::runTrain(ctx, train);
    else if (*backtestCmd) cli::runBacktest(ctx, backtestOptions);
    else if (*reportCmd) cli::runReport(ctx);
  } catch (const ConfigError& e) {
    return fail(cli::kExitConfig, e.what());
  } catch (const cli::MissingArtifact& e) {
    return fail(cli::kExitMissing, e.what());
  } catch (const DataError& e) {
    return fail(cli::kExitData, e.what());
  } catch (const DomainError& e) {
    return fail(cli::kExitData, e.what());
  } catch (const std::exception& e) {
    return fail(1, e.what());
  }
  return cli::kExitOk;
}
