#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "buyback/ensembling.hpp"
#include "buyback/feature_engineering.hpp"
#include "buyback/learners.hpp"
#include "buyback/search_space.hpp"

namespace buyback::automl {

enum class Mode { Explain, Perform, Tuned };

std::string_view modeName(Mode mode);
Mode parseMode(std::string_view name);

struct ModeConfig {
  Mode mode = Mode::Explain;
  /// 0 selects the holdout scheme.
  std::size_t folds = 0;
  double holdoutFraction = 0.25;
  std::vector<LearnerKind> roster;
  std::size_t randomDraws = 0;
  int hillClimbSweeps = 0;
  std::size_t hillClimbTopPerType = 0;
  std::size_t stackBestN = 0;
  bool featureVariants = false;
  /// Per-learner search budget (tuned mode).
  Budget search;
  /// Wall-clock cap per fit; ignored in trial-count mode.
  double perModelSeconds = 360.0;
  Budget::Mode budgetMode = Budget::Mode::Trials;
};

/// Explain: 75/25 holdout, six default learners. Perform: 5-fold CV, random
/// draws, feature variants, hill climbing. Tuned: 10-fold CV, budgeted
/// search, feature variants, stacking of the best 15.
ModeConfig modeConfig(Mode mode, Budget::Mode budgetMode = Budget::Mode::Trials);

struct TrainingSet {
  Matrix x;
  std::vector<double> y;
  TaskKind kind = TaskKind::Classification;
  /// Columns eligible for golden features (empty: all).
  std::vector<std::size_t> numericColumns;
};

/// Rows with a NaN label are skipped when scoring.
struct EvaluationSet {
  Matrix x;
  std::vector<double> y;
  /// Label value that maps to a raw return of zero (regression accuracy).
  double zeroLevel = 0.0;
};

struct LeaderboardRow {
  std::string name;
  std::string learner;
  double evalLoss = 0.0;
  std::optional<double> loss;      // on the evaluation set
  std::optional<double> accuracy;  // on the evaluation set
  double runTimeSeconds = 0.0;
};

struct MemberSummary {
  std::string name;
  int weight = 1;
  bool stacked = false;
};

struct RunResult {
  std::vector<LeaderboardRow> leaderboard;
  learn::ModelPtr finalModel;
  std::vector<MemberSummary> members;
  double finalEvalLoss = 0.0;
  std::vector<std::string> log;
};

/// Trains every roster learner per the mode, ranks them on the mode's
/// validation rows and combines them by ensemble selection. `test`, when
/// given, is only used to score the leaderboard after all fitting.
RunResult runMode(const TrainingSet& train, const ModeConfig& config, std::uint64_t seed,
                  const EvaluationSet* test = nullptr);

}  // namespace buyback::automl
