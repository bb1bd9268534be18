#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "buyback/learners.hpp"

namespace buyback::automl {

using learn::HyperParams;
using learn::LearnerKind;

struct IntRange {
  long lo = 0;
  long hi = 0;
  long step = 1;
};

/// Log ranges sample log-uniformly and hill-climb by multiplying with `step`;
/// linear ranges add `step`.
struct RealRange {
  double lo = 0.0;
  double hi = 1.0;
  bool log = false;
  double step = 0.1;
};

struct Categorical {
  std::vector<double> values;
};

using Domain = std::variant<IntRange, RealRange, Categorical>;

struct Dimension {
  std::string name;
  Domain domain;
};

struct SearchSpace {
  std::vector<Dimension> dimensions;

  const Dimension* find(const std::string& name) const;
};

/// Documented per-learner domains. Every default lies inside its domain.
SearchSpace searchSpaceFor(LearnerKind kind, TaskKind task);

bool inDomain(const Domain& domain, double value);
bool contains(const SearchSpace& space, const HyperParams& point);
/// One independent draw per dimension, in dimension order.
HyperParams samplePoint(const SearchSpace& space, Rng& rng);

using EvalFn = std::function<double(const HyperParams&)>;

struct HillClimbResult {
  HyperParams best;
  double bestLoss = 0.0;
  std::vector<HyperParams> evaluated;  // distinct points in evaluation order
  std::vector<std::string> notices;
};

/// Per parameter in `order`: evaluate the current value and one step down
/// and up (clamped to the remaining domain), adopt the best, then discard
/// the domain side the move left behind. Repeats `sweeps` times. Categorical
/// parameters are skipped with a notice.
HillClimbResult hillClimb(const SearchSpace& space, const HyperParams& start, const std::vector<std::string>& order,
                          const EvalFn& eval, int sweeps);

struct Budget {
  enum class Mode { Trials, Wallclock };
  Mode mode = Mode::Trials;
  std::size_t trials = 10;
  double seconds = 800.0;
};

struct Trial {
  std::size_t index = 0;
  HyperParams point;
  std::vector<double> foldLosses;
  bool completed = false;
  bool pruned = false;
  double loss = 0.0;  // mean fold loss when completed
};

struct SearchResult {
  std::optional<std::size_t> best;  // index into trials
  std::vector<Trial> trials;
  bool defaultFallback = false;
};

/// Loss of `point` on fold `fold`.
using FoldEvalFn = std::function<double(const HyperParams& point, std::size_t fold)>;

/// Trial 0 evaluates `defaults`; later trials draw seeded points. A trial is
/// pruned at fold j when its loss there exceeds the median fold-j loss of the
/// completed trials, once `startupTrials` trials have completed.
SearchResult budgetedSearch(const SearchSpace& space, const HyperParams& defaults, std::size_t folds,
                            const FoldEvalFn& eval, const Budget& budget, std::uint64_t seed,
                            std::size_t startupTrials = 2);

}  // namespace buyback::automl
