#include "buyback/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "buyback/io.hpp"

namespace buyback::automl {

const Dimension* SearchSpace::find(const std::string& name) const {
  for (const auto& d : dimensions) {
    if (d.name == name) return &d;
  }
  return nullptr;
}

SearchSpace searchSpaceFor(LearnerKind kind, TaskKind task) {
  const Categorical criterion{{0.0, 1.0}};
  const IntRange rounds{20, 300, 20};
  const RealRange shrinkage{0.01, 0.3, true, 2.0};
  const RealRange subsample{0.5, 1.0, false, 0.1};
  switch (kind) {
    case LearnerKind::Baseline:
      return {};
    case LearnerKind::Linear:
      if (task == TaskKind::Regression) return {};
      return {{{"epochs", IntRange{100, 2000, 100}},
               {"learningRate", RealRange{0.01, 2.0, true, 2.0}},
               {"l2", RealRange{0.0, 0.1, false, 0.01}}}};
    case LearnerKind::DecisionTree:
      return {{{"maxDepth", IntRange{1, 12, 1}}, {"minLeaf", IntRange{1, 50, 1}}, {"entropy", criterion}}};
    case LearnerKind::RandomForest:
    case LearnerKind::ExtraTrees:
      return {{{"nTrees", rounds},
               {"maxDepth", IntRange{2, 20, 1}},
               {"minLeaf", IntRange{1, 30, 1}},
               {"featureFraction", RealRange{0.1, 1.0, false, 0.1}},
               {"entropy", criterion}}};
    case LearnerKind::GbtLevelWise:
      return {{{"nRounds", rounds},
               {"maxDepth", IntRange{2, 8, 1}},
               {"minLeaf", IntRange{1, 50, 1}},
               {"shrinkage", shrinkage},
               {"subsample", subsample}}};
    case LearnerKind::GbtLeafWise:
      return {{{"nRounds", rounds},
               {"maxDepth", IntRange{2, 12, 1}},
               {"maxLeaves", IntRange{3, 63, 4}},
               {"minLeaf", IntRange{1, 50, 1}},
               {"shrinkage", shrinkage},
               {"subsample", subsample}}};
    case LearnerKind::GbtSymmetric:
      return {{{"nRounds", rounds},
               {"maxDepth", IntRange{2, 8, 1}},
               {"minLeaf", IntRange{1, 50, 1}},
               {"shrinkage", shrinkage},
               {"subsample", subsample}}};
    case LearnerKind::NeuralNet:
      return {{{"hidden1", IntRange{8, 128, 8}},
               {"hidden2", IntRange{0, 64, 8}},
               {"epochs", IntRange{20, 200, 20}},
               {"learningRate", RealRange{0.001, 0.1, true, 2.0}},
               {"batchSize", Categorical{{16, 32, 64, 128}}}}};
  }
  return {};
}

bool inDomain(const Domain& domain, double value) {
  if (!std::isfinite(value)) return false;
  if (const auto* r = std::get_if<IntRange>(&domain)) {
    if (value != std::floor(value) || value < static_cast<double>(r->lo) || value > static_cast<double>(r->hi)) {
      return false;
    }
    return (static_cast<long>(value) - r->lo) % r->step == 0;
  }
  if (const auto* r = std::get_if<RealRange>(&domain)) return value >= r->lo && value <= r->hi;
  const auto& values = std::get<Categorical>(domain).values;
  return std::find(values.begin(), values.end(), value) != values.end();
}

bool contains(const SearchSpace& space, const HyperParams& point) {
  for (const auto& d : space.dimensions) {
    auto it = point.find(d.name);
    if (it == point.end() || !inDomain(d.domain, it->second)) return false;
  }
  return true;
}

HyperParams samplePoint(const SearchSpace& space, Rng& rng) {
  HyperParams point;
  for (const auto& d : space.dimensions) {
    if (const auto* r = std::get_if<IntRange>(&d.domain)) {
      const auto slots = static_cast<std::size_t>((r->hi - r->lo) / r->step) + 1;
      point[d.name] = static_cast<double>(r->lo + r->step * static_cast<long>(rng.below(slots)));
    } else if (const auto* r = std::get_if<RealRange>(&d.domain)) {
      if (r->log) {
        point[d.name] = std::clamp(std::exp(rng.uniform(std::log(r->lo), std::log(r->hi))), r->lo, r->hi);
      } else {
        point[d.name] = rng.uniform(r->lo, r->hi);
      }
    } else {
      const auto& values = std::get<Categorical>(d.domain).values;
      point[d.name] = values[rng.below(values.size())];
    }
  }
  return point;
}

namespace {

std::string pointKey(const HyperParams& p) {
  std::string key;
  for (const auto& [name, value] : p) key += name + "=" + io::formatNumber(value) + ";";
  return key;
}

struct Bounds {
  double lo;
  double hi;
};

std::pair<double, double> neighbours(const Domain& domain, double value, const Bounds& b) {
  if (const auto* r = std::get_if<IntRange>(&domain)) {
    const auto step = static_cast<double>(r->step);
    return {std::max(b.lo, value - step), std::min(b.hi, value + step)};
  }
  const auto& r = std::get<RealRange>(domain);
  if (r.log) return {std::max(b.lo, value / r.step), std::min(b.hi, value * r.step)};
  return {std::max(b.lo, value - r.step), std::min(b.hi, value + r.step)};
}

}  // namespace

HillClimbResult hillClimb(const SearchSpace& space, const HyperParams& start, const std::vector<std::string>& order,
                          const EvalFn& eval, int sweeps) {
  if (sweeps < 1) throw ConfigError("hill climbing needs at least one sweep");
  if (!contains(space, start)) throw ConfigError("hill climbing start point lies outside the search space");
  HillClimbResult result;
  std::map<std::string, double> cache;
  auto evaluate = [&](const HyperParams& p) {
    const std::string key = pointKey(p);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const double loss = eval(p);
    cache.emplace(key, loss);
    result.evaluated.push_back(p);
    return loss;
  };

  std::map<std::string, Bounds> bounds;
  for (const auto& d : space.dimensions) {
    if (const auto* r = std::get_if<IntRange>(&d.domain)) {
      bounds[d.name] = {static_cast<double>(r->lo), static_cast<double>(r->hi)};
    } else if (const auto* r = std::get_if<RealRange>(&d.domain)) {
      bounds[d.name] = {r->lo, r->hi};
    }
  }

  HyperParams current = start;
  double currentLoss = evaluate(current);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (const auto& name : order) {
      const Dimension* dim = space.find(name);
      if (!dim) throw ConfigError("hill climbing parameter '" + name + "' is not in the search space");
      if (std::holds_alternative<Categorical>(dim->domain)) {
        if (sweep == 0) result.notices.push_back("skipped non-ordinal parameter " + name);
        continue;
      }
      Bounds& b = bounds[name];
      const double value = current.at(name);
      const auto [down, up] = neighbours(dim->domain, value, b);
      double bestLoss = currentLoss;
      double bestValue = value;
      for (double candidate : {down, up}) {
        if (candidate == value) continue;
        HyperParams p = current;
        p[name] = candidate;
        const double loss = evaluate(p);
        if (loss < bestLoss) {
          bestLoss = loss;
          bestValue = candidate;
        }
      }
      if (bestValue > value) b.lo = bestValue;
      if (bestValue < value) b.hi = bestValue;
      current[name] = bestValue;
      currentLoss = bestLoss;
    }
  }
  result.best = current;
  result.bestLoss = currentLoss;
  return result;
}

SearchResult budgetedSearch(const SearchSpace& space, const HyperParams& defaults, std::size_t folds,
                            const FoldEvalFn& eval, const Budget& budget, std::uint64_t seed,
                            std::size_t startupTrials) {
  if (folds < 1) throw ConfigError("budgeted search needs at least one fold");
  if (budget.mode == Budget::Mode::Trials && budget.trials < 1) throw ConfigError("trial budget must be positive");
  if (budget.mode == Budget::Mode::Wallclock && !(budget.seconds > 0.0)) {
    throw ConfigError("wall-clock budget must be positive");
  }
  const auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(); };
  auto outOfBudget = [&](std::size_t trialsSoFar) {
    if (budget.mode == Budget::Mode::Trials) return trialsSoFar >= budget.trials;
    return elapsed() >= budget.seconds;
  };

  SearchResult result;
  Rng rng(seed);
  for (std::size_t t = 0; !outOfBudget(t); ++t) {
    Trial trial;
    trial.index = t;
    trial.point = t == 0 ? defaults : samplePoint(space, rng);
    if (t > 0) {
      for (const auto& [name, value] : defaults) {
        if (!space.find(name)) trial.point.emplace(name, value);
      }
    }
    bool abandoned = false;
    for (std::size_t f = 0; f < folds; ++f) {
      if (budget.mode == Budget::Mode::Wallclock && elapsed() >= budget.seconds) {
        abandoned = true;
        break;
      }
      const double loss = eval(trial.point, f);
      trial.foldLosses.push_back(loss);
      std::vector<double> prior;
      for (const Trial& c : result.trials) {
        if (c.completed) prior.push_back(c.foldLosses[f]);
      }
      if (prior.size() >= startupTrials && !prior.empty() && loss > stats::median(prior)) {
        trial.pruned = true;
        break;
      }
    }
    if (!abandoned && !trial.pruned) {
      trial.completed = true;
      trial.loss = stats::mean(trial.foldLosses);
    }
    result.trials.push_back(std::move(trial));
  }
  for (std::size_t i = 0; i < result.trials.size(); ++i) {
    const Trial& t = result.trials[i];
    if (t.completed && (!result.best || t.loss < result.trials[*result.best].loss)) result.best = i;
  }
  if (!result.best) {
    result.defaultFallback = true;
    warn("budgeted search completed no trial; using default hyperparameters");
  }
  return result;
}

}  // namespace buyback::automl
