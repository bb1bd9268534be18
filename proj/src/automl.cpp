#include "buyback/automl.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "buyback/io.hpp"

namespace buyback::automl {

using ensemble::Candidate;
using ensemble::EnsembleModel;
using learn::ModelPtr;

std::string_view modeName(Mode mode) {
  switch (mode) {
    case Mode::Explain: return "explain";
    case Mode::Perform: return "perform";
    case Mode::Tuned: return "tuned";
  }
  return "explain";
}

Mode parseMode(std::string_view name) {
  if (name == "explain") return Mode::Explain;
  if (name == "perform") return Mode::Perform;
  if (name == "tuned") return Mode::Tuned;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected explain, perform or tuned)");
}

ModeConfig modeConfig(Mode mode, Budget::Mode budgetMode) {
  ModeConfig c;
  c.mode = mode;
  c.budgetMode = budgetMode;
  c.search.mode = budgetMode;
  switch (mode) {
    case Mode::Explain:
      c.roster = {LearnerKind::Baseline,     LearnerKind::Linear,       LearnerKind::DecisionTree,
                  LearnerKind::RandomForest, LearnerKind::GbtLevelWise, LearnerKind::NeuralNet};
      break;
    case Mode::Perform:
      c.folds = 5;
      c.roster = {LearnerKind::Linear,      LearnerKind::RandomForest, LearnerKind::GbtLevelWise,
                  LearnerKind::GbtLeafWise, LearnerKind::GbtSymmetric, LearnerKind::NeuralNet};
      c.randomDraws = 5;
      c.hillClimbSweeps = 2;
      c.hillClimbTopPerType = 2;
      c.featureVariants = true;
      break;
    case Mode::Tuned:
      c.folds = 10;
      c.roster = {LearnerKind::RandomForest, LearnerKind::ExtraTrees,   LearnerKind::GbtLevelWise,
                  LearnerKind::GbtLeafWise,  LearnerKind::GbtSymmetric, LearnerKind::NeuralNet};
      c.featureVariants = true;
      c.stackBestN = 15;
      c.search.trials = 8;
      c.search.seconds = 800.0;
      break;
  }
  return c;
}

namespace {

struct Variant {
  std::string label;  // empty: raw features
  std::vector<GoldenRecipe> recipes;
  std::vector<std::size_t> columns;
};

struct Spec {
  LearnerKind kind = LearnerKind::Baseline;
  HyperParams params;
  std::size_t variant = 0;  // index into Runner::variants_
};

struct Entry {
  std::string name;
  Spec spec;
  ModelPtr model;
  Matrix selectionPredictions;
  double evalLoss = 0.0;
  double seconds = 0.0;
  bool stacked = false;
};

class Runner {
 public:
  Runner(const TrainingSet& train, const ModeConfig& config, std::uint64_t seed)
      : train_(train), config_(config), seed_(seed) {
    if (train_.x.rows() != train_.y.size()) throw DataError("runMode: feature and label rows differ");
    if (train_.x.rows() < 8) throw DataError("runMode: need at least 8 training rows");
    variants_.push_back({});
    if (config_.folds > 0) {
      folds_ = ensemble::kFoldAssignment(train_.x.rows(), config_.folds, deriveSeed(seed_, 1));
      selectionLabels_ = train_.y;
    } else {
      std::vector<std::size_t> order = iota(train_.x.rows());
      Rng rng(deriveSeed(seed_, 1));
      rng.shuffle(order);
      const auto holdout = static_cast<std::size_t>(
          std::floor(config_.holdoutFraction * static_cast<double>(train_.x.rows())));
      holdoutRows_.assign(order.end() - static_cast<std::ptrdiff_t>(holdout), order.end());
      fitRows_.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(holdout));
      std::sort(holdoutRows_.begin(), holdoutRows_.end());
      std::sort(fitRows_.begin(), fitRows_.end());
      for (std::size_t r : holdoutRows_) selectionLabels_.push_back(train_.y[r]);
    }
  }

  RunResult run(const EvaluationSet* test) {
    switch (config_.mode) {
      case Mode::Explain: runExplain(); break;
      case Mode::Perform: runPerform(); break;
      case Mode::Tuned: runTuned(); break;
    }
    if (entries_.empty()) throw DataError("runMode: every learner failed");
    return finish(test);
  }

 private:
  ensemble::Metric metric() const { return ensemble::metricFor(train_.kind); }

  learn::FitControl control() const {
    learn::FitControl c;
    if (config_.budgetMode == Budget::Mode::Wallclock) {
      c.deadline = std::chrono::steady_clock::now() +
                   std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                       std::chrono::duration<double>(config_.perModelSeconds));
    }
    return c;
  }

  ModelPtr fitSpec(const Spec& spec, const Matrix& x, const std::vector<double>& y, std::uint64_t seed) const {
    const Variant& v = variants_[spec.variant];
    if (v.label.empty()) return learn::fitLearner(spec.kind, x, y, train_.kind, spec.params, seed, control());
    Matrix transformed = v.recipes.empty() ? x : applyGoldenRecipes(x, v.recipes);
    if (!v.columns.empty()) transformed = transformed.selectColumns(v.columns);
    ModelPtr inner = learn::fitLearner(spec.kind, transformed, y, train_.kind, spec.params, seed, control());
    return std::make_shared<FeaturePipelineModel>(v.recipes, v.columns, x.cols(), std::move(inner));
  }

  struct Evaluation {
    ModelPtr model;
    Matrix predictions;
  };

  // Holdout: fit on the fit rows, predict the holdout rows. CV: per-fold fits
  // produce out-of-fold predictions; the model is their equal-weight average.
  Evaluation evaluate(const Spec& spec, std::uint64_t seed) const {
    if (folds_.empty()) {
      std::vector<double> y;
      for (std::size_t r : fitRows_) y.push_back(train_.y[r]);
      ModelPtr model = fitSpec(spec, train_.x.selectRows(fitRows_), y, seed);
      return {model, model->predict(train_.x.selectRows(holdoutRows_))};
    }
    std::vector<EnsembleModel::Member> members;
    Matrix oof;
    for (std::size_t f = 0; f < config_.folds; ++f) {
      auto [fitRows, predictRows] = foldRows(f);
      std::vector<double> y;
      for (std::size_t r : fitRows) y.push_back(train_.y[r]);
      ModelPtr model = fitSpec(spec, train_.x.selectRows(fitRows), y, deriveSeed(seed, f));
      const Matrix p = model->predict(train_.x.selectRows(predictRows));
      if (oof.empty()) oof = Matrix(train_.x.rows(), p.cols());
      for (std::size_t i = 0; i < predictRows.size(); ++i) {
        for (std::size_t c = 0; c < p.cols(); ++c) oof(predictRows[i], c) = p(i, c);
      }
      members.push_back({"fold" + std::to_string(f + 1), model, 1, false});
    }
    return {std::make_shared<EnsembleModel>(train_.kind, std::move(members)), oof};
  }

  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> foldRows(std::size_t f) const {
    std::vector<std::size_t> fit;
    std::vector<std::size_t> held;
    for (std::size_t r = 0; r < folds_.size(); ++r) (folds_[r] == f ? held : fit).push_back(r);
    return {fit, held};
  }

  std::string specKey(const Spec& spec) const {
    std::string key = std::string(learn::learnerName(spec.kind)) + "|" + std::to_string(spec.variant);
    for (const auto& [k, v] : spec.params) key += "|" + k + "=" + io::formatNumber(v);
    return key;
  }

  // Fits and records a spec once; returns its entry index or nullopt on failure.
  std::optional<std::size_t> add(const std::string& name, const Spec& spec) {
    const std::string key = specKey(spec);
    if (auto it = byKey_.find(key); it != byKey_.end()) return it->second;
    const std::uint64_t seed = deriveSeed(seed_, 100 + counter_++);
    const auto started = std::chrono::steady_clock::now();
    try {
      Evaluation e = evaluate(spec, seed);
      Entry entry;
      entry.name = name;
      entry.spec = spec;
      entry.model = std::move(e.model);
      entry.selectionPredictions = std::move(e.predictions);
      entry.evalLoss = ensemble::metricValue(metric(), entry.selectionPredictions, selectionLabels_);
      entry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      entries_.push_back(std::move(entry));
      byKey_.emplace(key, entries_.size() - 1);
      return entries_.size() - 1;
    } catch (const std::exception& ex) {
      log_.push_back(name + " failed: " + ex.what());
      warn(name + " failed: " + ex.what());
      return std::nullopt;
    }
  }

  std::string variantSuffix(std::size_t variant) const {
    return variants_[variant].label.empty() ? "" : "+" + variants_[variant].label;
  }

  void runExplain() {
    for (LearnerKind kind : config_.roster) {
      add(std::string(learn::learnerName(kind)), {kind, {}, 0});
    }
  }

  std::optional<std::size_t> bestOfKind(LearnerKind kind) const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].spec.kind != kind || entries_[i].stacked) continue;
      if (!best || entries_[i].evalLoss < entries_[*best].evalLoss) best = i;
    }
    return best;
  }

  // Golden and selection variants of the best entry per learner kind.
  void addFeatureVariants(bool separately) {
    for (LearnerKind kind : config_.roster) {
      const auto best = bestOfKind(kind);
      if (!best) continue;
      const Spec base = entries_[*best].spec;
      const std::string baseName = entries_[*best].name;
      const std::uint64_t seed = deriveSeed(seed_, 50 + static_cast<std::uint64_t>(kind));
      try {
        const GoldenResult golden =
            goldenFeatures(train_.x, train_.y, train_.kind, seed, kDefaultGoldenKeep, train_.numericColumns);
        auto factory = [&](const Matrix& x, const std::vector<double>& y, std::uint64_t s) {
          return learn::fitLearner(kind, x, y, train_.kind, base.params, s, control());
        };
        if (separately) {
          variants_.push_back({"golden", golden.kept, {}});
          add(baseName + "+golden", {kind, base.params, variants_.size() - 1});
          const FeatureSelection sel = selectFeatures(train_.x, train_.y, train_.kind, factory, deriveSeed(seed, 1));
          variants_.push_back({"selection", {}, sel.kept});
          add(baseName + "+selection", {kind, base.params, variants_.size() - 1});
        }
        const FeatureSelection both =
            selectFeatures(golden.augmented, train_.y, train_.kind, factory, deriveSeed(seed, 2));
        variants_.push_back({"golden+selection", golden.kept, both.kept});
        add(baseName + "+golden+selection", {kind, base.params, variants_.size() - 1});
      } catch (const std::exception& ex) {
        log_.push_back(std::string(learn::learnerName(kind)) + " feature variants failed: " + ex.what());
      }
    }
  }

  void runPerform() {
    for (LearnerKind kind : config_.roster) {
      const SearchSpace space = searchSpaceFor(kind, train_.kind);
      const HyperParams defaults = learn::defaultParams(kind, train_.kind);
      Rng rng(deriveSeed(seed_, 10 + static_cast<std::uint64_t>(kind)));
      const std::string base(learn::learnerName(kind));
      add(base, {kind, defaults, 0});
      for (std::size_t d = 0; d < config_.randomDraws; ++d) {
        HyperParams point = defaults;
        for (const auto& [name, value] : samplePoint(space, rng)) point[name] = value;
        add(base + "#" + std::to_string(d + 1), {kind, point, 0});
      }
    }
    if (config_.featureVariants) addFeatureVariants(true);
    for (LearnerKind kind : config_.roster) {
      std::vector<std::size_t> ofKind;
      for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].spec.kind == kind) ofKind.push_back(i);
      }
      std::stable_sort(ofKind.begin(), ofKind.end(),
                       [&](std::size_t a, std::size_t b) { return entries_[a].evalLoss < entries_[b].evalLoss; });
      ofKind.resize(std::min(ofKind.size(), config_.hillClimbTopPerType));
      const SearchSpace space = searchSpaceFor(kind, train_.kind);
      if (space.dimensions.empty()) continue;
      std::vector<std::string> order;
      for (const auto& d : space.dimensions) order.push_back(d.name);
      for (std::size_t start : ofKind) {
        const Spec seedSpec = entries_[start].spec;
        const std::string startName = entries_[start].name;
        std::size_t step = 0;
        const EvalFn eval = [&](const HyperParams& p) {
          const auto idx = add(startName + "~" + std::to_string(++step), {kind, p, seedSpec.variant});
          return idx ? entries_[*idx].evalLoss : std::numeric_limits<double>::infinity();
        };
        try {
          const HillClimbResult climb = hillClimb(space, seedSpec.params, order, eval, config_.hillClimbSweeps);
          for (const auto& n : climb.notices) log_.push_back(startName + ": " + n);
        } catch (const std::exception& ex) {
          log_.push_back(startName + " hill climbing failed: " + ex.what());
        }
      }
    }
  }

  void runTuned() {
    for (LearnerKind kind : config_.roster) {
      const SearchSpace space = searchSpaceFor(kind, train_.kind);
      const HyperParams defaults = learn::defaultParams(kind, train_.kind);
      const std::string base(learn::learnerName(kind));
      const std::uint64_t kindSeed = deriveSeed(seed_, 20 + static_cast<std::uint64_t>(kind));
      std::map<std::string, std::vector<std::pair<ModelPtr, Matrix>>> foldCache;
      const FoldEvalFn eval = [&](const HyperParams& p, std::size_t f) {
        const Spec spec{kind, p, 0};
        auto [fitRows, predictRows] = foldRows(f);
        std::vector<double> y;
        for (std::size_t r : fitRows) y.push_back(train_.y[r]);
        std::vector<double> heldY;
        for (std::size_t r : predictRows) heldY.push_back(train_.y[r]);
        ModelPtr model = fitSpec(spec, train_.x.selectRows(fitRows), y, deriveSeed(kindSeed, f));
        Matrix pred = model->predict(train_.x.selectRows(predictRows));
        const double loss = ensemble::metricValue(metric(), pred, heldY);
        foldCache[specKey(spec)].emplace_back(std::move(model), std::move(pred));
        return loss;
      };
      Budget budget = config_.search;
      budget.mode = config_.budgetMode;
      SearchResult search;
      try {
        search = budgetedSearch(space, defaults, config_.folds, eval, budget, kindSeed);
      } catch (const std::exception& ex) {
        log_.push_back(base + " search failed: " + ex.what());
        continue;
      }
      for (const Trial& t : search.trials) {
        if (t.pruned) log_.push_back(base + " trial " + std::to_string(t.index) + " pruned");
      }
      if (search.defaultFallback) {
        add(base, {kind, defaults, 0});
        continue;
      }
      for (const Trial& t : search.trials) {
        if (!t.completed) continue;
        const Spec spec{kind, t.point, 0};
        const auto& folds = foldCache.at(specKey(spec));
        std::vector<EnsembleModel::Member> members;
        Matrix oof(train_.x.rows(), folds.front().second.cols());
        for (std::size_t f = 0; f < folds.size(); ++f) {
          const auto predictRows = foldRows(f).second;
          for (std::size_t i = 0; i < predictRows.size(); ++i) {
            for (std::size_t c = 0; c < oof.cols(); ++c) oof(predictRows[i], c) = folds[f].second(i, c);
          }
          members.push_back({"fold" + std::to_string(f + 1), folds[f].first, 1, false});
        }
        Entry entry;
        entry.name = base + "#" + std::to_string(t.index);
        entry.spec = spec;
        entry.model = std::make_shared<EnsembleModel>(train_.kind, std::move(members));
        entry.selectionPredictions = std::move(oof);
        entry.evalLoss = t.loss;
        byKey_.emplace(specKey(spec), entries_.size());
        entries_.push_back(std::move(entry));
      }
    }
    if (config_.featureVariants) addFeatureVariants(false);
  }

  // Level 0: the entry's out-of-fold predictions, refit on all rows for
  // inference. Level 1: the same learner over [features | level-0 column],
  // cross-validated on the run's folds.
  Candidate stackEntry(std::size_t index) {
    const Entry& e = entries_[index];
    const auto started = std::chrono::steady_clock::now();
    const std::uint64_t seed = deriveSeed(seed_, 5000 + index);
    const Matrix appended = ensemble::appendedColumns(e.selectionPredictions, train_.kind);
    const Matrix level1X = train_.x.hconcat(appended);
    const Spec level1Spec{e.spec.kind, e.spec.params, 0};
    std::vector<EnsembleModel::Member> members;
    Matrix oof;
    for (std::size_t f = 0; f < config_.folds; ++f) {
      auto [fitRows, predictRows] = foldRows(f);
      std::vector<double> y;
      for (std::size_t r : fitRows) y.push_back(train_.y[r]);
      ModelPtr model = fitSpec(level1Spec, level1X.selectRows(fitRows), y, deriveSeed(seed, f));
      const Matrix p = model->predict(level1X.selectRows(predictRows));
      if (oof.empty()) oof = Matrix(train_.x.rows(), p.cols());
      for (std::size_t i = 0; i < predictRows.size(); ++i) {
        for (std::size_t c = 0; c < p.cols(); ++c) oof(predictRows[i], c) = p(i, c);
      }
      members.push_back({"fold" + std::to_string(f + 1), model, 1, false});
    }
    ModelPtr level0 = fitSpec(e.spec, train_.x, train_.y, deriveSeed(seed, config_.folds));
    auto level1 = std::make_shared<EnsembleModel>(train_.kind, std::move(members));
    Candidate c;
    c.id = e.name + "+stacked";
    c.model = std::make_shared<ensemble::StackedModel>(train_.kind, std::move(level0), std::move(level1));
    c.selectionPredictions = std::move(oof);
    c.stacked = true;
    Entry stackedEntry;
    stackedEntry.name = c.id;
    stackedEntry.spec = e.spec;
    stackedEntry.model = c.model;
    stackedEntry.selectionPredictions = c.selectionPredictions;
    stackedEntry.evalLoss = ensemble::metricValue(metric(), c.selectionPredictions, selectionLabels_);
    stackedEntry.stacked = true;
    stackedEntry.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    pendingStacked_.push_back(std::move(stackedEntry));
    return c;
  }

  RunResult finish(const EvaluationSet* test) {
    std::vector<Candidate> pool;
    for (const auto& e : entries_) pool.push_back({e.name, e.model, e.selectionPredictions, e.stacked});
    const auto started = std::chrono::steady_clock::now();
    ensemble::Selection selection;
    if (config_.stackBestN > 0 && config_.folds > 0) {
      const std::size_t bestN = std::min(config_.stackBestN, pool.size());
      selection = ensemble::ensembleStack(
          pool, bestN, [&](std::size_t i) { return stackEntry(i); }, selectionLabels_, metric());
      for (auto& e : pendingStacked_) entries_.push_back(std::move(e));
    } else {
      selection = ensemble::ensembleSelect(pool, selectionLabels_, metric());
    }
    const double ensembleSeconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    RunResult result;
    result.finalModel = selection.model;
    result.finalEvalLoss = selection.metric;
    for (std::size_t i = 0; i < selection.members.size(); ++i) {
      const Candidate& c = pool[selection.members[i]];
      result.members.push_back({c.id, selection.weights[i], c.stacked});
    }

    std::vector<std::size_t> scored;
    if (test) {
      if (test->x.rows() != test->y.size()) throw DataError("runMode: evaluation rows differ");
      for (std::size_t r = 0; r < test->y.size(); ++r) {
        if (std::isfinite(test->y[r])) scored.push_back(r);
      }
    }
    const Matrix testX = test ? test->x.selectRows(scored) : Matrix();
    std::vector<double> testY;
    for (std::size_t r : scored) testY.push_back(test->y[r]);
    auto score = [&](const learn::Model& model, LeaderboardRow& row) {
      if (testY.empty()) return;
      const Matrix p = model.predict(testX);
      row.loss = learn::taskLoss(p, testY, train_.kind);
      row.accuracy = learn::taskAccuracy(p, testY, train_.kind, test->zeroLevel);
    };
    for (const auto& e : entries_) {
      LeaderboardRow row{e.name, std::string(learn::learnerName(e.spec.kind)), e.evalLoss, {}, {}, e.seconds};
      score(*e.model, row);
      result.leaderboard.push_back(std::move(row));
    }
    LeaderboardRow ensembleRow{"ensemble", "ensemble", selection.metric, {}, {}, ensembleSeconds};
    score(*selection.model, ensembleRow);
    result.leaderboard.push_back(std::move(ensembleRow));
    result.log = std::move(log_);
    return result;
  }

  const TrainingSet& train_;
  const ModeConfig& config_;
  std::uint64_t seed_;
  std::vector<std::size_t> folds_;
  std::vector<std::size_t> fitRows_;
  std::vector<std::size_t> holdoutRows_;
  std::vector<double> selectionLabels_;
  std::vector<Variant> variants_;
  std::vector<Entry> entries_;
  std::vector<Entry> pendingStacked_;
  std::map<std::string, std::size_t> byKey_;
  std::uint64_t counter_ = 0;
  std::vector<std::string> log_;
};

}  // namespace

RunResult runMode(const TrainingSet& train, const ModeConfig& config, std::uint64_t seed, const EvaluationSet* test) {
  if (config.roster.empty()) throw ConfigError("mode roster is empty");
  if (config.mode != Mode::Explain && config.folds < 2) throw ConfigError("cross-validated modes need >= 2 folds");
  if (config.mode == Mode::Explain && config.folds != 0) throw ConfigError("explain mode uses a holdout, not folds");
  Runner runner(train, config, seed);
  return runner.run(test);
}

}  // namespace buyback::automl
