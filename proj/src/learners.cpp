#include "buyback/learners.hpp"

#include <cmath>

#include "buyback/boosting.hpp"
#include "buyback/forest.hpp"
#include "buyback/linear.hpp"
#include "buyback/neural_net.hpp"
#include "buyback/tree.hpp"

namespace buyback::learn {

namespace {

struct NamedKind {
  LearnerKind kind;
  std::string_view name;
};

constexpr std::array<NamedKind, 9> kNames{{{LearnerKind::Baseline, "baseline"},
                                           {LearnerKind::Linear, "linear"},
                                           {LearnerKind::DecisionTree, "tree"},
                                           {LearnerKind::RandomForest, "randomForest"},
                                           {LearnerKind::ExtraTrees, "extraTrees"},
                                           {LearnerKind::GbtLevelWise, "gbtLevelWise"},
                                           {LearnerKind::GbtLeafWise, "gbtLeafWise"},
                                           {LearnerKind::GbtSymmetric, "gbtSymmetric"},
                                           {LearnerKind::NeuralNet, "neuralNet"}}};

HyperParams merged(LearnerKind kind, TaskKind task, const HyperParams& overrides) {
  HyperParams p = defaultParams(kind, task);
  for (const auto& [name, value] : overrides) {
    if (!p.contains(name)) {
      throw ConfigError("unknown hyperparameter '" + name + "' for " + std::string(learnerName(kind)));
    }
    if (!std::isfinite(value)) throw ConfigError("hyperparameter '" + name + "' is not finite");
    p[name] = value;
  }
  return p;
}

std::size_t asCount(const HyperParams& p, const std::string& name) {
  const double v = p.at(name);
  if (v < 0.0) throw ConfigError("hyperparameter '" + name + "' must be non-negative");
  return static_cast<std::size_t>(std::llround(v));
}

std::size_t featureCount(double fraction, std::size_t features) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("featureFraction must lie in (0, 1]");
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(features))));
}

BoostParams boostParams(LearnerKind kind, const HyperParams& p, TaskKind task, std::uint64_t seed) {
  BoostParams b = kind == LearnerKind::GbtLeafWise ? leafWisePreset()
                  : kind == LearnerKind::GbtSymmetric ? symmetricPreset()
                                                      : levelWisePreset();
  b.nRounds = asCount(p, "nRounds");
  b.maxDepth = static_cast<int>(asCount(p, "maxDepth"));
  b.minLeaf = asCount(p, "minLeaf");
  b.shrinkage = p.at("shrinkage");
  b.subsample = p.at("subsample");
  if (kind == LearnerKind::GbtLeafWise) b.maxLeaves = asCount(p, "maxLeaves");
  b.loss = task == TaskKind::Classification ? BoostLoss::LogLoss : BoostLoss::SquaredError;
  b.seed = seed;
  return b;
}

}  // namespace

std::string_view learnerName(LearnerKind kind) {
  for (const auto& n : kNames) {
    if (n.kind == kind) return n.name;
  }
  return "unknown";
}

LearnerKind parseLearner(std::string_view name) {
  for (const auto& n : kNames) {
    if (n.name == name) return n.kind;
  }
  throw ConfigError("unknown learner '" + std::string(name) + "'");
}

HyperParams defaultParams(LearnerKind kind, TaskKind task) {
  switch (kind) {
    case LearnerKind::Baseline:
      return {};
    case LearnerKind::Linear:
      if (task == TaskKind::Regression) return {};
      return {{"epochs", 500}, {"learningRate", 0.5}, {"l2", 0.0}};
    case LearnerKind::DecisionTree:
      return {{"maxDepth", 3}, {"minLeaf", 10}, {"entropy", 0}};
    case LearnerKind::RandomForest:
      return {{"nTrees", 100}, {"maxDepth", 4}, {"minLeaf", 15}, {"featureFraction", 0.3}, {"entropy", 0}};
    case LearnerKind::ExtraTrees:
      return {{"nTrees", 100}, {"maxDepth", 4}, {"minLeaf", 15}, {"featureFraction", 1.0}, {"entropy", 0}};
    case LearnerKind::GbtLevelWise:
      return {{"nRounds", 60}, {"maxDepth", 3}, {"minLeaf", 20}, {"shrinkage", 0.05}, {"subsample", 0.8}};
    case LearnerKind::GbtLeafWise:
      return {{"nRounds", 60},   {"maxDepth", 10},    {"maxLeaves", 15},
              {"minLeaf", 20},   {"shrinkage", 0.05}, {"subsample", 0.8}};
    case LearnerKind::GbtSymmetric:
      return {{"nRounds", 60}, {"maxDepth", 4}, {"minLeaf", 20}, {"shrinkage", 0.05}, {"subsample", 0.8}};
    case LearnerKind::NeuralNet:
      return {{"hidden1", 32}, {"hidden2", 16}, {"epochs", 20}, {"learningRate", 0.01}, {"batchSize", 32}};
  }
  return {};
}

ModelPtr fitLearner(LearnerKind kind, const Matrix& x, const std::vector<double>& y, TaskKind task,
                    const HyperParams& params, std::uint64_t seed, const FitControl& control) {
  const HyperParams p = merged(kind, task, params);
  switch (kind) {
    case LearnerKind::Baseline:
      return std::make_shared<BaselineModel>(fitBaseline(x, y, task));
    case LearnerKind::Linear:
      if (task == TaskKind::Regression) return std::make_shared<LinearModel>(fitLeastSquares(x, y));
      return std::make_shared<LinearModel>(
          fitLogistic(x, y, {asCount(p, "epochs"), p.at("learningRate"), p.at("l2")}));
    case LearnerKind::DecisionTree: {
      TreeParams tp;
      tp.maxDepth = static_cast<int>(asCount(p, "maxDepth"));
      tp.minLeaf = asCount(p, "minLeaf");
      tp.impurity = p.at("entropy") != 0.0 ? Impurity::Entropy : Impurity::Gini;
      tp.seed = seed;
      return std::make_shared<DecisionTree>(laplaceSmoothed(fitTree(x, y, task, tp)));
    }
    case LearnerKind::RandomForest:
    case LearnerKind::ExtraTrees: {
      ForestParams fp;
      fp.mode = kind == LearnerKind::ExtraTrees ? ForestMode::Extra : ForestMode::Random;
      fp.bootstrap = kind == LearnerKind::RandomForest;
      fp.nTrees = asCount(p, "nTrees");
      fp.maxDepth = static_cast<int>(asCount(p, "maxDepth"));
      fp.minLeaf = asCount(p, "minLeaf");
      fp.featureSubset = featureCount(p.at("featureFraction"), x.cols());
      fp.impurity = p.at("entropy") != 0.0 ? Impurity::Entropy : Impurity::Gini;
      fp.seed = seed;
      return std::make_shared<Forest>(fitForest(x, y, task, fp, control));
    }
    case LearnerKind::GbtLevelWise:
    case LearnerKind::GbtLeafWise:
    case LearnerKind::GbtSymmetric:
      return std::make_shared<BoostedModel>(fitBoosted(x, y, task, boostParams(kind, p, task, seed), control));
    case LearnerKind::NeuralNet: {
      NetParams np;
      np.hiddenSizes = {asCount(p, "hidden1")};
      if (asCount(p, "hidden2") > 0) np.hiddenSizes.push_back(asCount(p, "hidden2"));
      np.epochs = asCount(p, "epochs");
      np.learningRate = p.at("learningRate");
      np.batchSize = asCount(p, "batchSize");
      np.seed = seed;
      return std::make_shared<NeuralNet>(fitNeuralNet(x, y, task, np, control));
    }
  }
  throw ConfigError("unhandled learner kind");
}

}  // namespace buyback::learn
