#pragma once

#include <cstdint>
#include <vector>

#include "buyback/tree.hpp"

namespace buyback::learn {

enum class ForestMode { Random, Extra };

struct ForestParams {
  std::size_t nTrees = 100;
  /// Features per split; 0 means sqrt(features) for classification and
  /// features / 3 for regression. Values above the feature count are clamped.
  std::size_t featureSubset = 0;
  bool bootstrap = true;
  ForestMode mode = ForestMode::Random;
  int maxDepth = -1;
  std::size_t minLeaf = 1;
  Impurity impurity = Impurity::Gini;
  std::uint64_t seed = 0;
};

/// Averages per-tree outputs (class probabilities for classification).
class Forest final : public Model {
 public:
  Forest(TaskKind kind, std::vector<DecisionTree> trees, ForestMode mode);

  std::string typeName() const override { return mode_ == ForestMode::Random ? "randomForest" : "extraTrees"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return trees_.front().inputCount(); }
  std::size_t outputCount() const override { return trees_.front().outputCount(); }
  nlohmann::json toJson() const override;
  static Forest fromJson(const nlohmann::json& j);

  const std::vector<DecisionTree>& trees() const { return trees_; }
  /// Set when featureSubset exceeded the feature count and was clamped.
  bool subsetClamped = false;

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  std::vector<DecisionTree> trees_;
  ForestMode mode_;
};

/// Tree t is seeded from deriveSeed(seed, t), so the fit is a pure function of
/// the inputs. Stops adding trees once `control` expires (at least one tree).
Forest fitForest(const Matrix& x, const std::vector<double>& y, TaskKind kind, const ForestParams& params,
                 const FitControl& control = {});

}  // namespace buyback::learn
