#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "buyback/model.hpp"

namespace buyback::learn {

enum class Impurity { Gini, Entropy };

/// 1 - sum p_k^2. Throws DomainError on a zero or negative total.
double gini(std::span<const double> classCounts);
/// -sum p_k ln p_k.
double entropy(std::span<const double> classCounts);

enum class SplitMode {
  Best,    // exhaustive midpoint thresholds
  Random,  // one uniform threshold per feature (extremely randomized trees)
};

struct TreeParams {
  int maxDepth = 8;
  std::size_t minLeaf = 1;
  Impurity impurity = Impurity::Gini;
  SplitMode splitMode = SplitMode::Best;
  /// Features considered per split; 0 means all.
  std::size_t featureSubset = 0;
  /// When > 0 the tree grows best-first until it has this many leaves.
  std::size_t maxLeaves = 0;
  /// One shared (feature, threshold) per depth level.
  bool oblivious = false;
  std::uint64_t seed = 0;
};

/// Flat node. Internal nodes route left iff x[feature] <= threshold.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  /// Regression: {mean}. Classification: class probabilities.
  std::vector<double> value;
  std::size_t count = 0;
  /// Training error of the region as a leaf: SSE, or misclassified count.
  double error = 0.0;

  bool isLeaf() const { return feature < 0; }
};

class DecisionTree final : public Model {
 public:
  DecisionTree(TaskKind kind, std::size_t inputs, std::size_t outputs, std::vector<TreeNode> nodes);

  std::string typeName() const override { return "tree"; }
  TaskKind kind() const override { return kind_; }
  std::size_t inputCount() const override { return inputs_; }
  std::size_t outputCount() const override { return outputs_; }
  nlohmann::json toJson() const override;
  static DecisionTree fromJson(const nlohmann::json& j);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t leafCount() const;
  int depth() const;
  /// Index of the leaf reached by `row`.
  std::size_t leafIndex(std::span<const double> row) const;
  const std::vector<double>& predictRow(std::span<const double> row) const { return nodes_[leafIndex(row)].value; }
  /// Sum of leaf errors divided by the root sample count.
  double trainingRisk() const;

  /// Copy with leaf values replaced; `values[i]` is used for node i when it is a leaf.
  DecisionTree withLeafValues(const std::vector<std::vector<double>>& values, std::size_t outputs) const;

  friend bool operator==(const DecisionTree&, const DecisionTree&);

 protected:
  Matrix predictUnchecked(const Matrix& x) const override;

 private:
  TaskKind kind_;
  std::size_t inputs_;
  std::size_t outputs_;
  std::vector<TreeNode> nodes_;
};

bool operator==(const TreeNode& a, const TreeNode& b);

/// CART fit. Classification labels are 0-based class indices; `classCount`
/// of 0 infers it from the labels. Throws DataError on NaN cells.
DecisionTree fitTree(const Matrix& x, const std::vector<double>& y, TaskKind kind, const TreeParams& params,
                     std::size_t classCount = 0);
/// Fit on a row multiset (bootstrap rows may repeat).
DecisionTree fitTree(const Matrix& x, const std::vector<double>& y, std::span<const std::size_t> rows, TaskKind kind,
                     const TreeParams& params, std::size_t classCount = 0);

/// Classification leaves become (count_k + 1) / (n + K); other trees are returned unchanged.
DecisionTree laplaceSmoothed(const DecisionTree& tree);

/// R(T) + alpha * leaves, R(T) as in trainingRisk.
double costComplexity(const DecisionTree& tree, double alpha);

/// Smallest subtree minimizing cost complexity. alpha = 0 returns the tree
/// unchanged; alpha = infinity returns the root as a leaf.
DecisionTree pruneCostComplexity(const DecisionTree& tree, double alpha);

/// Alphas at which the weakest-link sequence collapses a node, ascending.
std::vector<double> pruningPath(const DecisionTree& tree);

}  // namespace buyback::learn
