#include "buyback/forest.hpp"

#include <cmath>

namespace buyback::learn {

Forest::Forest(TaskKind kind, std::vector<DecisionTree> trees, ForestMode mode)
    : kind_(kind), trees_(std::move(trees)), mode_(mode) {
  if (trees_.empty()) throw DataError("forest without trees");
}

Matrix Forest::predictUnchecked(const Matrix& x) const {
  Matrix out(x.rows(), outputCount());
  const double n = static_cast<double>(trees_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto dst = out.row(r);
    for (const auto& tree : trees_) {
      const auto& v = tree.predictRow(x.row(r));
      for (std::size_t k = 0; k < v.size(); ++k) dst[k] += v[k];
    }
    for (double& v : dst) v /= n;
  }
  return out;
}

nlohmann::json Forest::toJson() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& t : trees_) trees.push_back(t.toJson());
  return {{"type", typeName()}, {"kind", taskKindName(kind_)}, {"trees", std::move(trees)}};
}

Forest Forest::fromJson(const nlohmann::json& j) {
  std::vector<DecisionTree> trees;
  for (const auto& t : j.at("trees")) trees.push_back(DecisionTree::fromJson(t));
  const ForestMode mode = j.at("type").get<std::string>() == "extraTrees" ? ForestMode::Extra : ForestMode::Random;
  return Forest(parseTaskKind(j.at("kind").get<std::string>()), std::move(trees), mode);
}

Forest fitForest(const Matrix& x, const std::vector<double>& y, TaskKind kind, const ForestParams& params,
                 const FitControl& control) {
  if (params.nTrees < 1) throw ConfigError("forest needs at least one tree");
  if (x.rows() == 0 || x.cols() == 0) throw DataError("fitForest: empty design matrix");
  const std::size_t p = x.cols();
  std::size_t subset = params.featureSubset;
  bool clamped = false;
  if (subset == 0) {
    subset = kind == TaskKind::Classification ? static_cast<std::size_t>(std::sqrt(static_cast<double>(p)))
                                              : p / 3;
    subset = std::max<std::size_t>(subset, 1);
  } else if (subset > p) {
    warn("forest feature subset " + std::to_string(subset) + " exceeds " + std::to_string(p) + " features; clamped");
    subset = p;
    clamped = true;
  }
  const std::size_t classes = kind == TaskKind::Classification ? classCountOf(y) : 0;

  TreeParams tp;
  tp.maxDepth = params.maxDepth;
  tp.minLeaf = params.minLeaf;
  tp.impurity = params.impurity;
  tp.splitMode = params.mode == ForestMode::Extra ? SplitMode::Random : SplitMode::Best;
  tp.featureSubset = subset;

  std::vector<DecisionTree> trees;
  trees.reserve(params.nTrees);
  for (std::size_t t = 0; t < params.nTrees; ++t) {
    if (!trees.empty() && control.expired()) break;
    const std::uint64_t treeSeed = deriveSeed(params.seed, t);
    tp.seed = deriveSeed(treeSeed, 1);
    std::vector<std::size_t> rows;
    if (params.bootstrap) {
      Rng rng(deriveSeed(treeSeed, 0));
      rows.resize(x.rows());
      for (auto& r : rows) r = rng.below(x.rows());
    } else {
      rows = iota(x.rows());
    }
    trees.push_back(fitTree(x, y, rows, kind, tp, classes));
  }
  Forest forest(kind, std::move(trees), params.mode);
  forest.subsetClamped = clamped;
  return forest;
}

}  // namespace buyback::learn
