#include "buyback/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace buyback::learn {

double gini(std::span<const double> classCounts) {
  double total = 0.0;
  for (double c : classCounts) {
    if (c < 0.0) throw DomainError("gini: negative class count");
    total += c;
  }
  if (!(total > 0.0)) throw DomainError("gini: empty node");
  double sumSq = 0.0;
  for (double c : classCounts) sumSq += (c / total) * (c / total);
  return 1.0 - sumSq;
}

double entropy(std::span<const double> classCounts) {
  double total = 0.0;
  for (double c : classCounts) {
    if (c < 0.0) throw DomainError("entropy: negative class count");
    total += c;
  }
  if (!(total > 0.0)) throw DomainError("entropy: empty node");
  double h = 0.0;
  for (double c : classCounts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

namespace {

// Splits must beat the incumbent by this relative margin; earlier candidates
// (lower feature, lower threshold) win ties.
constexpr double kTieTolerance = 1e-12;

bool improves(double candidate, double incumbent) {
  if (std::isinf(incumbent)) return candidate < incumbent;
  return candidate < incumbent - kTieTolerance * std::abs(incumbent);
}

double midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();  // weighted child impurity
};

class Builder {
 public:
  Builder(const Matrix& x, const std::vector<double>& y, TaskKind kind, const TreeParams& params,
          std::size_t classCount)
      : x_(x), y_(y), kind_(kind), params_(params), classes_(classCount), rng_(params.seed) {}

  DecisionTree build(std::span<const std::size_t> rows) {
    std::vector<std::size_t> root(rows.begin(), rows.end());
    if (params_.oblivious) buildOblivious(std::move(root));
    else if (params_.maxLeaves > 0) buildBestFirst(std::move(root));
    else buildDepthFirst(std::move(root), 0);
    const std::size_t outputs = kind_ == TaskKind::Regression ? 1 : classes_;
    return DecisionTree(kind_, x_.cols(), outputs, std::move(nodes_));
  }

 private:
  bool depthAllows(int depth) const { return params_.maxDepth < 0 || depth < params_.maxDepth; }

  TreeNode makeLeaf(const std::vector<std::size_t>& rows) const {
    TreeNode node;
    node.count = rows.size();
    if (kind_ == TaskKind::Regression) {
      std::vector<double> values(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) values[i] = y_[rows[i]];
      const double mean = stats::mean(values);
      double sse = 0.0;
      for (double v : values) sse += (v - mean) * (v - mean);
      node.value = {mean};
      node.error = sse;
    } else {
      std::vector<double> counts(classes_, 0.0);
      for (std::size_t r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
      const double n = static_cast<double>(rows.size());
      node.value.resize(classes_);
      for (std::size_t k = 0; k < classes_; ++k) node.value[k] = counts[k] / n;
      node.error = n - *std::max_element(counts.begin(), counts.end());
    }
    return node;
  }

  // Weighted impurity of the node itself, on the scale split impurities use.
  double nodeImpurity(const std::vector<std::size_t>& rows) const {
    if (kind_ == TaskKind::Regression) return makeLeaf(rows).error;
    std::vector<double> counts(classes_, 0.0);
    for (std::size_t r : rows) counts[static_cast<std::size_t>(y_[r])] += 1.0;
    return static_cast<double>(rows.size()) * classImpurity(counts);
  }

  double classImpurity(std::span<const double> counts) const {
    return params_.impurity == Impurity::Gini ? gini(counts) : entropy(counts);
  }

  std::vector<std::size_t> candidateFeatures() {
    std::vector<std::size_t> features = iota(x_.cols());
    const std::size_t k = params_.featureSubset;
    if (k > 0 && k < features.size()) {
      for (std::size_t i = 0; i < k; ++i) std::swap(features[i], features[i + rng_.below(features.size() - i)]);
      features.resize(k);
      std::sort(features.begin(), features.end());
    }
    return features;
  }

  SplitChoice findSplit(const std::vector<std::size_t>& rows) {
    SplitChoice best;
    const std::vector<std::size_t> features = candidateFeatures();
    if (params_.splitMode == SplitMode::Random) {
      for (std::size_t f : features) scanRandom(rows, f, best);
    } else {
      for (std::size_t f : features) scanExhaustive(rows, f, best);
    }
    return best;
  }

  void scanExhaustive(const std::vector<std::size_t>& rows, std::size_t f, SplitChoice& best) const {
    std::vector<std::size_t> order(rows);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
    const std::size_t n = order.size();
    const std::size_t minLeaf = std::max<std::size_t>(params_.minLeaf, 1);

    if (kind_ == TaskKind::Regression) {
      double centre = 0.0;
      for (std::size_t r : order) centre += y_[r];
      centre /= static_cast<double>(n);
      double totalSum = 0.0;
      double totalSq = 0.0;
      for (std::size_t r : order) {
        const double v = y_[r] - centre;
        totalSum += v;
        totalSq += v * v;
      }
      double leftSum = 0.0;
      double leftSq = 0.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double v = y_[order[i - 1]] - centre;
        leftSum += v;
        leftSq += v * v;
        const double lo = x_(order[i - 1], f);
        const double hi = x_(order[i], f);
        if (!(lo < hi) || i < minLeaf || n - i < minLeaf) continue;
        const double nl = static_cast<double>(i);
        const double nr = static_cast<double>(n - i);
        const double rightSum = totalSum - leftSum;
        const double sse = std::max(0.0, leftSq - leftSum * leftSum / nl) +
                           std::max(0.0, (totalSq - leftSq) - rightSum * rightSum / nr);
        if (improves(sse, best.impurity)) best = {static_cast<int>(f), midpoint(lo, hi), sse};
      }
      return;
    }

    std::vector<double> left(classes_, 0.0);
    std::vector<double> right(classes_, 0.0);
    for (std::size_t r : order) right[static_cast<std::size_t>(y_[r])] += 1.0;
    for (std::size_t i = 1; i < n; ++i) {
      const auto k = static_cast<std::size_t>(y_[order[i - 1]]);
      left[k] += 1.0;
      right[k] -= 1.0;
      const double lo = x_(order[i - 1], f);
      const double hi = x_(order[i], f);
      if (!(lo < hi) || i < minLeaf || n - i < minLeaf) continue;
      const double imp = static_cast<double>(i) * classImpurity(left) + static_cast<double>(n - i) * classImpurity(right);
      if (improves(imp, best.impurity)) best = {static_cast<int>(f), midpoint(lo, hi), imp};
    }
  }

  void scanRandom(const std::vector<std::size_t>& rows, std::size_t f, SplitChoice& best) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t r : rows) {
      lo = std::min(lo, x_(r, f));
      hi = std::max(hi, x_(r, f));
    }
    if (!(lo < hi)) return;
    const double threshold = rng_.uniform(lo, hi);
    const double imp = partitionImpurity(rows, f, threshold);
    if (improves(imp, best.impurity)) best = {static_cast<int>(f), threshold, imp};
  }

  double partitionImpurity(const std::vector<std::size_t>& rows, std::size_t f, double threshold) const {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) (x_(r, f) <= threshold ? left : right).push_back(r);
    const std::size_t minLeaf = std::max<std::size_t>(params_.minLeaf, 1);
    if (left.size() < minLeaf || right.size() < minLeaf) return std::numeric_limits<double>::infinity();
    return nodeImpurity(left) + nodeImpurity(right);
  }

  bool worthSplitting(const std::vector<std::size_t>& rows, const SplitChoice& split, double parentImpurity) const {
    return split.feature >= 0 && parentImpurity > 0.0 &&
           split.impurity < parentImpurity * (1.0 - kTieTolerance) && rows.size() >= 2;
  }

  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> partition(const std::vector<std::size_t>& rows,
                                                                          const SplitChoice& split) const {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    return {std::move(left), std::move(right)};
  }

  int buildDepthFirst(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(makeLeaf(rows));
    if (!depthAllows(depth) || rows.size() < 2 * std::max<std::size_t>(params_.minLeaf, 1)) return index;
    const double parentImpurity = nodeImpurity(rows);
    if (!(parentImpurity > 0.0)) return index;
    const SplitChoice split = findSplit(rows);
    if (!worthSplitting(rows, split, parentImpurity)) return index;
    auto [left, right] = partition(rows, split);
    rows.clear();
    rows.shrink_to_fit();
    nodes_[index].feature = split.feature;
    nodes_[index].threshold = split.threshold;
    const int l = buildDepthFirst(std::move(left), depth + 1);
    const int r = buildDepthFirst(std::move(right), depth + 1);
    nodes_[index].left = l;
    nodes_[index].right = r;
    return index;
  }

  struct OpenLeaf {
    int node;
    int depth;
    std::vector<std::size_t> rows;
    SplitChoice split;
    double gain;
  };

  OpenLeaf openLeaf(int node, int depth, std::vector<std::size_t> rows) {
    OpenLeaf leaf{node, depth, std::move(rows), {}, -1.0};
    if (!depthAllows(depth) || leaf.rows.size() < 2 * std::max<std::size_t>(params_.minLeaf, 1)) return leaf;
    const double parentImpurity = nodeImpurity(leaf.rows);
    if (!(parentImpurity > 0.0)) return leaf;
    leaf.split = findSplit(leaf.rows);
    if (worthSplitting(leaf.rows, leaf.split, parentImpurity)) leaf.gain = parentImpurity - leaf.split.impurity;
    return leaf;
  }

  void buildBestFirst(std::vector<std::size_t> rows) {
    nodes_.push_back(makeLeaf(rows));
    std::vector<OpenLeaf> open;
    open.push_back(openLeaf(0, 0, std::move(rows)));
    std::size_t leaves = 1;
    while (leaves < params_.maxLeaves) {
      auto best = open.end();
      for (auto it = open.begin(); it != open.end(); ++it) {
        if (it->gain > 0.0 && (best == open.end() || it->gain > best->gain)) best = it;
      }
      if (best == open.end()) break;
      OpenLeaf chosen = std::move(*best);
      open.erase(best);
      auto [left, right] = partition(chosen.rows, chosen.split);
      TreeNode& parent = nodes_[static_cast<std::size_t>(chosen.node)];
      parent.feature = chosen.split.feature;
      parent.threshold = chosen.split.threshold;
      const int l = static_cast<int>(nodes_.size());
      nodes_.push_back(makeLeaf(left));
      const int r = static_cast<int>(nodes_.size());
      nodes_.push_back(makeLeaf(right));
      nodes_[static_cast<std::size_t>(chosen.node)].left = l;
      nodes_[static_cast<std::size_t>(chosen.node)].right = r;
      open.push_back(openLeaf(l, chosen.depth + 1, std::move(left)));
      open.push_back(openLeaf(r, chosen.depth + 1, std::move(right)));
      ++leaves;
    }
  }

  // Oblivious growth: every node on a level shares one (feature, threshold).
  // Nodes whose share of the split would leave a child under minLeaf stay leaves.
  void buildOblivious(std::vector<std::size_t> rows) {
    if (kind_ != TaskKind::Regression) throw ConfigError("oblivious trees support regression only");
    const std::size_t minLeaf = std::max<std::size_t>(params_.minLeaf, 1);
    nodes_.push_back(makeLeaf(rows));
    std::vector<std::pair<int, std::vector<std::size_t>>> level;
    level.emplace_back(0, std::move(rows));
    for (int depth = 0; depthAllows(depth) && !level.empty(); ++depth) {
      const std::size_t m = level.size();
      std::vector<double> centre(m, 0.0);
      std::vector<double> totalSum(m, 0.0);
      std::vector<double> totalSq(m, 0.0);
      std::vector<std::size_t> nodeOf(x_.rows(), 0);
      std::vector<std::size_t> all;
      double levelImpurity = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const auto& rs = level[j].second;
        for (std::size_t r : rs) centre[j] += y_[r];
        centre[j] /= static_cast<double>(rs.size());
        for (std::size_t r : rs) {
          const double v = y_[r] - centre[j];
          totalSum[j] += v;
          totalSq[j] += v * v;
          nodeOf[r] = j;
          all.push_back(r);
        }
        levelImpurity += std::max(0.0, totalSq[j] - totalSum[j] * totalSum[j] / static_cast<double>(rs.size()));
      }
      if (!(levelImpurity > 0.0)) break;

      auto sse = [](double sum, double sq, double n) { return n > 0.0 ? std::max(0.0, sq - sum * sum / n) : 0.0; };
      SplitChoice best;
      for (std::size_t f : candidateFeatures()) {
        std::vector<std::size_t> order(all);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
        std::vector<double> leftSum(m, 0.0);
        std::vector<double> leftSq(m, 0.0);
        std::vector<std::size_t> leftN(m, 0);
        auto contribution = [&](std::size_t j) {
          const std::size_t n = level[j].second.size();
          if (leftN[j] < minLeaf || n - leftN[j] < minLeaf) {
            return sse(totalSum[j], totalSq[j], static_cast<double>(n));
          }
          return sse(leftSum[j], leftSq[j], static_cast<double>(leftN[j])) +
                 sse(totalSum[j] - leftSum[j], totalSq[j] - leftSq[j], static_cast<double>(n - leftN[j]));
        };
        for (std::size_t i = 1; i < order.size(); ++i) {
          const std::size_t r = order[i - 1];
          const std::size_t j = nodeOf[r];
          const double v = y_[r] - centre[j];
          leftSum[j] += v;
          leftSq[j] += v * v;
          ++leftN[j];
          const double lo = x_(r, f);
          const double hi = x_(order[i], f);
          if (!(lo < hi)) continue;
          double total = 0.0;
          for (std::size_t k = 0; k < m; ++k) total += contribution(k);
          if (improves(total, best.impurity)) best = {static_cast<int>(f), midpoint(lo, hi), total};
        }
      }
      if (best.feature < 0 || !(best.impurity < levelImpurity * (1.0 - kTieTolerance))) break;

      std::vector<std::pair<int, std::vector<std::size_t>>> next;
      for (auto& [node, rs] : level) {
        auto [left, right] = partition(rs, best);
        if (left.size() < minLeaf || right.size() < minLeaf) continue;
        nodes_[static_cast<std::size_t>(node)].feature = best.feature;
        nodes_[static_cast<std::size_t>(node)].threshold = best.threshold;
        const int l = static_cast<int>(nodes_.size());
        nodes_.push_back(makeLeaf(left));
        const int r = static_cast<int>(nodes_.size());
        nodes_.push_back(makeLeaf(right));
        nodes_[static_cast<std::size_t>(node)].left = l;
        nodes_[static_cast<std::size_t>(node)].right = r;
        next.emplace_back(l, std::move(left));
        next.emplace_back(r, std::move(right));
      }
      level = std::move(next);
    }
  }

  const Matrix& x_;
  const std::vector<double>& y_;
  TaskKind kind_;
  TreeParams params_;
  std::size_t classes_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

void checkInputs(const Matrix& x, const std::vector<double>& y, std::span<const std::size_t> rows) {
  if (x.rows() != y.size()) throw DataError("fitTree: feature and label row counts differ");
  if (rows.empty()) throw DataError("fitTree: no training rows");
  for (std::size_t r : rows) {
    if (r >= x.rows()) throw DataError("fitTree: row index out of range");
    if (!std::isfinite(y[r])) throw DataError("fitTree: non-finite label");
    for (double v : x.row(r)) {
      if (std::isnan(v)) throw DataError("fitTree: NaN feature cell at row " + std::to_string(r));
    }
  }
}

// Preorder copy of the subtree rooted at `index`, collapsing nodes in `collapse`.
int copyPruned(const std::vector<TreeNode>& src, std::size_t index, const std::vector<bool>& collapse,
               std::vector<TreeNode>& out) {
  const int at = static_cast<int>(out.size());
  out.push_back(src[index]);
  if (src[index].isLeaf() || collapse[index]) {
    out.back().feature = -1;
    out.back().threshold = 0.0;
    out.back().left = -1;
    out.back().right = -1;
    return at;
  }
  const int l = copyPruned(src, static_cast<std::size_t>(src[index].left), collapse, out);
  const int r = copyPruned(src, static_cast<std::size_t>(src[index].right), collapse, out);
  out[static_cast<std::size_t>(at)].left = l;
  out[static_cast<std::size_t>(at)].right = r;
  return at;
}

}  // namespace

DecisionTree::DecisionTree(TaskKind kind, std::size_t inputs, std::size_t outputs, std::vector<TreeNode> nodes)
    : kind_(kind), inputs_(inputs), outputs_(outputs), nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw DataError("tree without nodes");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TreeNode& n = nodes_[i];
    if (n.isLeaf()) {
      if (n.value.size() != outputs_) throw DataError("tree leaf has wrong output width");
      continue;
    }
    const auto size = static_cast<int>(nodes_.size());
    if (static_cast<std::size_t>(n.feature) >= inputs_ || n.left <= static_cast<int>(i) ||
        n.right <= static_cast<int>(i) || n.left >= size || n.right >= size) {
      throw DataError("tree node " + std::to_string(i) + " is malformed");
    }
  }
}

std::size_t DecisionTree::leafCount() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.isLeaf(); }));
}

int DecisionTree::depth() const {
  std::vector<int> depthOf(nodes_.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, depthOf[i]);
    if (!nodes_[i].isLeaf()) {
      depthOf[static_cast<std::size_t>(nodes_[i].left)] = depthOf[i] + 1;
      depthOf[static_cast<std::size_t>(nodes_[i].right)] = depthOf[i] + 1;
    }
  }
  return deepest;
}

std::size_t DecisionTree::leafIndex(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes_[i].isLeaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

double DecisionTree::trainingRisk() const {
  double total = 0.0;
  for (const auto& n : nodes_) {
    if (n.isLeaf()) total += n.error;
  }
  return total / static_cast<double>(nodes_[0].count);
}

Matrix DecisionTree::predictUnchecked(const Matrix& x) const {
  Matrix out(x.rows(), outputs_);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto& v = predictRow(x.row(r));
    std::copy(v.begin(), v.end(), out.row(r).begin());
  }
  return out;
}

DecisionTree DecisionTree::withLeafValues(const std::vector<std::vector<double>>& values, std::size_t outputs) const {
  std::vector<TreeNode> nodes = nodes_;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].isLeaf()) nodes[i].value = values.at(i);
  }
  return DecisionTree(TaskKind::Regression, inputs_, outputs, std::move(nodes));
}

DecisionTree laplaceSmoothed(const DecisionTree& tree) {
  if (tree.kind() != TaskKind::Classification) return tree;
  std::vector<TreeNode> nodes = tree.nodes();
  const double classes = static_cast<double>(tree.outputCount());
  for (TreeNode& n : nodes) {
    if (!n.isLeaf()) continue;
    const double total = static_cast<double>(n.count);
    for (double& v : n.value) v = (v * total + 1.0) / (total + classes);
  }
  return DecisionTree(TaskKind::Classification, tree.inputCount(), tree.outputCount(), std::move(nodes));
}

bool operator==(const TreeNode& a, const TreeNode& b) {
  return a.feature == b.feature && a.threshold == b.threshold && a.left == b.left && a.right == b.right &&
         a.value == b.value && a.count == b.count && a.error == b.error;
}

bool operator==(const DecisionTree& a, const DecisionTree& b) {
  return a.kind_ == b.kind_ && a.inputs_ == b.inputs_ && a.outputs_ == b.outputs_ && a.nodes_ == b.nodes_;
}

nlohmann::json DecisionTree::toJson() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : nodes_) {
    nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count, n.error, n.value});
  }
  return {{"type", typeName()},
          {"kind", taskKindName(kind_)},
          {"inputs", inputs_},
          {"outputs", outputs_},
          {"nodes", std::move(nodes)}};
}

DecisionTree DecisionTree::fromJson(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& a : j.at("nodes")) {
    TreeNode n;
    n.feature = a.at(0).get<int>();
    n.threshold = a.at(1).get<double>();
    n.left = a.at(2).get<int>();
    n.right = a.at(3).get<int>();
    n.count = a.at(4).get<std::size_t>();
    n.error = a.at(5).get<double>();
    n.value = a.at(6).get<std::vector<double>>();
    nodes.push_back(std::move(n));
  }
  return DecisionTree(parseTaskKind(j.at("kind").get<std::string>()), j.at("inputs").get<std::size_t>(),
                      j.at("outputs").get<std::size_t>(), std::move(nodes));
}

DecisionTree fitTree(const Matrix& x, const std::vector<double>& y, TaskKind kind, const TreeParams& params,
                     std::size_t classCount) {
  const std::vector<std::size_t> rows = iota(x.rows());
  return fitTree(x, y, rows, kind, params, classCount);
}

DecisionTree fitTree(const Matrix& x, const std::vector<double>& y, std::span<const std::size_t> rows, TaskKind kind,
                     const TreeParams& params, std::size_t classCount) {
  checkInputs(x, y, rows);
  if (kind == TaskKind::Classification) {
    checkClassLabels(y);
    if (classCount == 0) classCount = classCountOf(y);
    for (std::size_t r : rows) {
      if (static_cast<std::size_t>(y[r]) >= classCount) throw DataError("fitTree: label exceeds class count");
    }
  }
  Builder builder(x, y, kind, params, classCount);
  return builder.build(rows);
}

double costComplexity(const DecisionTree& tree, double alpha) {
  return tree.trainingRisk() + alpha * static_cast<double>(tree.leafCount());
}

DecisionTree pruneCostComplexity(const DecisionTree& tree, double alpha) {
  if (std::isnan(alpha) || alpha < 0.0) throw DomainError("pruning alpha must be >= 0");
  const auto& nodes = tree.nodes();
  std::vector<bool> collapse(nodes.size(), false);
  if (std::isinf(alpha)) {
    collapse[0] = true;
  } else if (alpha > 0.0) {
    const double rootCount = static_cast<double>(nodes[0].count);
    std::vector<double> best(nodes.size(), 0.0);
    // Children always follow their parent, so a reverse sweep is bottom-up.
    for (std::size_t i = nodes.size(); i-- > 0;) {
      const double asLeaf = nodes[i].error / rootCount + alpha;
      if (nodes[i].isLeaf()) {
        best[i] = asLeaf;
        continue;
      }
      const double asSubtree =
          best[static_cast<std::size_t>(nodes[i].left)] + best[static_cast<std::size_t>(nodes[i].right)];
      if (asLeaf <= asSubtree + kTieTolerance * (std::abs(asLeaf) + std::abs(asSubtree))) {
        collapse[i] = true;
        best[i] = asLeaf;
      } else {
        best[i] = asSubtree;
      }
    }
  }
  std::vector<TreeNode> out;
  copyPruned(nodes, 0, collapse, out);
  return DecisionTree(tree.kind(), tree.inputCount(), tree.outputCount(), std::move(out));
}

std::vector<double> pruningPath(const DecisionTree& tree) {
  std::vector<double> path;
  DecisionTree current = tree;
  const double rootCount = static_cast<double>(tree.nodes()[0].count);
  while (current.leafCount() > 1) {
    const auto& nodes = current.nodes();
    std::vector<double> leafError(nodes.size(), 0.0);
    std::vector<double> leaves(nodes.size(), 0.0);
    for (std::size_t i = nodes.size(); i-- > 0;) {
      if (nodes[i].isLeaf()) {
        leafError[i] = nodes[i].error;
        leaves[i] = 1.0;
      } else {
        const auto l = static_cast<std::size_t>(nodes[i].left);
        const auto r = static_cast<std::size_t>(nodes[i].right);
        leafError[i] = leafError[l] + leafError[r];
        leaves[i] = leaves[l] + leaves[r];
      }
    }
    double weakest = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].isLeaf()) continue;
      weakest = std::min(weakest, (nodes[i].error - leafError[i]) / (rootCount * (leaves[i] - 1.0)));
    }
    weakest = std::max(weakest, 0.0);
    path.push_back(weakest);
    const std::size_t before = current.leafCount();
    current = pruneCostComplexity(current, weakest > 0.0 ? weakest : std::numeric_limits<double>::min());
    if (current.leafCount() == before) break;
  }
  return path;
}

}  // namespace buyback::learn
