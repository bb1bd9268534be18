#include "buyback/feature_engineering.hpp"

#include <algorithm>
#include <cmath>

#include "buyback/learners.hpp"
#include "buyback/tree.hpp"

namespace buyback::automl {

std::size_t goldenKeepCount(std::size_t candidates, std::size_t maxKeep) {
  return std::min((candidates * 5 + 99) / 100, maxKeep);
}

double goldenValue(const GoldenRecipe& recipe, std::span<const double> row, bool* zeroDenominator) {
  const double a = row[recipe.left];
  const double b = row[recipe.right];
  if (recipe.op == GoldenOp::Difference) return a - b;
  if (std::abs(b) < kZeroDenominator) {
    if (zeroDenominator) *zeroDenominator = true;
    return 0.0;
  }
  return a / b;
}

Matrix applyGoldenRecipes(const Matrix& x, std::span<const GoldenRecipe> recipes) {
  Matrix extra(x.rows(), recipes.size());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    for (std::size_t k = 0; k < recipes.size(); ++k) extra(r, k) = goldenValue(recipes[k], x.row(r));
  }
  return x.hconcat(extra);
}

std::string goldenName(const GoldenRecipe& recipe, std::span<const std::string> featureNames) {
  auto name = [&](std::size_t i) { return i < featureNames.size() ? featureNames[i] : "x" + std::to_string(i); };
  return name(recipe.left) + (recipe.op == GoldenOp::Difference ? "_minus_" : "_over_") + name(recipe.right);
}

GoldenResult goldenFeatures(const Matrix& x, const std::vector<double>& y, TaskKind kind, std::uint64_t seed,
                            std::size_t maxKeep, std::span<const std::size_t> columns) {
  std::vector<std::size_t> eligible(columns.begin(), columns.end());
  if (eligible.empty()) eligible = iota(x.cols());
  if (eligible.size() < 2) throw DataError("golden features need at least two numeric columns");
  if (x.rows() < 4) throw DataError("golden features need at least four rows");
  if (x.rows() != y.size()) throw DataError("golden features: row mismatch");

  std::vector<std::size_t> order = iota(x.rows());
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t half = x.rows() / 2;
  std::vector<std::size_t> fitRows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(half));
  std::vector<std::size_t> scoreRows(order.begin() + static_cast<std::ptrdiff_t>(half), order.end());
  std::sort(fitRows.begin(), fitRows.end());
  std::sort(scoreRows.begin(), scoreRows.end());
  std::vector<double> fitY;
  std::vector<double> scoreY;
  for (std::size_t r : fitRows) fitY.push_back(y[r]);
  for (std::size_t r : scoreRows) scoreY.push_back(y[r]);
  const std::size_t classes = kind == TaskKind::Classification ? learn::classCountOf(y) : 0;

  learn::TreeParams tp;
  tp.maxDepth = 3;
  GoldenResult result;
  std::vector<GoldenRecipe> candidates;
  for (std::size_t i = 0; i < eligible.size(); ++i) {
    for (std::size_t j = i + 1; j < eligible.size(); ++j) {
      for (GoldenOp op : {GoldenOp::Difference, GoldenOp::Ratio}) {
        GoldenRecipe recipe{eligible[i], eligible[j], op, 0.0};
        Matrix fitX(fitRows.size(), 1);
        Matrix scoreX(scoreRows.size(), 1);
        for (std::size_t k = 0; k < fitRows.size(); ++k) {
          bool zero = false;
          fitX(k, 0) = goldenValue(recipe, x.row(fitRows[k]), &zero);
          result.zeroDenominators += zero ? 1 : 0;
        }
        for (std::size_t k = 0; k < scoreRows.size(); ++k) {
          bool zero = false;
          scoreX(k, 0) = goldenValue(recipe, x.row(scoreRows[k]), &zero);
          result.zeroDenominators += zero ? 1 : 0;
        }
        const learn::DecisionTree tree = learn::fitTree(fitX, fitY, kind, tp, classes);
        recipe.loss = learn::taskLoss(tree.predict(scoreX), scoreY, kind);
        candidates.push_back(recipe);
      }
    }
  }
  result.candidateCount = candidates.size();
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const GoldenRecipe& a, const GoldenRecipe& b) { return a.loss < b.loss; });
  candidates.resize(goldenKeepCount(candidates.size(), maxKeep));
  result.kept = std::move(candidates);
  result.augmented = applyGoldenRecipes(x, result.kept);
  return result;
}

FeatureSelection selectFeatures(const Matrix& x, const std::vector<double>& y, TaskKind kind,
                                const ModelFactory& factory, std::uint64_t seed, std::size_t permutations) {
  if (x.cols() < 1) throw DataError("feature selection needs at least one column");
  if (x.rows() < 8) throw DataError("feature selection needs at least eight rows");
  if (permutations < 1) throw ConfigError("feature selection needs at least one permutation");
  const std::size_t p = x.cols();

  Rng probeRng(deriveSeed(seed, 0));
  std::vector<double> probe(x.rows());
  for (double& v : probe) v = probeRng.uniform();
  const Matrix withProbe = x.hconcat(Matrix::column(probe));

  std::vector<std::size_t> order = iota(x.rows());
  Rng splitRng(deriveSeed(seed, 1));
  splitRng.shuffle(order);
  const auto fitCount = static_cast<std::size_t>(std::ceil(0.75 * static_cast<double>(x.rows())));
  std::vector<std::size_t> fitRows(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(fitCount));
  std::vector<std::size_t> validRows(order.begin() + static_cast<std::ptrdiff_t>(fitCount), order.end());
  std::sort(fitRows.begin(), fitRows.end());
  std::sort(validRows.begin(), validRows.end());
  std::vector<double> fitY;
  std::vector<double> validY;
  for (std::size_t r : fitRows) fitY.push_back(y[r]);
  for (std::size_t r : validRows) validY.push_back(y[r]);

  const Matrix fitX = withProbe.selectRows(fitRows);
  const Matrix validX = withProbe.selectRows(validRows);
  const ModelPtr model = factory(fitX, fitY, deriveSeed(seed, 2));
  const double base = learn::taskLoss(model->predict(validX), validY, kind);

  std::vector<double> importance(p + 1, 0.0);
  Rng permRng(deriveSeed(seed, 3));
  for (std::size_t c = 0; c <= p; ++c) {
    double total = 0.0;
    for (std::size_t k = 0; k < permutations; ++k) {
      std::vector<double> column = validX.columnValues(c);
      permRng.shuffle(column);
      Matrix shuffled = validX;
      for (std::size_t r = 0; r < shuffled.rows(); ++r) shuffled(r, c) = column[r];
      total += learn::taskLoss(model->predict(shuffled), validY, kind) - base;
    }
    importance[c] = total / static_cast<double>(permutations);
  }

  FeatureSelection out;
  out.probeImportance = importance[p];
  out.importance.assign(importance.begin(), importance.begin() + static_cast<std::ptrdiff_t>(p));
  for (std::size_t c = 0; c < p; ++c) (importance[c] <= out.probeImportance ? out.dropped : out.kept).push_back(c);
  if (out.kept.empty()) {
    const auto best = static_cast<std::size_t>(std::max_element(out.importance.begin(), out.importance.end()) -
                                               out.importance.begin());
    out.kept = {best};
    out.dropped.erase(std::find(out.dropped.begin(), out.dropped.end(), best));
    out.keptBestOnly = true;
    warn("feature selection would drop every column; keeping the most important one");
  }

  const std::vector<std::size_t> original = iota(p);
  const ModelPtr fullModel = factory(x.selectRows(fitRows), fitY, deriveSeed(seed, 4));
  out.fullLoss = learn::taskLoss(fullModel->predict(x.selectRows(validRows)), validY, kind);
  if (out.dropped.empty()) {
    out.reducedLoss = out.fullLoss;
    return out;
  }
  const Matrix reduced = x.selectColumns(out.kept);
  const ModelPtr reducedModel = factory(reduced.selectRows(fitRows), fitY, deriveSeed(seed, 4));
  out.reducedLoss = learn::taskLoss(reducedModel->predict(reduced.selectRows(validRows)), validY, kind);
  if (out.reducedLoss > out.fullLoss * (1.0 + kSelectionGuard) + 1e-12) {
    note("feature selection drop set rejected: loss " + std::to_string(out.reducedLoss) + " vs " +
         std::to_string(out.fullLoss));
    out.guardRejected = true;
    out.kept = original;
    out.dropped.clear();
    out.keptBestOnly = false;
  }
  return out;
}

FeaturePipelineModel::FeaturePipelineModel(std::vector<GoldenRecipe> recipes, std::vector<std::size_t> columns,
                                           std::size_t inputs, ModelPtr inner)
    : recipes_(std::move(recipes)), columns_(std::move(columns)), inputs_(inputs), inner_(std::move(inner)) {
  if (!inner_) throw DataError("feature pipeline without a model");
  for (const auto& r : recipes_) {
    if (r.left >= inputs_ || r.right >= inputs_) throw DataError("golden recipe refers to a missing column");
  }
  const std::size_t width = columns_.empty() ? inputs_ + recipes_.size() : columns_.size();
  for (std::size_t c : columns_) {
    if (c >= inputs_ + recipes_.size()) throw DataError("feature pipeline selects a missing column");
  }
  if (width != inner_->inputCount()) throw DataError("feature pipeline width does not match its model");
}

Matrix FeaturePipelineModel::transform(const Matrix& x) const {
  Matrix augmented = recipes_.empty() ? x : applyGoldenRecipes(x, recipes_);
  return columns_.empty() ? augmented : augmented.selectColumns(columns_);
}

Matrix FeaturePipelineModel::predictUnchecked(const Matrix& x) const { return inner_->predict(transform(x)); }

nlohmann::json FeaturePipelineModel::toJson() const {
  nlohmann::json recipes = nlohmann::json::array();
  for (const auto& r : recipes_) {
    recipes.push_back({{"left", r.left},
                       {"right", r.right},
                       {"op", r.op == GoldenOp::Difference ? "difference" : "ratio"},
                       {"loss", r.loss}});
  }
  return {{"type", typeName()},
          {"inputs", inputs_},
          {"recipes", std::move(recipes)},
          {"columns", columns_},
          {"model", inner_->toJson()}};
}

FeaturePipelineModel FeaturePipelineModel::fromJson(const nlohmann::json& j) {
  std::vector<GoldenRecipe> recipes;
  for (const auto& r : j.at("recipes")) {
    recipes.push_back({r.at("left").get<std::size_t>(), r.at("right").get<std::size_t>(),
                       r.at("op").get<std::string>() == "ratio" ? GoldenOp::Ratio : GoldenOp::Difference,
                       r.at("loss").get<double>()});
  }
  ModelPtr inner = learn::modelFromJson(
      {{"format", "buyback-model"}, {"version", learn::kModelFormatVersion}, {"model", j.at("model")}});
  return FeaturePipelineModel(std::move(recipes), j.at("columns").get<std::vector<std::size_t>>(),
                              j.at("inputs").get<std::size_t>(), std::move(inner));
}

}  // namespace buyback::automl
