#include "buyback/boosting.hpp"

#include <algorithm>
#include <cmath>

namespace buyback::learn {

namespace {

constexpr double kLineSearchUpper = 10.0;
constexpr int kLineSearchIterations = 40;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

std::string_view growthName(GrowthPolicy g) {
  switch (g) {
    case GrowthPolicy::LevelWise: return "gbtLevelWise";
    case GrowthPolicy::LeafWise: return "gbtLeafWise";
    case GrowthPolicy::Symmetric: return "gbtSymmetric";
  }
  return "gbt";
}

TreeParams stageTreeParams(const BoostParams& p, std::uint64_t seed) {
  TreeParams tp;
  tp.maxDepth = p.maxDepth;
  tp.minLeaf = p.minLeaf;
  tp.seed = seed;
  if (p.growth == GrowthPolicy::LeafWise) tp.maxLeaves = std::max<std::size_t>(p.maxLeaves, 2);
  if (p.growth == GrowthPolicy::Symmetric) tp.oblivious = true;
  return tp;
}

}  // namespace

BoostParams levelWisePreset() {
  BoostParams p;
  p.growth = GrowthPolicy::LevelWise;
  p.maxDepth = 4;
  return p;
}

BoostParams leafWisePreset() {
  BoostParams p;
  p.growth = GrowthPolicy::LeafWise;
  p.maxDepth = 10;
  p.maxLeaves = 31;
  return p;
}

BoostParams symmetricPreset() {
  BoostParams p;
  p.growth = GrowthPolicy::Symmetric;
  p.maxDepth = 5;
  return p;
}

double boostLoss(BoostLoss loss, std::span<const double> y, std::span<const double> scores) {
  if (y.size() != scores.size() || y.empty()) throw DataError("boostLoss: size mismatch or empty");
  std::vector<double> terms(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (loss == BoostLoss::SquaredError) {
      terms[i] = (y[i] - scores[i]) * (y[i] - scores[i]);
    } else {
      // -[y log p + (1 - y) log(1 - p)] with p = sigmoid(score)
      terms[i] = softplus(scores[i]) - y[i] * scores[i];
    }
  }
  return stats::mean(terms);
}

std::vector<double> lossGradient(BoostLoss loss, std::span<const double> y, std::span<const double> scores) {
  if (y.size() != scores.size()) throw DataError("lossGradient: size mismatch");
  std::vector<double> g(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    g[i] = loss == BoostLoss::SquaredError ? -2.0 * (y[i] - scores[i]) : sigmoid(scores[i]) - y[i];
  }
  return g;
}

double goldenSectionSearch(const std::function<double(double)>& f, double lo, double hi, int iterations) {
  const double invPhi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - invPhi * (b - a);
  double d = a + invPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invPhi * (b - a);
      fd = f(d);
    }
  }
  const double x = (a + b) / 2.0;
  return f(0.0) <= f(x) ? 0.0 : x;
}

BoostedModel::BoostedModel(TaskKind kind, BoostLoss loss, GrowthPolicy growth, std::vector<Stage> stages)
    : kind_(kind), loss_(loss), growth_(growth), stages_(std::move(stages)) {
  if (stages_.empty()) throw DataError("boosted model without stages");
}

std::string BoostedModel::typeName() const { return std::string(growthName(growth_)); }

std::vector<double> BoostedModel::rawScores(const Matrix& x) const {
  std::vector<double> f(x.rows(), 0.0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const auto row = x.row(r);
    double score = stages_.front().learner.predictRow(row)[0];
    for (std::size_t m = 1; m < stages_.size(); ++m) {
      score += stages_[m].multiplier * stages_[m].learner.predictRow(row)[0];
    }
    f[r] = score;
  }
  return f;
}

Matrix BoostedModel::predictUnchecked(const Matrix& x) const {
  const std::vector<double> f = rawScores(x);
  if (kind_ == TaskKind::Regression) return Matrix::column(f);
  Matrix out(x.rows(), 2);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double p = sigmoid(f[r]);
    out(r, 0) = 1.0 - p;
    out(r, 1) = p;
  }
  return out;
}

nlohmann::json BoostedModel::toJson() const {
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : stages_) stages.push_back({{"multiplier", s.multiplier}, {"learner", s.learner.toJson()}});
  return {{"type", typeName()},
          {"kind", taskKindName(kind_)},
          {"loss", loss_ == BoostLoss::SquaredError ? "squaredError" : "logLoss"},
          {"stages", std::move(stages)},
          {"lossHistory", lossHistory}};
}

BoostedModel BoostedModel::fromJson(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  GrowthPolicy growth = GrowthPolicy::LevelWise;
  if (type == "gbtLeafWise") growth = GrowthPolicy::LeafWise;
  else if (type == "gbtSymmetric") growth = GrowthPolicy::Symmetric;
  std::vector<Stage> stages;
  for (const auto& s : j.at("stages")) {
    stages.push_back({DecisionTree::fromJson(s.at("learner")), s.at("multiplier").get<double>()});
  }
  const BoostLoss loss = j.at("loss").get<std::string>() == "logLoss" ? BoostLoss::LogLoss : BoostLoss::SquaredError;
  BoostedModel model(parseTaskKind(j.at("kind").get<std::string>()), loss, growth, std::move(stages));
  model.lossHistory = j.value("lossHistory", std::vector<double>{});
  return model;
}

BoostedModel fitBoosted(const Matrix& x, const std::vector<double>& y, TaskKind kind, const BoostParams& params,
                        const FitControl& control) {
  if (params.nRounds < 1) throw ConfigError("boosting needs at least one round");
  if (!(params.shrinkage > 0.0)) throw ConfigError("boosting shrinkage must be positive");
  if (!(params.subsample > 0.0 && params.subsample <= 1.0)) throw ConfigError("subsample must lie in (0, 1]");
  const bool classify = kind == TaskKind::Classification;
  if (classify != (params.loss == BoostLoss::LogLoss)) {
    throw ConfigError("boosting loss does not match the task (log loss for classification, squared error otherwise)");
  }
  if (classify) {
    if (classCountOf(y) > 2) throw ConfigError("boosted classification supports two classes");
  }
  const std::size_t n = x.rows();

  // f1: a depth-limited tree on the labels. Classifier leaves hold the
  // Laplace-smoothed log-odds of their region.
  std::vector<BoostedModel::Stage> stages;
  DecisionTree first = fitTree(x, y, TaskKind::Regression, stageTreeParams(params, deriveSeed(params.seed, 0)));
  if (classify) {
    std::vector<std::vector<double>> logits(first.nodes().size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
      const TreeNode& node = first.nodes()[i];
      const double count = static_cast<double>(node.count);
      const double p = (node.value[0] * count + 1.0) / (count + 2.0);
      logits[i] = {std::log(p / (1.0 - p))};
    }
    first = first.withLeafValues(logits, 1);
  }
  stages.push_back({std::move(first), 1.0});

  std::vector<double> scores(n);
  for (std::size_t r = 0; r < n; ++r) scores[r] = stages.front().learner.predictRow(x.row(r))[0];
  std::vector<double> history{boostLoss(params.loss, y, scores)};

  Rng rng(deriveSeed(params.seed, 1));
  std::vector<double> stageOut(n);
  std::vector<double> trial(n);
  for (std::size_t m = 1; m < params.nRounds; ++m) {
    if (control.expired()) break;
    std::vector<double> pseudo = lossGradient(params.loss, y, scores);
    bool allZero = true;
    for (double& g : pseudo) {
      g = -g;
      allZero = allZero && g == 0.0;
    }
    if (allZero) break;

    std::vector<std::size_t> rows = iota(n);
    if (params.subsample < 1.0) {
      rng.shuffle(rows);
      rows.resize(std::max<std::size_t>(1, static_cast<std::size_t>(params.subsample * static_cast<double>(n))));
      std::sort(rows.begin(), rows.end());
    }
    DecisionTree learner =
        fitTree(x, pseudo, rows, TaskKind::Regression, stageTreeParams(params, deriveSeed(params.seed, m + 1)));
    for (std::size_t r = 0; r < n; ++r) stageOut[r] = learner.predictRow(x.row(r))[0];

    auto lossAt = [&](double gamma) {
      for (std::size_t r = 0; r < n; ++r) trial[r] = scores[r] + gamma * stageOut[r];
      return boostLoss(params.loss, y, trial);
    };
    double gamma = goldenSectionSearch(lossAt, 0.0, kLineSearchUpper, kLineSearchIterations) * params.shrinkage;
    double stepLoss = lossAt(gamma);
    if (stepLoss > history.back()) {
      gamma = 0.0;
      stepLoss = history.back();
    }
    for (std::size_t r = 0; r < n; ++r) scores[r] += gamma * stageOut[r];
    history.push_back(stepLoss);
    stages.push_back({std::move(learner), gamma});
  }

  BoostedModel model(kind, params.loss, params.growth, std::move(stages));
  model.lossHistory = std::move(history);
  return model;
}

}  // namespace buyback::learn
