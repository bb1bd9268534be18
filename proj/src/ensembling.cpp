#include "buyback/ensembling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "buyback/learners.hpp"

namespace buyback::ensemble {

Metric metricFor(TaskKind kind) { return kind == TaskKind::Classification ? Metric::LogLoss : Metric::Rmse; }

double metricValue(Metric metric, const Matrix& predictions, const std::vector<double>& labels) {
  if (metric == Metric::LogLoss) return learn::logLoss(predictions, labels);
  return learn::rmse(predictions.columnValues(0), labels);
}

EnsembleModel::EnsembleModel(TaskKind kind, std::vector<Member> members) : kind_(kind), members_(std::move(members)) {
  if (members_.empty()) throw DataError("ensemble without members");
  for (const auto& m : members_) {
    if (!m.model) throw DataError("ensemble member '" + m.id + "' has no model");
    if (m.weight < 1) throw DataError("ensemble weights must be >= 1");
    if (m.model->inputCount() != members_.front().model->inputCount() ||
        m.model->outputCount() != members_.front().model->outputCount()) {
      throw DataError("ensemble member '" + m.id + "' has a different shape");
    }
  }
}

Matrix EnsembleModel::predictUnchecked(const Matrix& x) const {
  Matrix out(x.rows(), outputCount());
  double total = 0.0;
  for (const auto& m : members_) {
    const Matrix p = m.model->predict(x);
    const double w = static_cast<double>(m.weight);
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += w * p(r, c);
    }
    total += w;
  }
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (double& v : out.row(r)) v /= total;
  }
  return out;
}

nlohmann::json EnsembleModel::toJson() const {
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : members_) {
    members.push_back({{"id", m.id}, {"weight", m.weight}, {"stacked", m.stacked}, {"model", m.model->toJson()}});
  }
  return {{"type", typeName()}, {"kind", learn::taskKindName(kind_)}, {"members", std::move(members)}};
}

EnsembleModel EnsembleModel::fromJson(const nlohmann::json& j) {
  std::vector<Member> members;
  for (const auto& m : j.at("members")) {
    members.push_back({m.at("id").get<std::string>(), learn::modelFromJson({{"format", "buyback-model"},
                                                                           {"version", learn::kModelFormatVersion},
                                                                           {"model", m.at("model")}}),
                       m.at("weight").get<int>(), m.at("stacked").get<bool>()});
  }
  return EnsembleModel(learn::parseTaskKind(j.at("kind").get<std::string>()), std::move(members));
}

namespace {

// Weighted sum of selection predictions for the current member set.
class Blend {
 public:
  Blend(std::size_t rows, std::size_t cols) : sum_(rows, cols) {}

  void add(const Matrix& p, double w) {
    for (std::size_t i = 0; i < sum_.data().size(); ++i) {
      sum_(i / sum_.cols(), i % sum_.cols()) += w * p(i / p.cols(), i % p.cols());
    }
    total_ += w;
  }

  Matrix with(const Matrix& p, double w) const {
    Matrix out(sum_.rows(), sum_.cols());
    const double total = total_ + w;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = (sum_(r, c) + w * p(r, c)) / total;
    }
    return out;
  }

  Matrix current() const {
    Matrix out = sum_;
    for (std::size_t r = 0; r < out.rows(); ++r) {
      for (double& v : out.row(r)) v /= total_;
    }
    return out;
  }

 private:
  Matrix sum_;
  double total_ = 0.0;
};

Matrix blendOf(std::span<const Candidate> candidates, const std::vector<std::size_t>& members,
               const std::vector<int>& weights) {
  const Matrix& first = candidates[members.front()].selectionPredictions;
  Blend blend(first.rows(), first.cols());
  for (std::size_t i = 0; i < members.size(); ++i) {
    blend.add(candidates[members[i]].selectionPredictions, weights[i]);
  }
  return blend.current();
}

}  // namespace

Selection ensembleSelect(std::span<const Candidate> candidates, const std::vector<double>& labels, Metric metric) {
  if (candidates.empty()) throw DataError("ensembleSelect: no candidates");
  const Matrix& shape = candidates.front().selectionPredictions;
  std::vector<double> scores(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const Matrix& p = candidates[i].selectionPredictions;
    if (p.rows() != shape.rows() || p.cols() != shape.cols()) {
      throw DataError("ensembleSelect: candidate '" + candidates[i].id + "' has mismatched predictions");
    }
    scores[i] = metricValue(metric, p, labels);
  }
  std::vector<std::size_t> order = iota(candidates.size());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  Selection sel;
  sel.members = {order.front()};
  sel.weights = {1};
  sel.bestSingleMetric = scores[order.front()];
  double current = sel.bestSingleMetric;

  Blend blend(shape.rows(), shape.cols());
  blend.add(candidates[order.front()].selectionPredictions, 1.0);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const Matrix& p = candidates[order[i]].selectionPredictions;
    const double trial = metricValue(metric, blend.with(p, 1.0), labels);
    if (trial < current) {
      blend.add(p, 1.0);
      sel.members.push_back(order[i]);
      sel.weights.push_back(1);
      current = trial;
    }
  }

  if (sel.members.size() > 1) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t m = 0; m < sel.members.size(); ++m) {
        int bestWeight = sel.weights[m];
        double bestScore = current;
        for (int w = 1; w <= kMaxMemberWeight; ++w) {
          if (w == sel.weights[m]) continue;
          std::vector<int> trialWeights = sel.weights;
          trialWeights[m] = w;
          const double score = metricValue(metric, blendOf(candidates, sel.members, trialWeights), labels);
          if (score < bestScore) {
            bestScore = score;
            bestWeight = w;
          }
        }
        if (bestWeight != sel.weights[m]) {
          sel.weights[m] = bestWeight;
          current = bestScore;
          changed = true;
        }
      }
    }
  }

  std::vector<EnsembleModel::Member> members;
  for (std::size_t i = 0; i < sel.members.size(); ++i) {
    const Candidate& c = candidates[sel.members[i]];
    members.push_back({c.id, c.model, sel.weights[i], c.stacked});
  }
  const TaskKind kind = metric == Metric::LogLoss ? TaskKind::Classification : TaskKind::Regression;
  if (std::all_of(members.begin(), members.end(), [](const auto& m) { return m.model != nullptr; })) {
    sel.model = std::make_shared<const EnsembleModel>(kind, std::move(members));
  }
  sel.predictions = blendOf(candidates, sel.members, sel.weights);
  sel.metric = current;
  return sel;
}

std::vector<std::size_t> kFoldAssignment(std::size_t rows, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (k > rows) throw DataError("k-fold: k = " + std::to_string(k) + " exceeds " + std::to_string(rows) + " rows");
  std::vector<std::size_t> order = iota(rows);
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> fold(rows);
  for (std::size_t i = 0; i < rows; ++i) fold[order[i]] = i % k;
  return fold;
}

Matrix appendedColumns(const Matrix& level0Predictions, TaskKind kind) {
  if (kind == TaskKind::Classification && level0Predictions.cols() == 2) {
    const std::vector<double> p = level0Predictions.columnValues(1);
    return Matrix::column(p);
  }
  return level0Predictions;
}

StackedModel::StackedModel(TaskKind kind, ModelPtr level0, ModelPtr level1)
    : kind_(kind), level0_(std::move(level0)), level1_(std::move(level1)) {
  if (!level0_ || !level1_) throw DataError("stacked model needs both levels");
}

Matrix StackedModel::predictUnchecked(const Matrix& x) const {
  return level1_->predict(x.hconcat(appendedColumns(level0_->predict(x), kind_)));
}

nlohmann::json StackedModel::toJson() const {
  return {{"type", typeName()},
          {"kind", learn::taskKindName(kind_)},
          {"level0", level0_->toJson()},
          {"level1", level1_->toJson()}};
}

StackedModel StackedModel::fromJson(const nlohmann::json& j) {
  auto wrap = [](const nlohmann::json& m) {
    return learn::modelFromJson({{"format", "buyback-model"}, {"version", learn::kModelFormatVersion}, {"model", m}});
  };
  return StackedModel(learn::parseTaskKind(j.at("kind").get<std::string>()), wrap(j.at("level0")),
                      wrap(j.at("level1")));
}

StackFit fitStacked(const Matrix& x, const std::vector<double>& y, TaskKind kind, const ModelFactory& level0,
                    const ModelFactory& level1, std::size_t k, std::uint64_t seed) {
  if (x.rows() != y.size()) throw DataError("fitStacked: row mismatch");
  const std::vector<std::size_t> fold = kFoldAssignment(x.rows(), k, deriveSeed(seed, 0));
  StackFit fit;
  Matrix oof;
  for (std::size_t f = 0; f < k; ++f) {
    FoldAudit audit;
    audit.fold = f;
    for (std::size_t r = 0; r < x.rows(); ++r) (fold[r] == f ? audit.predictedRows : audit.trainRows).push_back(r);
    std::vector<double> trainY(audit.trainRows.size());
    for (std::size_t i = 0; i < trainY.size(); ++i) trainY[i] = y[audit.trainRows[i]];
    const ModelPtr model = level0(x.selectRows(audit.trainRows), trainY, deriveSeed(seed, 1 + f));
    const Matrix predicted = appendedColumns(model->predict(x.selectRows(audit.predictedRows)), kind);
    if (oof.empty()) oof = Matrix(x.rows(), predicted.cols());
    for (std::size_t i = 0; i < audit.predictedRows.size(); ++i) {
      for (std::size_t c = 0; c < predicted.cols(); ++c) oof(audit.predictedRows[i], c) = predicted(i, c);
    }
    fit.audit.push_back(std::move(audit));
  }
  const ModelPtr full = level0(x, y, deriveSeed(seed, 1 + k));
  const ModelPtr top = level1(x.hconcat(oof), y, deriveSeed(seed, 2 + k));
  fit.model = std::make_shared<const StackedModel>(kind, full, top);
  fit.outOfFold = std::move(oof);
  return fit;
}

Selection ensembleStack(std::vector<Candidate>& pool, std::size_t bestN, const StackBuilder& stack,
                        const std::vector<double>& labels, Metric metric) {
  if (pool.empty()) throw DataError("ensembleStack: empty pool");
  if (bestN > pool.size()) throw ConfigError("ensembleStack: bestN exceeds the candidate count");
  if (pool.size() == 1) return ensembleSelect(pool, labels, metric);
  std::vector<double> scores(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) scores[i] = metricValue(metric, pool[i].selectionPredictions, labels);
  std::vector<std::size_t> order = iota(pool.size());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  const std::size_t base = pool.size();
  for (std::size_t i = 0; i < bestN; ++i) {
    if (order[i] >= base) continue;
    Candidate c = stack(order[i]);
    c.stacked = true;
    pool.push_back(std::move(c));
  }
  return ensembleSelect(pool, labels, metric);
}

}  // namespace buyback::ensemble
