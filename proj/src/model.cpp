#include "buyback/model.hpp"

#include <algorithm>
#include <cmath>

namespace buyback::learn {

void checkClassLabels(const std::vector<double>& labels) {
  for (double v : labels) {
    if (!(v >= 0.0) || v != std::floor(v) || v > 1e6) {
      throw DataError("classification labels must be non-negative integers");
    }
  }
}

std::size_t classCountOf(const std::vector<double>& labels) {
  checkClassLabels(labels);
  double top = 1.0;
  for (double v : labels) top = std::max(top, v);
  return static_cast<std::size_t>(top) + 1;
}

std::string taskKindName(TaskKind kind) {
  return kind == TaskKind::Classification ? "classification" : "regression";
}

TaskKind parseTaskKind(const std::string& name) {
  if (name == "classification") return TaskKind::Classification;
  if (name == "regression") return TaskKind::Regression;
  throw ConfigError("unknown task kind '" + name + "'");
}

std::vector<double> scoreColumn(const Matrix& predictions, TaskKind kind) {
  if (kind == TaskKind::Regression) return predictions.columnValues(0);
  if (predictions.cols() < 2) throw DataError("classifier output needs at least two probability columns");
  return predictions.columnValues(1);
}

std::vector<double> pointPredictions(const Matrix& predictions, TaskKind kind) {
  if (kind == TaskKind::Regression) return predictions.columnValues(0);
  std::vector<double> out(predictions.rows());
  for (std::size_t r = 0; r < predictions.rows(); ++r) {
    const auto row = predictions.row(r);
    out[r] = static_cast<double>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return out;
}

double logLoss(const Matrix& probabilities, const std::vector<double>& labels) {
  if (probabilities.rows() != labels.size() || labels.empty()) throw DataError("logLoss: size mismatch or empty");
  std::vector<double> terms(labels.size());
  for (std::size_t r = 0; r < labels.size(); ++r) {
    const auto k = static_cast<std::size_t>(labels[r]);
    if (k >= probabilities.cols()) throw DataError("logLoss: label outside probability columns");
    const double p = std::clamp(probabilities(r, k), kProbabilityClip, 1.0 - kProbabilityClip);
    terms[r] = -std::log(p);
  }
  return stats::mean(terms);
}

double rmse(const std::vector<double>& predictions, const std::vector<double>& targets) {
  if (predictions.size() != targets.size() || targets.empty()) throw DataError("rmse: size mismatch or empty");
  std::vector<double> sq(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) sq[i] = (predictions[i] - targets[i]) * (predictions[i] - targets[i]);
  return std::sqrt(stats::mean(sq));
}

double taskLoss(const Matrix& predictions, const std::vector<double>& targets, TaskKind kind) {
  if (kind == TaskKind::Classification) return logLoss(predictions, targets);
  return rmse(predictions.columnValues(0), targets);
}

double taskAccuracy(const Matrix& predictions, const std::vector<double>& targets, TaskKind kind, double zeroLevel) {
  if (predictions.rows() != targets.size() || targets.empty()) throw DataError("accuracy: size mismatch or empty");
  const std::vector<double> points = pointPredictions(predictions, kind);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (kind == TaskKind::Classification) hits += points[i] == targets[i] ? 1 : 0;
    else hits += (points[i] >= zeroLevel) == (targets[i] >= zeroLevel) ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(targets.size());
}

}  // namespace buyback::learn
