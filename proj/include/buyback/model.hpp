#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "buyback/common.hpp"
#include "json.hpp"

namespace buyback::learn {

/// Fitted predictor. Regression models return one column; classifiers return
/// one probability column per class.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string typeName() const = 0;
  virtual TaskKind kind() const = 0;
  virtual std::size_t inputCount() const = 0;
  virtual std::size_t outputCount() const = 0;

  /// Throws DataError when x has a different column count than training.
  Matrix predict(const Matrix& x) const {
    if (x.cols() != inputCount()) {
      throw DataError(typeName() + ": expected " + std::to_string(inputCount()) + " features, got " +
                      std::to_string(x.cols()));
    }
    return predictUnchecked(x);
  }

  virtual nlohmann::json toJson() const = 0;

 protected:
  virtual Matrix predictUnchecked(const Matrix& x) const = 0;
};

using ModelPtr = std::shared_ptr<const Model>;

/// Optional wall-clock stop for iterative fits; the model built so far is kept.
struct FitControl {
  std::optional<std::chrono::steady_clock::time_point> deadline;

  bool expired() const { return deadline && std::chrono::steady_clock::now() >= *deadline; }
};

/// Number of classes implied by 0-based integer labels (at least 2).
std::size_t classCountOf(const std::vector<double>& labels);
/// Throws DataError unless every label is a non-negative integer.
void checkClassLabels(const std::vector<double>& labels);

/// Column 0 for regression; P(class 1) for binary classification.
std::vector<double> scoreColumn(const Matrix& predictions, TaskKind kind);
/// Argmax class for classification, the value itself for regression.
std::vector<double> pointPredictions(const Matrix& predictions, TaskKind kind);

std::string taskKindName(TaskKind kind);
TaskKind parseTaskKind(const std::string& name);

inline constexpr double kProbabilityClip = 1e-15;

/// Mean negative log-likelihood of the true class, probabilities clipped to
/// [1e-15, 1 - 1e-15].
double logLoss(const Matrix& probabilities, const std::vector<double>& labels);
double rmse(const std::vector<double>& predictions, const std::vector<double>& targets);
/// Log loss for classification, RMSE for regression.
double taskLoss(const Matrix& predictions, const std::vector<double>& targets, TaskKind kind);
/// Classification: argmax hits. Regression: agreement on which side of
/// `zeroLevel` (inclusive counts as up) prediction and target fall.
double taskAccuracy(const Matrix& predictions, const std::vector<double>& targets, TaskKind kind,
                    double zeroLevel = 0.0);

}  // namespace buyback::learn
