#include "buyback/linear.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace buyback::learn {

namespace {

constexpr double kRidgeFallback = 1e-8;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void checkFitInputs(const Matrix& x, const std::vector<double>& y) {
  if (x.rows() == 0) throw DataError("cannot fit on zero rows");
  if (x.rows() != y.size()) throw DataError("feature and label row counts differ");
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw DataError("non-finite feature cell");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DataError("non-finite label");
  }
}

}  // namespace

BaselineModel::BaselineModel(TaskKind kind, std::size_t inputs, std::vector<double> output)
    : kind_(kind), inputs_(inputs), output_(std::move(output)) {}

Matrix BaselineModel::predictUnchecked(const Matrix& x) const {
  Matrix out(x.rows(), output_.size());
  for (std::size_t r = 0; r < x.rows(); ++r) std::copy(output_.begin(), output_.end(), out.row(r).begin());
  return out;
}

nlohmann::json BaselineModel::toJson() const {
  return {{"type", typeName()}, {"kind", taskKindName(kind_)}, {"inputs", inputs_}, {"output", output_}};
}

BaselineModel BaselineModel::fromJson(const nlohmann::json& j) {
  return BaselineModel(parseTaskKind(j.at("kind").get<std::string>()), j.at("inputs").get<std::size_t>(),
                       j.at("output").get<std::vector<double>>());
}

BaselineModel fitBaseline(const Matrix& x, const std::vector<double>& y, TaskKind kind) {
  checkFitInputs(x, y);
  if (kind == TaskKind::Regression) return BaselineModel(kind, x.cols(), {stats::mean(y)});
  std::vector<double> priors(classCountOf(y), 0.0);
  for (double v : y) priors[static_cast<std::size_t>(v)] += 1.0;
  for (double& p : priors) p /= static_cast<double>(y.size());
  return BaselineModel(kind, x.cols(), std::move(priors));
}

LinearModel::LinearModel(TaskKind kind, double intercept, std::vector<double> weights)
    : kind_(kind), intercept_(intercept), weights_(std::move(weights)) {}

Matrix LinearModel::predictUnchecked(const Matrix& x) const {
  Matrix out(x.rows(), outputCount());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double z = intercept_;
    const auto row = x.row(r);
    for (std::size_t j = 0; j < weights_.size(); ++j) z += weights_[j] * row[j];
    if (kind_ == TaskKind::Regression) {
      out(r, 0) = z;
    } else {
      const double p = sigmoid(z);
      out(r, 0) = 1.0 - p;
      out(r, 1) = p;
    }
  }
  return out;
}

nlohmann::json LinearModel::toJson() const {
  return {{"type", typeName()},
          {"kind", taskKindName(kind_)},
          {"intercept", intercept_},
          {"weights", weights_},
          {"ridgeFallback", ridgeFallback}};
}

LinearModel LinearModel::fromJson(const nlohmann::json& j) {
  LinearModel m(parseTaskKind(j.at("kind").get<std::string>()), j.at("intercept").get<double>(),
                j.at("weights").get<std::vector<double>>());
  m.ridgeFallback = j.value("ridgeFallback", false);
  return m;
}

LinearModel fitLeastSquares(const Matrix& x, const std::vector<double>& y) {
  checkFitInputs(x, y);
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto p = static_cast<Eigen::Index>(x.cols());
  Eigen::MatrixXd design(n, p + 1);
  Eigen::VectorXd target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    design(r, 0) = 1.0;
    for (Eigen::Index c = 0; c < p; ++c) design(r, c + 1) = x(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    target(r) = y[static_cast<std::size_t>(r)];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  Eigen::VectorXd beta;
  bool fallback = false;
  if (qr.rank() == p + 1) {
    beta = qr.solve(target);
  } else {
    Eigen::MatrixXd gram = design.transpose() * design;
    for (Eigen::Index c = 1; c <= p; ++c) gram(c, c) += kRidgeFallback;
    gram(0, 0) += kRidgeFallback * 1e-6;
    beta = gram.ldlt().solve(design.transpose() * target);
    fallback = true;
    warn("least squares design is rank deficient; used ridge penalty 1e-8");
  }
  std::vector<double> weights(static_cast<std::size_t>(p));
  for (Eigen::Index c = 0; c < p; ++c) weights[static_cast<std::size_t>(c)] = beta(c + 1);
  LinearModel model(TaskKind::Regression, beta(0), std::move(weights));
  model.ridgeFallback = fallback;
  return model;
}

LinearModel fitLogistic(const Matrix& x, const std::vector<double>& y, const LogisticParams& params) {
  checkFitInputs(x, y);
  if (classCountOf(y) > 2) throw ConfigError("logistic regression supports two classes");
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  double b = 0.0;
  std::vector<double> w(p, 0.0);
  std::vector<double> grad(p);
  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    double gradB = 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      const auto row = x.row(r);
      double z = b;
      for (std::size_t j = 0; j < p; ++j) z += w[j] * row[j];
      const double err = sigmoid(z) - y[r];
      gradB += err;
      for (std::size_t j = 0; j < p; ++j) grad[j] += err * row[j];
    }
    const double scale = params.learningRate / static_cast<double>(n);
    b -= scale * gradB;
    for (std::size_t j = 0; j < p; ++j) w[j] -= scale * grad[j] + params.learningRate * params.l2 * w[j];
  }
  return LinearModel(TaskKind::Classification, b, std::move(w));
}

}  // namespace buyback::learn
