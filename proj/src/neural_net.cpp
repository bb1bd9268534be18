#include "buyback/neural_net.hpp"

#include <cmath>

namespace buyback::learn {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// Pre-activations per layer for one input row; layer 0 holds the input.
void forward(const std::vector<std::size_t>& layers, const std::vector<double>& params, std::span<const double> row,
             std::vector<std::vector<double>>& pre, std::vector<std::vector<double>>& act) {
  const std::size_t depth = layers.size();
  pre.resize(depth);
  act.resize(depth);
  act[0].assign(row.begin(), row.end());
  pre[0] = act[0];
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    const std::size_t in = layers[l];
    const std::size_t out = layers[l + 1];
    const double* w = params.data() + offset;
    const double* b = w + in * out;
    pre[l + 1].assign(out, 0.0);
    act[l + 1].assign(out, 0.0);
    const bool last = l + 2 == depth;
    for (std::size_t o = 0; o < out; ++o) {
      double z = b[o];
      for (std::size_t i = 0; i < in; ++i) z += w[o * in + i] * act[l][i];
      pre[l + 1][o] = z;
      act[l + 1][o] = last ? z : std::max(0.0, z);
    }
    offset += in * out + out;
  }
}

}  // namespace

std::size_t NeuralNet::parameterCount(const std::vector<std::size_t>& layers) {
  std::size_t n = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) n += layers[l] * layers[l + 1] + layers[l + 1];
  return n;
}

NeuralNet::NeuralNet(TaskKind kind, std::vector<std::size_t> layerSizes, std::vector<double> parameters)
    : kind_(kind), layers_(std::move(layerSizes)), params_(std::move(parameters)) {
  if (layers_.size() < 2 || layers_.back() != 1) throw DataError("neural net needs input and single-output layers");
  if (params_.size() != parameterCount(layers_)) throw DataError("neural net parameter count mismatch");
}

double NeuralNet::lossAndGradient(TaskKind kind, const std::vector<std::size_t>& layers,
                                  const std::vector<double>& parameters, const Matrix& x, const std::vector<double>& y,
                                  std::span<const std::size_t> rows, std::vector<double>* gradient) {
  if (rows.empty()) throw DataError("lossAndGradient: no rows");
  if (gradient) gradient->assign(parameters.size(), 0.0);
  const std::size_t depth = layers.size();
  const double invN = 1.0 / static_cast<double>(rows.size());
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
  std::vector<std::size_t> offsets(depth, 0);
  for (std::size_t l = 0; l + 1 < depth; ++l) offsets[l + 1] = offsets[l] + layers[l] * layers[l + 1] + layers[l + 1];

  double total = 0.0;
  std::vector<double> delta;
  std::vector<double> below;
  for (std::size_t r : rows) {
    forward(layers, parameters, x.row(r), pre, act);
    const double z = pre.back()[0];
    double dz = 0.0;
    if (kind == TaskKind::Regression) {
      total += (z - y[r]) * (z - y[r]);
      dz = 2.0 * (z - y[r]);
    } else {
      total += softplus(z) - y[r] * z;
      dz = sigmoid(z) - y[r];
    }
    if (!gradient) continue;
    delta.assign(1, dz * invN);
    for (std::size_t l = depth - 1; l >= 1; --l) {
      const std::size_t in = layers[l - 1];
      const std::size_t out = layers[l];
      double* gw = gradient->data() + offsets[l - 1];
      double* gb = gw + in * out;
      const double* w = parameters.data() + offsets[l - 1];
      for (std::size_t o = 0; o < out; ++o) {
        gb[o] += delta[o];
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] += delta[o] * act[l - 1][i];
      }
      if (l == 1) break;
      below.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        if (!(pre[l - 1][i] > 0.0)) continue;
        double s = 0.0;
        for (std::size_t o = 0; o < out; ++o) s += w[o * in + i] * delta[o];
        below[i] = s;
      }
      delta.swap(below);
    }
  }
  return total * invN;
}

Matrix NeuralNet::predictUnchecked(const Matrix& x) const {
  Matrix out(x.rows(), outputCount());
  std::vector<std::vector<double>> pre;
  std::vector<std::vector<double>> act;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    forward(layers_, params_, x.row(r), pre, act);
    const double z = pre.back()[0];
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

nlohmann::json NeuralNet::toJson() const {
  return {{"type", typeName()}, {"kind", taskKindName(kind_)}, {"layers", layers_}, {"parameters", params_}};
}

NeuralNet NeuralNet::fromJson(const nlohmann::json& j) {
  return NeuralNet(parseTaskKind(j.at("kind").get<std::string>()), j.at("layers").get<std::vector<std::size_t>>(),
                   j.at("parameters").get<std::vector<double>>());
}

std::vector<double> initialParameters(const std::vector<std::size_t>& layers, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> params;
  params.reserve(NeuralNet::parameterCount(layers));
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(layers[l], 1)));
    for (std::size_t k = 0; k < layers[l] * layers[l + 1]; ++k) params.push_back(rng.uniform(-limit, limit));
    for (std::size_t k = 0; k < layers[l + 1]; ++k) params.push_back(0.0);
  }
  return params;
}

NeuralNet fitNeuralNet(const Matrix& x, const std::vector<double>& y, TaskKind kind, const NetParams& params,
                       const FitControl& control) {
  if (params.hiddenSizes.empty()) throw ConfigError("neural net needs at least one hidden layer");
  if (x.rows() == 0 || x.rows() != y.size()) throw DataError("fitNeuralNet: empty input or row mismatch");
  if (kind == TaskKind::Classification && classCountOf(y) > 2) {
    throw ConfigError("neural net classification supports two classes");
  }
  for (std::size_t h : params.hiddenSizes) {
    if (h == 0) throw ConfigError("hidden layer size must be positive");
  }
  std::vector<std::size_t> layers{x.cols()};
  layers.insert(layers.end(), params.hiddenSizes.begin(), params.hiddenSizes.end());
  layers.push_back(1);

  std::vector<double> theta = initialParameters(layers, deriveSeed(params.seed, 0));
  std::vector<double> velocity(theta.size(), 0.0);
  std::vector<double> grad;
  Rng rng(deriveSeed(params.seed, 1));
  std::vector<std::size_t> order = iota(x.rows());
  const std::size_t batch = std::max<std::size_t>(params.batchSize, 1);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    if (control.expired()) break;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const double loss = NeuralNet::lossAndGradient(kind, layers, theta, x, y, rows, &grad);
      if (!std::isfinite(loss)) {
        throw DomainError("neural net loss became non-finite at epoch " + std::to_string(epoch) +
                          " (learning rate " + std::to_string(params.learningRate) + ")");
      }
      for (std::size_t k = 0; k < theta.size(); ++k) {
        velocity[k] = params.momentum * velocity[k] - params.learningRate * grad[k];
        theta[k] += velocity[k];
      }
    }
  }
  return NeuralNet(kind, std::move(layers), std::move(theta));
}

}  // namespace buyback::learn
