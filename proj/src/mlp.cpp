#include "kappatune/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kappatune/errors.hpp"
#include "kappatune/rng.hpp"

namespace kappatune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_layer_sizes(const std::vector<std::size_t>& layer_sizes) {
  if (layer_sizes.size() < 2) {
    throw ConfigError("init_mlp: need at least input and output layer sizes");
  }
  for (std::size_t s : layer_sizes) {
    if (s == 0) {
      throw ConfigError("init_mlp: layer sizes must be positive");
    }
  }
}

}  // namespace

MlpParams init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed) {
  check_layer_sizes(layer_sizes);
  MlpParams params;
  params.layer_sizes = layer_sizes;
  params.init_seed = seed;

  Rng rng(seed);
  for (std::size_t i = 0; i + 1 < layer_sizes.size(); ++i) {
    const std::size_t fan_in = layer_sizes[i];
    const std::size_t fan_out = layer_sizes[i + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    Matrix2D w(fan_out, fan_in);
    for (double& v : w.values) {
      v = rng.uniform(-bound, bound);
    }
    params.weights.push_back(std::move(w));
    params.biases.emplace_back(fan_out, 0.0);
  }
  return params;
}

GradientSet zeros_like(const MlpParams& params) {
  GradientSet g;
  g.weights.reserve(params.weights.size());
  g.biases.reserve(params.biases.size());
  for (const auto& w : params.weights) {
    g.weights.emplace_back(w.rows, w.cols);
  }
  for (const auto& b : params.biases) {
    g.biases.emplace_back(b.size(), 0.0);
  }
  return g;
}

bool all_finite(const GradientSet& grads) {
  for (const auto& w : grads.weights) {
    if (!all_finite(w)) {
      return false;
    }
  }
  for (const auto& b : grads.biases) {
    if (!all_finite(b)) {
      return false;
    }
  }
  return true;
}

Matrix2D forward(const MlpParams& params, const Batch& batch, ForwardCache* cache) {
  if (batch.inputs.cols != params.layer_sizes.front()) {
    throw ShapeError("forward: batch width " + std::to_string(batch.inputs.cols) +
                     " does not match input layer " + std::to_string(params.layer_sizes.front()));
  }
  if (batch.inputs.rows != batch.labels.size()) {
    throw ShapeError("forward: batch has " + std::to_string(batch.inputs.rows) + " rows but " +
                     std::to_string(batch.labels.size()) + " labels");
  }

  if (cache) {
    cache->activations.clear();
    cache->pre_activations.clear();
    cache->activations.push_back(batch.inputs);
  }

  Matrix2D current = batch.inputs;
  const std::size_t layers = params.num_layers();
  for (std::size_t i = 0; i < layers; ++i) {
    Matrix2D z = matmul_nt(current, params.weights[i]);
    const std::vector<double>& bias = params.biases[i];
    for (std::size_t r = 0; r < z.rows; ++r) {
      double* zr = z.row(r);
      for (std::size_t c = 0; c < z.cols; ++c) {
        zr[c] += bias[c];
      }
    }
    if (cache) {
      cache->pre_activations.push_back(z);
    }
    if (i + 1 < layers) {
      for (double& v : z.values) {
        v = v > 0.0 ? v : 0.0;  // ReLU
      }
      if (cache) {
        cache->activations.push_back(z);
      }
    }
    current = std::move(z);
  }
  return current;
}

LossAndGrad loss_and_grad(const MlpParams& params, const Batch& batch) {
  const std::size_t num_classes = params.layer_sizes.back();
  for (int label : batch.labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw DataError("loss_and_grad: label " + std::to_string(label) + " outside [0, " +
                      std::to_string(num_classes) + ")");
    }
  }

  ForwardCache cache;
  Matrix2D logits = forward(params, batch, &cache);

  LossAndGrad out;
  out.grads = zeros_like(params);
  if (!all_finite(logits)) {
    out.loss = kInf;
    return out;
  }

  const std::size_t batch_size = logits.rows;
  const double inv_batch = 1.0 / static_cast<double>(batch_size);

  // Softmax cross-entropy via log-sum-exp; delta = (softmax - onehot) / batch
  Matrix2D delta(logits.rows, logits.cols);
  double loss_sum = 0.0;
  for (std::size_t r = 0; r < batch_size; ++r) {
    const double* z = logits.row(r);
    double* d = delta.row(r);
    double max_z = z[0];
    for (std::size_t c = 1; c < logits.cols; ++c) {
      max_z = std::max(max_z, z[c]);
    }
    double sum_exp = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      sum_exp += std::exp(z[c] - max_z);
    }
    const double lse = max_z + std::log(sum_exp);
    loss_sum += lse - z[batch.labels[r]];
    for (std::size_t c = 0; c < logits.cols; ++c) {
      d[c] = std::exp(z[c] - lse) * inv_batch;
    }
    d[batch.labels[r]] -= inv_batch;
  }
  const double loss = loss_sum * inv_batch;
  if (!std::isfinite(loss)) {
    out.loss = kInf;
    out.grads = zeros_like(params);
    return out;
  }
  out.loss = loss;

  // Backward walk; ReLU gates use the cached pre-activations.
  const std::size_t layers = params.num_layers();
  Matrix2D dz = std::move(delta);
  for (std::size_t i = layers; i-- > 0;) {
    out.grads.weights[i] = matmul_tn(dz, cache.activations[i]);
    std::vector<double>& db = out.grads.biases[i];
    for (std::size_t r = 0; r < dz.rows; ++r) {
      const double* dr = dz.row(r);
      for (std::size_t c = 0; c < dz.cols; ++c) {
        db[c] += dr[c];
      }
    }
    if (i > 0) {
      Matrix2D da = matmul_nn(dz, params.weights[i]);
      const Matrix2D& pre = cache.pre_activations[i - 1];
      for (std::size_t k = 0; k < da.values.size(); ++k) {
        da.values[k] = pre.values[k] > 0.0 ? da.values[k] : 0.0;
      }
      dz = std::move(da);
    }
  }

  if (!all_finite(out.grads)) {
    out.loss = kInf;
    out.grads = zeros_like(params);
  }
  return out;
}

EvalResult evaluate(const MlpParams& params, const Matrix2D& inputs,
                    const std::vector<int>& labels) {
  if (inputs.rows == 0) {
    throw DataError("evaluate: empty dataset");
  }
  if (inputs.rows != labels.size()) {
    throw ShapeError("evaluate: input rows do not match label count");
  }

  Batch batch{inputs, labels};
  Matrix2D logits = forward(params, batch, nullptr);
  if (!all_finite(logits)) {
    return {kInf, 0.0};
  }

  double loss_sum = 0.0;
  std::size_t correct = 0;
  for (std::size_t r = 0; r < logits.rows; ++r) {
    const double* z = logits.row(r);
    double max_z = z[0];
    std::size_t arg = 0;
    for (std::size_t c = 1; c < logits.cols; ++c) {
      if (z[c] > max_z) {  // ties keep the smaller class index
        max_z = z[c];
        arg = c;
      }
    }
    double sum_exp = 0.0;
    for (std::size_t c = 0; c < logits.cols; ++c) {
      sum_exp += std::exp(z[c] - max_z);
    }
    loss_sum += max_z + std::log(sum_exp) - z[labels[r]];
    if (arg == static_cast<std::size_t>(labels[r])) {
      ++correct;
    }
  }
  const double n = static_cast<double>(logits.rows);
  return {loss_sum / n, static_cast<double>(correct) / n};
}

EvalResult evaluate(const MlpParams& params, const Dataset& dataset) {
  if (dataset.eval_size() == 0) {
    throw DataError("evaluate: dataset '" + dataset.name + "' has no eval split");
  }
  return evaluate(params, dataset.eval_inputs, dataset.eval_labels);
}

}  // namespace kappatune
