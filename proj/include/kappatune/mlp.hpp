#pragma once

#include <cstdint>
#include <vector>

#include "kappatune/data.hpp"
#include "kappatune/matrix.hpp"

namespace kappatune {

// Dense network parameters. weights[i] has shape
// (layer_sizes[i+1], layer_sizes[i]); biases[i] has layer_sizes[i+1] entries.
struct MlpParams {
  std::vector<std::size_t> layer_sizes;
  std::vector<Matrix2D> weights;
  std::vector<std::vector<double>> biases;
  std::uint64_t init_seed = 0;

  std::size_t num_layers() const { return weights.size(); }
};

// Mirrors MlpParams tensor-for-tensor.
struct GradientSet {
  std::vector<Matrix2D> weights;
  std::vector<std::vector<double>> biases;
};

struct Batch {
  Matrix2D inputs;  // batch_size x input_dim, features already in [-1, 1]
  std::vector<int> labels;
};

struct ForwardCache {
  std::vector<Matrix2D> activations;      // [0] = inputs, then post-ReLU outputs
  std::vector<Matrix2D> pre_activations;  // affine output of each layer
};

// Fan-in-scaled uniform weights (bound sqrt(6 / fan_in)), zero biases,
// deterministic in (layer_sizes, seed).
MlpParams init_mlp(const std::vector<std::size_t>& layer_sizes, std::uint64_t seed);

// Affine + ReLU for hidden layers, affine only for the output layer; softmax
// lives in the loss. cache may be null when no backward pass is needed.
Matrix2D forward(const MlpParams& params, const Batch& batch, ForwardCache* cache = nullptr);

struct LossAndGrad {
  double loss = 0.0;  // +infinity signals divergence; grads are zero then
  GradientSet grads;
};

// Mean softmax cross-entropy over the batch plus exact analytic gradients.
LossAndGrad loss_and_grad(const MlpParams& params, const Batch& batch);

struct EvalResult {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

// Forward-only, fixed order, no parameter mutation. Argmax ties break toward
// the smaller class index.
EvalResult evaluate(const MlpParams& params, const Matrix2D& inputs,
                    const std::vector<int>& labels);
EvalResult evaluate(const MlpParams& params, const Dataset& dataset);

GradientSet zeros_like(const MlpParams& params);
bool all_finite(const GradientSet& grads);

}  // namespace kappatune
