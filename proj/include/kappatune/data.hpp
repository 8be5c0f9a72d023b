#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kappatune/matrix.hpp"

namespace kappatune {

// Parsed IDX container: big-endian header (zero padding, type code 0x08,
// dimension count, dims), then the raw payload bytes.
struct IdxData {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> payload;
};

IdxData parse_idx(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> serialize_idx(const std::vector<std::uint32_t>& dims,
                                        const std::vector<std::uint8_t>& payload);

// v / 127.5 - 1, exactly; maps 0 -> -1 and 255 -> +1
double normalize_pixel(std::uint8_t v);
std::vector<double> normalize(const std::vector<std::uint8_t>& raw);

struct Dataset {
  std::string name;
  Matrix2D train_inputs;  // train_size x feature_dim, values in [-1, 1]
  std::vector<int> train_labels;
  Matrix2D eval_inputs;  // held-out split, never trained on
  std::vector<int> eval_labels;
  std::size_t num_classes = 0;
  std::size_t feature_dim = 0;

  std::size_t train_size() const { return train_inputs.rows; }
  std::size_t eval_size() const { return eval_inputs.rows; }

  // Enforces the bounds, label-range and shape invariants; throws DataError.
  void validate() const;
};

struct SyntheticSpec {
  std::size_t num_classes = 4;
  std::size_t per_class_count = 640;
  std::size_t feature_dim = 16;
  // Defaults are tuned so the task is learnable but noise-limited: optima sit
  // inside the default sweep window and scale inversely with total data
  // rather than pinning to a stability ceiling.
  double cluster_separation = 0.7;
  double noise_scale = 0.8;
  std::uint64_t seed = 9201;
};

// Gaussian clusters around per-class means, clamped to [-1, 1], deterministic
// in the spec. Every 5th example goes to the eval split; examples cycle
// through classes so both splits stay class-balanced.
Dataset generate_synthetic(const SyntheticSpec& spec);

// First n training examples in stored order; eval split untouched.
Dataset take_subset(const Dataset& dataset, std::size_t n);

// Reads the four standard IDX files from dir. Throws DataError naming the
// missing files; no downloading happens here.
Dataset load_mnist(const std::string& dir);

std::string mnist_fetch_instructions(const std::string& dir);

}  // namespace kappatune
