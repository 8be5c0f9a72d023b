#pragma once

#include <cstdint>
#include <vector>

#include "kappatune/mlp.hpp"

namespace kappatune {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Explicit optimizer state, one per training run. m and v mirror the
// parameter shapes; t counts applied updates.
struct AdamState {
  GradientSet m;
  GradientSet v;
  std::int64_t t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState init(const MlpParams& params, const AdamConfig& cfg = {});
};

// p <- p - eta * g, elementwise. Returns false and leaves params untouched
// when grads contain a non-finite entry (divergence signal, not an error).
bool sgd_step(MlpParams& params, const GradientSet& grads, double eta);

// Standard Adam with bias correction. Same divergence contract as sgd_step.
bool adam_step(MlpParams& params, AdamState& state, const GradientSet& grads, double eta);

// f(x) = 1/2 sum lambda_i x_i^2; smoothness constant L = max lambda_i.
struct QuadraticProblem {
  std::vector<double> curvature;  // lambda_i > 0
  std::vector<double> point;      // x_0

  double smoothness() const;
  double value(const std::vector<double>& x) const;
  std::vector<double> gradient(const std::vector<double>& x) const;
};

struct DescentStep {
  double f_before = 0.0;
  double f_after = 0.0;
  double grad_norm_sq = 0.0;
  double bound = 0.0;   // f_before - eta*|g|^2 + (L/2)*eta^2*|g|^2
  double margin = 0.0;  // bound - f_after
  bool satisfied = false;
};

struct DescentReport {
  std::vector<DescentStep> steps;
  bool all_satisfied = true;
  bool loss_non_increasing = true;
};

// Full-batch gradient descent on the quadratic, checking the smooth-descent
// bound f(x_{t+1}) <= f(x_t) - eta*|g|^2 + (L/2)*eta^2*|g|^2 at every step.
DescentReport check_descent_lemma(const QuadraticProblem& problem, double eta, int steps);

}  // namespace kappatune
