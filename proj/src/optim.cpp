#include "kappatune/optim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kappatune/errors.hpp"

namespace kappatune {

namespace {

void check_eta(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("optimizer step: eta must be positive and finite, got " +
                      std::to_string(eta));
  }
}

void check_shapes(const MlpParams& params, const GradientSet& grads) {
  if (params.weights.size() != grads.weights.size() ||
      params.biases.size() != grads.biases.size()) {
    throw ShapeError("optimizer step: gradient layer count does not match parameters");
  }
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    if (!params.weights[i].same_shape(grads.weights[i]) ||
        params.biases[i].size() != grads.biases[i].size()) {
      throw ShapeError("optimizer step: gradient shape mismatch at layer " + std::to_string(i));
    }
  }
}

}  // namespace

bool sgd_step(MlpParams& params, const GradientSet& grads, double eta) {
  check_eta(eta);
  check_shapes(params, grads);
  if (!all_finite(grads)) {
    return false;
  }
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    double* w = params.weights[i].values.data();
    const double* g = grads.weights[i].values.data();
    const std::size_t n = params.weights[i].values.size();
    for (std::size_t k = 0; k < n; ++k) {
      w[k] -= eta * g[k];
    }
    for (std::size_t k = 0; k < params.biases[i].size(); ++k) {
      params.biases[i][k] -= eta * grads.biases[i][k];
    }
  }
  return true;
}

AdamState AdamState::init(const MlpParams& params, const AdamConfig& cfg) {
  if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0) || !(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) {
    throw ConfigError("adam: beta1 and beta2 must lie in [0, 1)");
  }
  if (!(cfg.epsilon > 0.0)) {
    throw ConfigError("adam: epsilon must be positive");
  }
  AdamState state;
  state.m = zeros_like(params);
  state.v = zeros_like(params);
  state.t = 0;
  state.beta1 = cfg.beta1;
  state.beta2 = cfg.beta2;
  state.epsilon = cfg.epsilon;
  return state;
}

bool adam_step(MlpParams& params, AdamState& state, const GradientSet& grads, double eta) {
  check_eta(eta);
  check_shapes(params, grads);
  check_shapes(params, state.m);
  check_shapes(params, state.v);
  if (!all_finite(grads)) {
    return false;
  }

  state.t += 1;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double corr1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
  const double corr2 = 1.0 - std::pow(b2, static_cast<double>(state.t));

  auto update = [&](double* p, double* m, double* v, const double* g, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = b1 * m[k] + (1.0 - b1) * g[k];
      v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
      const double m_hat = m[k] / corr1;
      const double v_hat = v[k] / corr2;
      p[k] -= eta * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };

  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    update(params.weights[i].values.data(), state.m.weights[i].values.data(),
           state.v.weights[i].values.data(), grads.weights[i].values.data(),
           params.weights[i].values.size());
    update(params.biases[i].data(), state.m.biases[i].data(), state.v.biases[i].data(),
           grads.biases[i].data(), params.biases[i].size());
  }
  return true;
}

double QuadraticProblem::smoothness() const {
  double l = 0.0;
  for (double lam : curvature) {
    l = std::max(l, lam);
  }
  return l;
}

double QuadraticProblem::value(const std::vector<double>& x) const {
  double f = 0.0;
  for (std::size_t i = 0; i < curvature.size(); ++i) {
    f += 0.5 * curvature[i] * x[i] * x[i];
  }
  return f;
}

std::vector<double> QuadraticProblem::gradient(const std::vector<double>& x) const {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < curvature.size(); ++i) {
    g[i] = curvature[i] * x[i];
  }
  return g;
}

DescentReport check_descent_lemma(const QuadraticProblem& problem, double eta, int steps) {
  check_eta(eta);
  if (problem.curvature.empty() || problem.curvature.size() != problem.point.size()) {
    throw ConfigError("descent lemma: curvature and point must be non-empty and equal-sized");
  }
  for (double lam : problem.curvature) {
    if (!(lam > 0.0)) {
      throw ConfigError("descent lemma: eigenvalues must be positive");
    }
  }

  const double smooth = problem.smoothness();
  DescentReport report;
  std::vector<double> x = problem.point;
  for (int t = 0; t < steps; ++t) {
    const double f_before = problem.value(x);
    const std::vector<double> g = problem.gradient(x);
    double g_sq = 0.0;
    for (double v : g) {
      g_sq += v * v;
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] -= eta * g[i];
    }
    const double f_after = problem.value(x);

    DescentStep step;
    step.f_before = f_before;
    step.f_after = f_after;
    step.grad_norm_sq = g_sq;
    step.bound = f_before - eta * g_sq + 0.5 * smooth * eta * eta * g_sq;
    step.margin = step.bound - f_after;
    // rounding slack only; the bound itself is exact for quadratics
    const double tol = 1e-12 * std::max(1.0, std::abs(f_before));
    step.satisfied = f_after <= step.bound + tol;

    report.all_satisfied = report.all_satisfied && step.satisfied;
    report.loss_non_increasing = report.loss_non_increasing && f_after <= f_before + tol;
    report.steps.push_back(step);
  }
  return report;
}

}  // namespace kappatune
