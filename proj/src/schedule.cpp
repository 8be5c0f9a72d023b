#include "kappatune/schedule.hpp"

#include <cmath>

#include "kappatune/errors.hpp"

namespace kappatune {

const char* shape_kind_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::kConstant:
      return "constant";
    case ShapeKind::kHalvingDecay:
      return "halving_decay";
    case ShapeKind::kCyclicalTriple:
      return "cyclical_triple";
    case ShapeKind::kCustom:
      return "custom";
  }
  return "unknown";
}

ShapeKind shape_kind_from_name(const std::string& name) {
  if (name == "constant") {
    return ShapeKind::kConstant;
  }
  if (name == "halving_decay") {
    return ShapeKind::kHalvingDecay;
  }
  if (name == "cyclical_triple") {
    return ShapeKind::kCyclicalTriple;
  }
  if (name == "custom") {
    return ShapeKind::kCustom;
  }
  throw ConfigError("unknown schedule kind '" + name +
                    "'; expected constant, halving_decay, cyclical_triple or custom");
}

ScheduleShape ScheduleShape::constant() { return {ShapeKind::kConstant, {}}; }

ScheduleShape ScheduleShape::halving_decay() { return {ShapeKind::kHalvingDecay, {}}; }

ScheduleShape ScheduleShape::cyclical_triple() { return {ShapeKind::kCyclicalTriple, {}}; }

ScheduleShape ScheduleShape::custom(std::vector<double> multipliers) {
  if (multipliers.empty()) {
    throw ConfigError("custom schedule shape: multiplier list is empty");
  }
  if (multipliers[0] != 1.0) {
    throw ConfigError("custom schedule shape: m(0) must be 1 so eta0 is the epoch-0 rate");
  }
  for (double m : multipliers) {
    if (!(m >= 0.0) || !std::isfinite(m)) {
      throw ConfigError("custom schedule shape: multipliers must be finite and >= 0");
    }
  }
  return {ShapeKind::kCustom, std::move(multipliers)};
}

double ScheduleShape::multiplier(int epoch) const {
  if (epoch < 0) {
    throw DomainError("schedule shape: negative epoch index");
  }
  switch (kind) {
    case ShapeKind::kConstant:
      return 1.0;
    case ShapeKind::kHalvingDecay:
      return std::ldexp(1.0, -epoch);  // 2^-epoch, exact
    case ShapeKind::kCyclicalTriple:
      return epoch % 2 == 0 ? 1.0 : 3.0;
    case ShapeKind::kCustom:
      if (static_cast<std::size_t>(epoch) >= multipliers.size()) {
        throw DomainError("custom schedule shape: epoch " + std::to_string(epoch) +
                          " beyond the " + std::to_string(multipliers.size()) +
                          "-entry multiplier list");
      }
      return multipliers[static_cast<std::size_t>(epoch)];
  }
  throw DomainError("schedule shape: invalid kind");
}

double multiplier_sum(const ScheduleShape& shape, int epochs) {
  if (epochs < 1) {
    throw ConfigError("multiplier_sum: epochs must be >= 1");
  }
  double sum = 0.0;
  for (int e = 0; e < epochs; ++e) {
    sum += shape.multiplier(e);
  }
  return sum;
}

void Schedule::validate() const {
  if (!(eta0 > 0.0) || !std::isfinite(eta0)) {
    throw ConfigError("schedule: eta0 must be positive and finite");
  }
  if (epoch_size < 1) {
    throw ConfigError("schedule: epoch_size must be >= 1");
  }
  if (epochs < 1) {
    throw ConfigError("schedule: epochs must be >= 1");
  }
  if (shape.kind == ShapeKind::kCustom &&
      shape.multipliers.size() < static_cast<std::size_t>(epochs)) {
    throw ConfigError("schedule: custom multiplier list covers " +
                      std::to_string(shape.multipliers.size()) + " epoch(s), run has " +
                      std::to_string(epochs));
  }
}

double eta_at(const Schedule& schedule, std::uint64_t x) {
  schedule.validate();
  if (x >= schedule.total_data()) {
    throw DomainError("eta_at: x = " + std::to_string(x) + " outside [0, " +
                      std::to_string(schedule.total_data()) + ")");
  }
  const int epoch = static_cast<int>(x / schedule.epoch_size);
  return schedule.eta0 * schedule.shape.multiplier(epoch);
}

KappaValue kappa_analytic(const Schedule& schedule) {
  schedule.validate();
  const double sum = multiplier_sum(schedule.shape, schedule.epochs);
  KappaValue out;
  out.kappa = schedule.eta0 * static_cast<double>(schedule.epoch_size) * sum;
  out.total_data = schedule.total_data();
  out.source = "analytic";
  return out;
}

KappaValue kappa_numeric(const Schedule& schedule, std::size_t step_size) {
  schedule.validate();
  if (step_size < 1) {
    throw ConfigError("kappa_numeric: step_size must be >= 1");
  }
  const std::uint64_t total = schedule.total_data();
  double kappa = 0.0;
  for (std::uint64_t x = 0; x < total; x += step_size) {
    kappa += eta_at(schedule, x) * static_cast<double>(step_size);
  }
  KappaValue out;
  out.kappa = kappa;
  out.total_data = total;
  out.source = "numeric";
  return out;
}

double solve_eta0(double kappa, const ScheduleShape& shape, std::size_t epoch_size, int epochs) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ConfigError("solve_eta0: kappa must be positive and finite");
  }
  if (epoch_size < 1) {
    throw ConfigError("solve_eta0: epoch_size must be >= 1");
  }
  const double sum = multiplier_sum(shape, epochs);
  if (!(sum > 0.0)) {
    throw ConfigError("solve_eta0: schedule shape sums to zero over " + std::to_string(epochs) +
                      " epochs; eta0 is undefined");
  }
  return kappa / (static_cast<double>(epoch_size) * sum);
}

double solve_eta0(const KappaValue& kappa, const ScheduleShape& shape, std::size_t epoch_size,
                  int epochs) {
  return solve_eta0(kappa.kappa, shape, epoch_size, epochs);
}

}  // namespace kappatune
