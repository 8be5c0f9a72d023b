#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace kappatune {

enum class ShapeKind {
  kConstant,        // m(e) = 1
  kHalvingDecay,    // m(e) = 2^-e
  kCyclicalTriple,  // m(e) = 1 for even e, 3 for odd e (0-based)
  kCustom,          // explicit per-epoch multiplier list, m(0) must be 1
};

const char* shape_kind_name(ShapeKind kind);
ShapeKind shape_kind_from_name(const std::string& name);

// Per-epoch multiplier sequence m(e) with m(0) = 1, so eta0 is always the
// epoch-0 learning rate.
struct ScheduleShape {
  ShapeKind kind = ShapeKind::kConstant;
  std::vector<double> multipliers;  // kCustom only

  static ScheduleShape constant();
  static ScheduleShape halving_decay();
  static ScheduleShape cyclical_triple();
  // Validates m(0) == 1 and m(e) >= 0 for all entries.
  static ScheduleShape custom(std::vector<double> multipliers);

  // m(epoch); throws DomainError when a custom list does not cover epoch.
  double multiplier(int epoch) const;
};

// sum_{e=0}^{epochs-1} m(e)
double multiplier_sum(const ScheduleShape& shape, int epochs);

// eta(x) = eta0 * m(floor(x / epoch_size)) for x in [0, epoch_size * epochs),
// piecewise constant per epoch; x counts training examples seen.
struct Schedule {
  double eta0 = 0.0;
  ScheduleShape shape;
  std::size_t epoch_size = 0;  // N, examples per epoch
  int epochs = 0;              // E

  std::uint64_t total_data() const {
    return static_cast<std::uint64_t>(epoch_size) * static_cast<std::uint64_t>(epochs);
  }

  // Throws ConfigError when eta0 <= 0, epoch_size < 1, epochs < 1, or a
  // custom multiplier list does not cover every epoch.
  void validate() const;
};

double eta_at(const Schedule& schedule, std::uint64_t x);

struct KappaValue {
  double kappa = 0.0;            // learning-rate x examples
  std::uint64_t total_data = 0;  // D = N * E
  std::string source;            // "analytic" or "numeric"
};

// kappa = eta0 * N * sum m(e), exact closed form.
KappaValue kappa_analytic(const Schedule& schedule);

// Riemann sum over optimizer steps of step_size examples each; exact when
// epoch_size is a multiple of step_size.
KappaValue kappa_numeric(const Schedule& schedule, std::size_t step_size);

// eta0 = kappa / (N * sum m(e)); kappa is linear in eta0 at fixed shape, so
// the inversion is exact.
double solve_eta0(double kappa, const ScheduleShape& shape, std::size_t epoch_size, int epochs);
double solve_eta0(const KappaValue& kappa, const ScheduleShape& shape, std::size_t epoch_size,
                  int epochs);

}  // namespace kappatune
