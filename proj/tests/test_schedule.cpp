#include <cmath>
#include <vector>

#include "doctest.h"

#include "kappatune/errors.hpp"
#include "kappatune/rng.hpp"
#include "kappatune/schedule.hpp"

using namespace kappatune;

TEST_CASE("shape kind names round-trip; unknown names are rejected") {
  for (ShapeKind kind : {ShapeKind::kConstant, ShapeKind::kHalvingDecay,
                         ShapeKind::kCyclicalTriple, ShapeKind::kCustom}) {
    CHECK(shape_kind_from_name(shape_kind_name(kind)) == kind);
  }
  CHECK_THROWS_AS(shape_kind_from_name("cosine"), ConfigError);
}

TEST_CASE("built-in multiplier sequences") {
  const ScheduleShape constant = ScheduleShape::constant();
  const ScheduleShape halving = ScheduleShape::halving_decay();
  const ScheduleShape cyclical = ScheduleShape::cyclical_triple();
  for (int e = 0; e < 8; ++e) {
    CHECK(constant.multiplier(e) == 1.0);
    CHECK(halving.multiplier(e) == std::ldexp(1.0, -e));
    CHECK(cyclical.multiplier(e) == (e % 2 == 0 ? 1.0 : 3.0));
  }
  // m(0) = 1 for every kind
  CHECK(constant.multiplier(0) == 1.0);
  CHECK(halving.multiplier(0) == 1.0);
  CHECK(cyclical.multiplier(0) == 1.0);
}

TEST_CASE("custom shapes validate their multiplier lists") {
  const ScheduleShape ok = ScheduleShape::custom({1.0, 0.5, 2.0});
  CHECK(ok.multiplier(2) == 2.0);
  CHECK_THROWS_AS(ok.multiplier(3), DomainError);  // beyond the list
  CHECK_THROWS_AS(ScheduleShape::custom({0.9, 1.0}), ConfigError);  // m(0) != 1
  CHECK_THROWS_AS(ScheduleShape::custom({1.0, -0.5}), ConfigError);
  CHECK_THROWS_AS(ScheduleShape::custom({}), ConfigError);
}

TEST_CASE("schedule validation") {
  Schedule s{0.01, ScheduleShape::constant(), 100, 4};
  CHECK_NOTHROW(s.validate());
  CHECK(s.total_data() == 400);

  CHECK_THROWS_AS((Schedule{0.0, ScheduleShape::constant(), 100, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((Schedule{0.01, ScheduleShape::constant(), 0, 4}.validate()), ConfigError);
  CHECK_THROWS_AS((Schedule{0.01, ScheduleShape::constant(), 100, 0}.validate()), ConfigError);
  // custom list shorter than the epoch count
  CHECK_THROWS_AS((Schedule{0.01, ScheduleShape::custom({1.0, 0.5}), 100, 3}.validate()),
                  ConfigError);
}

TEST_CASE("eta_at evaluates the piecewise-constant schedule") {
  const Schedule halving{0.00275, ScheduleShape::halving_decay(), 30000, 13};
  CHECK(eta_at(halving, 45000) == doctest::Approx(0.001375).epsilon(1e-15));  // epoch 1
  CHECK(eta_at(halving, 0) == 0.00275);
  CHECK(eta_at(halving, 29999) == 0.00275);  // still epoch 0

  const Schedule constant{0.042, ScheduleShape::constant(), 1000, 3};
  CHECK(eta_at(constant, 0) == 0.042);
  CHECK(eta_at(constant, 2999) == 0.042);

  const Schedule cyclical{0.001, ScheduleShape::cyclical_triple(), 100, 4};
  CHECK(eta_at(cyclical, 150) == doctest::Approx(0.003).epsilon(1e-15));  // epoch 1 -> m=3

  CHECK_THROWS_AS(eta_at(constant, 3000), DomainError);  // x = N*E is out of range
}

TEST_CASE("kappa_analytic reproduces the published worked examples") {
  // constant: 0.000423 * 30000 * 13 ~ 164.97
  const Schedule constant{0.000423, ScheduleShape::constant(), 30000, 13};
  const KappaValue k1 = kappa_analytic(constant);
  CHECK(k1.kappa == doctest::Approx(164.97).epsilon(1e-10));
  CHECK(std::abs(k1.kappa - 165.0) < 0.5);
  CHECK(k1.total_data == 390000);

  // halving: 0.00275 * 30000 * (2 - 2^-12) ~ 164.98
  const Schedule halving{0.00275, ScheduleShape::halving_decay(), 30000, 13};
  const KappaValue k2 = kappa_analytic(halving);
  CHECK(k2.kappa == doctest::Approx(0.00275 * 30000 * (2.0 - std::ldexp(1.0, -12))).epsilon(1e-12));
  CHECK(std::abs(k2.kappa - 165.0) < 0.5);

  // cyclical: 1 * 10 * (1+3+1+3) = 80
  const Schedule cyclical{1.0, ScheduleShape::cyclical_triple(), 10, 4};
  CHECK(kappa_analytic(cyclical).kappa == 80.0);
}

TEST_CASE("kappa_numeric agrees with the closed form") {
  // step size dividing N: exact
  const Schedule constant{0.01, ScheduleShape::constant(), 1000, 3};
  CHECK(kappa_numeric(constant, 100).kappa == kappa_analytic(constant).kappa);

  const Schedule halving{0.00275, ScheduleShape::halving_decay(), 30000, 13};
  CHECK(kappa_numeric(halving, 1).kappa ==
        doctest::Approx(kappa_analytic(halving).kappa).epsilon(1e-12));

  // non-dividing batch overshoots a little, within 1% relative
  const double numeric = kappa_numeric(halving, 64).kappa;
  const double analytic = kappa_analytic(halving).kappa;
  CHECK(std::abs(numeric - analytic) / analytic < 1e-2);

  // E=1: kappa = eta0 * N for every shape, m(0) = 1
  for (const ScheduleShape& shape : {ScheduleShape::constant(), ScheduleShape::halving_decay(),
                                     ScheduleShape::cyclical_triple()}) {
    const Schedule one{0.5, shape, 256, 1};
    CHECK(kappa_analytic(one).kappa == 128.0);
    CHECK(kappa_numeric(one, 64).kappa == 128.0);
  }
}

TEST_CASE("solve_eta0 reproduces the published inversions") {
  CHECK(std::abs(solve_eta0(165.0, ScheduleShape::halving_decay(), 30000, 13) - 0.00275) < 2e-5);
  CHECK(std::abs(solve_eta0(165.0, ScheduleShape::halving_decay(), 30000, 5) - 0.00284) < 2e-5);
  CHECK(std::abs(solve_eta0(165.0, ScheduleShape::constant(), 30000, 13) - 0.000423) < 1e-6);
  // E=5 halving closed form: 165 / (30000 * 1.9375)
  CHECK(solve_eta0(165.0, ScheduleShape::halving_decay(), 30000, 5) ==
        doctest::Approx(165.0 / (30000 * 1.9375)).epsilon(1e-15));
}

TEST_CASE("solve_eta0 guards its domain") {
  CHECK_THROWS_AS(solve_eta0(0.0, ScheduleShape::constant(), 100, 2), ConfigError);
  CHECK_THROWS_AS(solve_eta0(-1.0, ScheduleShape::constant(), 100, 2), ConfigError);
  CHECK_THROWS_AS(solve_eta0(1.0, ScheduleShape::constant(), 0, 2), ConfigError);
  CHECK_THROWS_AS(solve_eta0(1.0, ScheduleShape::constant(), 100, 0), ConfigError);

  // an all-zero multiplier sum is singular; constructed directly because the
  // custom() factory already rejects such lists
  ScheduleShape degenerate;
  degenerate.kind = ShapeKind::kCustom;
  degenerate.multipliers = {0.0, 0.0};
  CHECK_THROWS_AS(solve_eta0(1.0, degenerate, 100, 2), ConfigError);
}

TEST_CASE("round-trip: solve_eta0 inverts kappa_analytic across random schedules") {
  Rng rng(73);
  for (int trial = 0; trial < 1000; ++trial) {
    ScheduleShape shape;
    switch (rng.bounded(4)) {
      case 0:
        shape = ScheduleShape::constant();
        break;
      case 1:
        shape = ScheduleShape::halving_decay();
        break;
      case 2:
        shape = ScheduleShape::cyclical_triple();
        break;
      default: {
        std::vector<double> mult = {1.0};
        const int extra = static_cast<int>(rng.bounded(12));
        for (int i = 0; i < extra; ++i) {
          mult.push_back(rng.uniform(0.0, 4.0));
        }
        shape = ScheduleShape::custom(mult);
        break;
      }
    }
    const int max_epochs =
        shape.kind == ShapeKind::kCustom ? static_cast<int>(shape.multipliers.size()) : 40;
    const int epochs = 1 + static_cast<int>(rng.bounded(static_cast<std::uint64_t>(max_epochs)));
    const std::size_t n = 1 + rng.bounded(100000);
    const double eta0 = std::pow(10.0, rng.uniform(-6.0, 0.5));

    const Schedule schedule{eta0, shape, n, epochs};
    const double recovered = solve_eta0(kappa_analytic(schedule), shape, n, epochs);
    CHECK(std::abs(recovered - eta0) / eta0 < 1e-12);
  }
}

TEST_CASE("kappa is linear in eta0 and N; constant shape doubles with E") {
  const Schedule base{0.02, ScheduleShape::halving_decay(), 500, 6};
  const Schedule eta_scaled{0.04, ScheduleShape::halving_decay(), 500, 6};
  const Schedule n_scaled{0.02, ScheduleShape::halving_decay(), 1500, 6};
  CHECK(kappa_analytic(eta_scaled).kappa == doctest::Approx(2 * kappa_analytic(base).kappa));
  CHECK(kappa_analytic(n_scaled).kappa == doctest::Approx(3 * kappa_analytic(base).kappa));

  const Schedule const_e{0.02, ScheduleShape::constant(), 500, 6};
  const Schedule const_2e{0.02, ScheduleShape::constant(), 500, 12};
  CHECK(kappa_analytic(const_2e).kappa == doctest::Approx(2 * kappa_analytic(const_e).kappa));
}

TEST_CASE("halving-decay sum matches its closed form up to E = 64") {
  for (int epochs = 1; epochs <= 64; ++epochs) {
    double explicit_sum = 0.0;
    for (int e = 0; e < epochs; ++e) {
      explicit_sum += std::ldexp(1.0, -e);
    }
    const double closed = 2.0 - std::ldexp(1.0, 1 - epochs);
    CHECK(multiplier_sum(ScheduleShape::halving_decay(), epochs) ==
          doctest::Approx(explicit_sum).epsilon(1e-15));
    CHECK(explicit_sum == doctest::Approx(closed).epsilon(1e-15));
  }
}

TEST_CASE("constant-schedule identity: kappa = eta * D exactly") {
  const Schedule s{0.000423, ScheduleShape::constant(), 30000, 13};
  CHECK(kappa_analytic(s).kappa ==
        doctest::Approx(0.000423 * static_cast<double>(s.total_data())).epsilon(1e-15));
}
