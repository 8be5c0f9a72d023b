#pragma once

// Declarative run configuration. Every field has a default, unknown keys are
// rejected (typo safety), and the fully-resolved form is echoed into each
// output artifact so any CSV can be reproduced from its sidecar alone.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "kappatune/data.hpp"
#include "kappatune/schedule.hpp"
#include "kappatune/tuner.hpp"

namespace kappatune {

struct DatasetConfig {
  std::string kind = "synthetic";  // "synthetic" | "mnist"
  std::string path;                // mnist directory; KAPPATUNE_DATA_DIR overrides when empty
  std::size_t train_size = 0;      // 0 = use the full train split

  // synthetic generator knobs (ignored for mnist); defaults mirror
  // SyntheticSpec
  int num_classes = 4;
  std::size_t per_class = 640;
  std::size_t feature_dim = 16;
  double separation = 0.7;
  double noise = 0.8;
  std::uint64_t seed = 9201;
};

struct ModelConfig {
  // empty = pick per dataset kind: synthetic -> [dim, 32, classes],
  // mnist -> [784, 256, 10]
  std::vector<std::size_t> layer_sizes;
};

struct OptimizerConfig {
  std::string kind = "sgd";  // "sgd" | "adam"
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ScheduleConfig {
  std::string kind = "constant";  // constant | halving_decay | cyclical_triple | custom
  double eta0 = 0.01;
  std::vector<double> multipliers;  // custom shape only; m[0] must be 1
};

struct TrainingConfig {
  int epochs = 4;
  std::size_t batch_size = 64;
  std::uint64_t base_seed = 1234;
  int repeats = 3;
};

struct SweepConfig {
  double lo = 0.0;  // 0 = pick per optimizer: sgd [1e-3, 1], adam [1e-5, 1e-1]
  double hi = 0.0;
  int points_per_decade = 4;
  bool refine = true;
  int zoom_points = 5;
};

struct RunConfig {
  DatasetConfig dataset;
  ModelConfig model;
  OptimizerConfig optimizer;
  ScheduleConfig schedule;
  TrainingConfig training;
  SweepConfig sweep;

  // Fills the "pick for me" defaults (sweep range, layer sizes, train_size)
  // and validates the cross-field invariants. Idempotent.
  void finalize();

  // Resolved-config echo; parse(to_json()) round-trips exactly.
  nlohmann::json to_json() const;

  // Strict parse: any key not in the schema raises ConfigError naming it.
  static RunConfig from_json(const nlohmann::json& j);
  static RunConfig load_file(const std::string& path);

  // Materializes the dataset this config describes (generating or loading).
  Dataset build_dataset() const;

  // Builds the TrainRun for one training job at the configured eta0.
  // `data` must come from build_dataset() on the same config.
  TrainRun build_run(std::shared_ptr<const Dataset> data) const;

  ScheduleShape shape() const;
  OptimizerSpec optimizer_spec() const;
};

}  // namespace kappatune
