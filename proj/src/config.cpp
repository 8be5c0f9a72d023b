#include "kappatune/config.hpp"

#include <cstdlib>
#include <fstream>

#include "kappatune/errors.hpp"

namespace kappatune {

namespace {

// Pulls a value out of j and marks the key as consumed; leftover keys are
// reported as typos afterwards.
template <typename T>
void take(nlohmann::json& j, const char* key, T& out, const std::string& section) {
  if (!j.contains(key)) {
    return;
  }
  try {
    j.at(key).get_to(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: bad value for " + section + "." + key + ": " + e.what());
  }
  j.erase(key);
}

void reject_leftovers(const nlohmann::json& j, const std::string& section) {
  if (j.empty()) {
    return;
  }
  std::string keys;
  for (const auto& item : j.items()) {
    if (!keys.empty()) {
      keys += ", ";
    }
    keys += "'" + item.key() + "'";
  }
  throw ConfigError("config: unknown key(s) in " + section + ": " + keys);
}

nlohmann::json take_section(nlohmann::json& j, const char* key) {
  if (!j.contains(key)) {
    return nlohmann::json::object();
  }
  nlohmann::json section = j.at(key);
  if (!section.is_object()) {
    throw ConfigError("config: '" + std::string(key) + "' must be an object");
  }
  j.erase(key);
  return section;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& input) {
  if (!input.is_object()) {
    throw ConfigError("config: top level must be an object");
  }
  nlohmann::json j = input;
  RunConfig cfg;

  nlohmann::json d = take_section(j, "dataset");
  take(d, "kind", cfg.dataset.kind, "dataset");
  take(d, "path", cfg.dataset.path, "dataset");
  take(d, "train_size", cfg.dataset.train_size, "dataset");
  take(d, "num_classes", cfg.dataset.num_classes, "dataset");
  take(d, "per_class", cfg.dataset.per_class, "dataset");
  take(d, "feature_dim", cfg.dataset.feature_dim, "dataset");
  take(d, "separation", cfg.dataset.separation, "dataset");
  take(d, "noise", cfg.dataset.noise, "dataset");
  take(d, "seed", cfg.dataset.seed, "dataset");
  reject_leftovers(d, "dataset");

  nlohmann::json m = take_section(j, "model");
  take(m, "layer_sizes", cfg.model.layer_sizes, "model");
  reject_leftovers(m, "model");

  nlohmann::json o = take_section(j, "optimizer");
  take(o, "kind", cfg.optimizer.kind, "optimizer");
  take(o, "beta1", cfg.optimizer.beta1, "optimizer");
  take(o, "beta2", cfg.optimizer.beta2, "optimizer");
  take(o, "epsilon", cfg.optimizer.epsilon, "optimizer");
  reject_leftovers(o, "optimizer");

  nlohmann::json s = take_section(j, "schedule");
  take(s, "kind", cfg.schedule.kind, "schedule");
  take(s, "eta0", cfg.schedule.eta0, "schedule");
  take(s, "multipliers", cfg.schedule.multipliers, "schedule");
  reject_leftovers(s, "schedule");

  nlohmann::json t = take_section(j, "training");
  take(t, "epochs", cfg.training.epochs, "training");
  take(t, "batch_size", cfg.training.batch_size, "training");
  take(t, "base_seed", cfg.training.base_seed, "training");
  take(t, "repeats", cfg.training.repeats, "training");
  reject_leftovers(t, "training");

  nlohmann::json w = take_section(j, "sweep");
  take(w, "lo", cfg.sweep.lo, "sweep");
  take(w, "hi", cfg.sweep.hi, "sweep");
  take(w, "points_per_decade", cfg.sweep.points_per_decade, "sweep");
  take(w, "refine", cfg.sweep.refine, "sweep");
  take(w, "zoom_points", cfg.sweep.zoom_points, "sweep");
  reject_leftovers(w, "sweep");

  reject_leftovers(j, "config");
  return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("config: cannot open '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

void RunConfig::finalize() {
  if (dataset.kind != "synthetic" && dataset.kind != "mnist") {
    throw ConfigError("config: dataset.kind must be 'synthetic' or 'mnist', got '" +
                      dataset.kind + "'");
  }
  if (optimizer.kind != "sgd" && optimizer.kind != "adam") {
    throw ConfigError("config: optimizer.kind must be 'sgd' or 'adam', got '" + optimizer.kind +
                      "'");
  }
  shape_kind_from_name(schedule.kind);  // throws on unknown names

  if (dataset.kind == "mnist" && dataset.path.empty()) {
    if (const char* env = std::getenv("KAPPATUNE_DATA_DIR")) {
      dataset.path = env;
    }
  }

  // default train sizes: full synthetic train split / the published MNIST
  // benchmark size the thresholds were calibrated against
  if (dataset.train_size == 0) {
    if (dataset.kind == "synthetic") {
      const std::size_t total = dataset.per_class * static_cast<std::size_t>(dataset.num_classes);
      dataset.train_size = total - total / 5;  // every 5th example goes to eval
    } else {
      dataset.train_size = 30000;
    }
  }

  if (model.layer_sizes.empty()) {
    if (dataset.kind == "synthetic") {
      model.layer_sizes = {dataset.feature_dim, 32,
                           static_cast<std::size_t>(dataset.num_classes)};
    } else {
      model.layer_sizes = {784, 256, 10};
    }
  }

  // default sweep window per optimizer (Adam optima sit orders of magnitude
  // below SGD's for the same problem)
  if (sweep.lo == 0.0 && sweep.hi == 0.0) {
    if (optimizer.kind == "sgd") {
      sweep.lo = 1e-3;
      sweep.hi = 1.0;
    } else {
      sweep.lo = 1e-5;
      sweep.hi = 1e-1;
    }
  }
  if (!(sweep.lo > 0.0) || !(sweep.hi > sweep.lo)) {
    throw ConfigError("config: sweep window needs 0 < lo < hi");
  }
  if (training.repeats < 1) {
    throw ConfigError("config: training.repeats must be >= 1");
  }
  if (training.epochs < 1) {
    throw ConfigError("config: training.epochs must be >= 1");
  }
  if (training.batch_size < 1) {
    throw ConfigError("config: training.batch_size must be >= 1");
  }
}

nlohmann::json RunConfig::to_json() const {
  return nlohmann::json{
      {"dataset",
       {{"kind", dataset.kind},
        {"path", dataset.path},
        {"train_size", dataset.train_size},
        {"num_classes", dataset.num_classes},
        {"per_class", dataset.per_class},
        {"feature_dim", dataset.feature_dim},
        {"separation", dataset.separation},
        {"noise", dataset.noise},
        {"seed", dataset.seed}}},
      {"model", {{"layer_sizes", model.layer_sizes}}},
      {"optimizer",
       {{"kind", optimizer.kind},
        {"beta1", optimizer.beta1},
        {"beta2", optimizer.beta2},
        {"epsilon", optimizer.epsilon}}},
      {"schedule",
       {{"kind", schedule.kind},
        {"eta0", schedule.eta0},
        {"multipliers", schedule.multipliers}}},
      {"training",
       {{"epochs", training.epochs},
        {"batch_size", training.batch_size},
        {"base_seed", training.base_seed},
        {"repeats", training.repeats}}},
      {"sweep",
       {{"lo", sweep.lo},
        {"hi", sweep.hi},
        {"points_per_decade", sweep.points_per_decade},
        {"refine", sweep.refine},
        {"zoom_points", sweep.zoom_points}}}};
}

ScheduleShape RunConfig::shape() const {
  const ShapeKind kind = shape_kind_from_name(schedule.kind);
  if (kind == ShapeKind::kCustom) {
    return ScheduleShape::custom(schedule.multipliers);
  }
  if (!schedule.multipliers.empty()) {
    throw ConfigError("config: schedule.multipliers only applies to kind 'custom'");
  }
  switch (kind) {
    case ShapeKind::kHalvingDecay:
      return ScheduleShape::halving_decay();
    case ShapeKind::kCyclicalTriple:
      return ScheduleShape::cyclical_triple();
    default:
      return ScheduleShape::constant();
  }
}

OptimizerSpec RunConfig::optimizer_spec() const {
  OptimizerSpec spec;
  if (optimizer.kind == "adam") {
    spec.kind = OptimizerSpec::Kind::kAdam;
    spec.adam.beta1 = optimizer.beta1;
    spec.adam.beta2 = optimizer.beta2;
    spec.adam.epsilon = optimizer.epsilon;
  } else {
    spec.kind = OptimizerSpec::Kind::kSgd;
  }
  return spec;
}

Dataset RunConfig::build_dataset() const {
  if (dataset.kind == "mnist") {
    return load_mnist(dataset.path);
  }
  SyntheticSpec spec;
  spec.num_classes = static_cast<std::size_t>(dataset.num_classes);
  spec.per_class_count = dataset.per_class;
  spec.feature_dim = dataset.feature_dim;
  spec.cluster_separation = dataset.separation;
  spec.noise_scale = dataset.noise;
  spec.seed = dataset.seed;
  return generate_synthetic(spec);
}

TrainRun RunConfig::build_run(std::shared_ptr<const Dataset> data) const {
  if (!data) {
    throw ConfigError("config: build_run needs a dataset");
  }
  TrainRun run;
  run.train_size = std::min(dataset.train_size, data->train_size());
  run.epochs = training.epochs;
  run.batch_size = training.batch_size;
  run.optimizer = optimizer_spec();
  run.schedule = Schedule{schedule.eta0, shape(), run.train_size, training.epochs};
  run.seed = training.base_seed;
  run.layer_sizes = model.layer_sizes;
  run.dataset = std::move(data);
  return run;
}

}  // namespace kappatune
