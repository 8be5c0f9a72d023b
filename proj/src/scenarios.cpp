#include "kappatune/scenarios.hpp"

#include <cmath>
#include <memory>
#include <sstream>
#include <utility>

#include "kappatune/config.hpp"
#include "kappatune/csvio.hpp"
#include "kappatune/errors.hpp"
#include "kappatune/version.hpp"

namespace kappatune {

namespace {

// ---------------------------------------------------------------------------
// thresholds
//
// The SGD bands and the kappa/prediction tolerances are the shipped pass
// criteria for desk scale; Adam's desk bands are set a little wider because
// its optimum plateaus are flatter, and its full-scale band is a factor-3
// window around the published MNIST optimum of 0.00045.

struct Band {
  double lo;
  double hi;
};

constexpr Band kSgdSlopeBand{-1.35, -0.65};
constexpr Band kSgdDoublingBand{0.33, 0.80};
constexpr Band kAdamSlopeBand{-1.50, -0.50};
constexpr Band kAdamDoublingBand{0.30, 0.85};
constexpr Band kAdamMnistBand{1.5e-4, 1.35e-3};
constexpr Band kPredictRatioBand{0.5, 2.0};
constexpr double kKappaCvMax = 0.35;

bool in_band(double value, Band band) {
  return std::isfinite(value) && value >= band.lo && value <= band.hi;
}

std::string band_text(double value, Band band) {
  return format_double(value) + " (want [" + format_double(band.lo) + ", " +
         format_double(band.hi) + "])";
}

// ---------------------------------------------------------------------------
// plumbing

RunConfig make_config(const ScenarioOptions& opts, const char* optimizer, const char* schedule,
                      std::size_t train_size, int epochs) {
  RunConfig cfg;
  if (opts.scale == "full") {
    cfg.dataset.kind = "mnist";
    cfg.dataset.path = opts.data_dir;
  }
  cfg.dataset.train_size = train_size;
  cfg.optimizer.kind = optimizer;
  cfg.schedule.kind = schedule;
  cfg.training.epochs = epochs;
  cfg.training.base_seed = opts.base_seed;
  cfg.training.repeats = opts.repeats;
  cfg.finalize();
  return cfg;
}

struct SweptConfig {
  RunConfig cfg;
  SweepResult result;
};

SweptConfig run_config_sweep(const RunConfig& cfg, std::shared_ptr<const Dataset> data,
                             const ScenarioOptions& opts) {
  const TrainRun run = cfg.build_run(std::move(data));
  const std::vector<double> grid =
      make_grid(cfg.sweep.lo, cfg.sweep.hi, cfg.sweep.points_per_decade);
  SweepResult result = sweep(run, grid, cfg.training.repeats, opts.threads);
  if (result.all_diverged()) {
    throw DivergenceError("sweep: every rate in [" + format_double(cfg.sweep.lo) + ", " +
                          format_double(cfg.sweep.hi) + "] diverged; no convergent rate");
  }
  if (cfg.sweep.refine) {
    result = refine(result, cfg.sweep.zoom_points, cfg.training.repeats, opts.threads);
  }
  return {cfg, result};
}

nlohmann::json artifact_meta(const ScenarioReport& report, const char* schema,
                             const std::vector<const RunConfig*>& configs) {
  nlohmann::json echoes = nlohmann::json::array();
  for (const RunConfig* cfg : configs) {
    echoes.push_back(cfg->to_json());
  }
  return nlohmann::json{{"tool", {{"name", "kappatune"}, {"version", kVersion}}},
                        {"scenario", report.scenario},
                        {"scale", report.scale},
                        {"schema", schema},
                        {"configs", echoes}};
}

void emit_csv(ScenarioReport& report, const std::filesystem::path& path, const CsvTable& table,
              const nlohmann::json& meta) {
  write_csv_with_sidecar(path, table, meta);
  report.artifacts.push_back(path);
  std::filesystem::path side = path;
  side += ".meta.json";
  report.artifacts.push_back(side);
}

void emit_sweep_csv(ScenarioReport& report, const std::filesystem::path& dir,
                    const std::string& tag, const SweptConfig& swept) {
  CsvTable table;
  table.header = {"lr", "mean_eval_loss", "std_eval_loss", "repeats", "diverged_count"};
  for (const RateRecord& r : swept.result.records) {
    table.rows.push_back({format_double(r.lr), format_double(r.mean_eval_loss),
                          format_double(r.std_eval_loss), std::to_string(swept.result.repeats),
                          std::to_string(r.diverged_count)});
  }
  nlohmann::json meta = artifact_meta(report, "sweep", {&swept.cfg});
  meta["tag"] = tag;
  meta["best_lr"] = format_double(swept.result.best_lr);
  emit_csv(report, dir / ("sweep_" + tag + ".csv"), table, meta);
}

std::vector<std::string> scaling_row(std::size_t train_size, int epochs, double best_lr) {
  const double total = static_cast<double>(train_size) * static_cast<double>(epochs);
  return {format_double(total), std::to_string(epochs), std::to_string(train_size),
          format_double(best_lr), format_double(best_lr * total)};
}

const std::vector<std::string> kScalingHeader = {"total_data", "epochs", "train_size", "best_lr",
                                                 "kappa"};
const std::vector<std::string> kPredictHeader = {"schedule_kind", "epochs", "predicted_eta0",
                                                 "swept_eta0", "ratio"};

ScenarioReport new_report(ScenarioId id, const ScenarioOptions& opts) {
  if (opts.scale != "desk" && opts.scale != "full") {
    throw ConfigError("repro: scale must be 'desk' or 'full', got '" + opts.scale + "'");
  }
  ScenarioReport report;
  report.scenario = scenario_name(id);
  report.scale = opts.scale;
  return report;
}

std::filesystem::path report_dir(const ScenarioReport& report, const ScenarioOptions& opts) {
  return opts.out_dir / (report.scenario + "_" + report.scale);
}

// ---------------------------------------------------------------------------
// scenarios

ScenarioReport run_inverse_prop(ScenarioId id, const ScenarioOptions& opts) {
  const bool adam = id == ScenarioId::kInverseProportionAdam;
  ScenarioReport report = new_report(id, opts);
  const std::filesystem::path dir = report_dir(report, opts);

  std::size_t train_size = 2048;
  std::vector<int> epoch_grid = {2, 4, 8, 16};
  if (opts.scale == "full") {
    train_size = 30000;
    // Adam full scale is the published MNIST spot check at one epoch count;
    // SGD full scale replays the doubling ladder.
    epoch_grid = adam ? std::vector<int>{10} : std::vector<int>{10, 20, 40, 80};
  }

  const char* optimizer = adam ? "adam" : "sgd";
  const RunConfig first = make_config(opts, optimizer, "constant", train_size, epoch_grid.front());
  const auto data = std::make_shared<const Dataset>(first.build_dataset());

  CsvTable scaling;
  scaling.header = kScalingHeader;
  std::vector<std::pair<double, double>> points;
  std::vector<RunConfig> configs;
  for (int epochs : epoch_grid) {
    const RunConfig cfg = make_config(opts, optimizer, "constant", train_size, epochs);
    const SweptConfig swept = run_config_sweep(cfg, data, opts);
    scaling.rows.push_back(scaling_row(train_size, epochs, swept.result.best_lr));
    points.push_back({static_cast<double>(train_size) * epochs, swept.result.best_lr});
    emit_sweep_csv(report, dir, "E" + std::to_string(epochs), swept);
    configs.push_back(cfg);
  }

  std::vector<const RunConfig*> cfg_ptrs;
  for (const RunConfig& cfg : configs) {
    cfg_ptrs.push_back(&cfg);
  }
  emit_csv(report, dir / "scaling.csv", scaling, artifact_meta(report, "scaling", cfg_ptrs));

  if (adam && opts.scale == "full") {
    const double best = points.front().second;
    report.checks.push_back({"best_lr within the published-optimum band",
                             band_text(best, kAdamMnistBand), in_band(best, kAdamMnistBand)});
    return report;
  }

  const ProportionalityReport prop = proportionality_report(points);
  const Band slope_band = adam ? kAdamSlopeBand : kSgdSlopeBand;
  const Band ratio_band = adam ? kAdamDoublingBand : kSgdDoublingBand;
  report.checks.push_back({"log(best_lr) vs log(total_data) slope",
                           band_text(prop.slope, slope_band), in_band(prop.slope, slope_band)});
  report.checks.push_back({"median doubling ratio best_lr(2D)/best_lr(D)",
                           band_text(prop.median_doubling_ratio, ratio_band),
                           in_band(prop.median_doubling_ratio, ratio_band)});
  return report;
}

ScenarioReport run_data_epoch_equiv(const ScenarioOptions& opts) {
  ScenarioReport report = new_report(ScenarioId::kDataEpochEquivalence, opts);
  const std::filesystem::path dir = report_dir(report, opts);

  // Two runs exposed to the same total data through different (N, E) splits.
  std::pair<std::size_t, int> half{1024, 8};
  std::pair<std::size_t, int> whole{2048, 4};
  if (opts.scale == "full") {
    half = {15000, 20};
    whole = {30000, 10};
  }

  const RunConfig cfg_half = make_config(opts, "sgd", "constant", half.first, half.second);
  const RunConfig cfg_whole = make_config(opts, "sgd", "constant", whole.first, whole.second);
  const auto data = std::make_shared<const Dataset>(cfg_whole.build_dataset());

  const SweptConfig swept_half = run_config_sweep(cfg_half, data, opts);
  const SweptConfig swept_whole = run_config_sweep(cfg_whole, data, opts);
  emit_sweep_csv(report, dir, "N" + std::to_string(half.first) + "_E" + std::to_string(half.second),
                 swept_half);
  emit_sweep_csv(report, dir,
                 "N" + std::to_string(whole.first) + "_E" + std::to_string(whole.second),
                 swept_whole);

  CsvTable scaling;
  scaling.header = kScalingHeader;
  scaling.rows.push_back(scaling_row(half.first, half.second, swept_half.result.best_lr));
  scaling.rows.push_back(scaling_row(whole.first, whole.second, swept_whole.result.best_lr));
  emit_csv(report, dir / "scaling.csv", scaling,
           artifact_meta(report, "scaling", {&cfg_half, &cfg_whole}));

  // Agreement within one refined-grid step, measured in log10 space.
  const double gap = std::abs(std::log10(swept_half.result.best_lr) -
                              std::log10(swept_whole.result.best_lr));
  const double step = std::max(swept_half.result.refined_log10_step,
                               swept_whole.result.refined_log10_step);
  const bool pass = gap <= step * (1.0 + 1e-9);
  report.checks.push_back(
      {"best rates agree within one refined-grid step",
       "best(" + std::to_string(half.first) + "x" + std::to_string(half.second) +
           ") = " + format_double(swept_half.result.best_lr) + ", best(" +
           std::to_string(whole.first) + "x" + std::to_string(whole.second) +
           ") = " + format_double(swept_whole.result.best_lr) + ", |dlog10| = " +
           format_double(gap) + " (want <= " + format_double(step) + ")",
       pass});
  return report;
}

ScenarioReport run_kappa_constancy(const ScenarioOptions& opts) {
  ScenarioReport report = new_report(ScenarioId::kKappaConstancy, opts);
  const std::filesystem::path dir = report_dir(report, opts);

  std::size_t train_size = 2048;
  std::vector<int> epoch_grid = {4, 8, 16};
  if (opts.scale == "full") {
    train_size = 30000;
    epoch_grid = {5, 10, 20};
  }

  const RunConfig first = make_config(opts, "sgd", "constant", train_size, epoch_grid.front());
  const auto data = std::make_shared<const Dataset>(first.build_dataset());

  CsvTable scaling;
  scaling.header = kScalingHeader;
  std::vector<std::pair<double, double>> points;
  std::vector<RunConfig> configs;
  for (int epochs : epoch_grid) {
    const RunConfig cfg = make_config(opts, "sgd", "constant", train_size, epochs);
    const SweptConfig swept = run_config_sweep(cfg, data, opts);
    scaling.rows.push_back(scaling_row(train_size, epochs, swept.result.best_lr));
    points.push_back({static_cast<double>(train_size) * epochs, swept.result.best_lr});
    emit_sweep_csv(report, dir, "E" + std::to_string(epochs), swept);
    configs.push_back(cfg);
  }

  std::vector<const RunConfig*> cfg_ptrs;
  for (const RunConfig& cfg : configs) {
    cfg_ptrs.push_back(&cfg);
  }
  emit_csv(report, dir / "scaling.csv", scaling, artifact_meta(report, "scaling", cfg_ptrs));

  const ProportionalityReport prop = proportionality_report(points);
  std::string kappas = "kappa = {";
  for (std::size_t i = 0; i < prop.kappa_values.size(); ++i) {
    kappas += (i ? ", " : "") + format_double(prop.kappa_values[i]);
  }
  kappas += "}, cv = " + format_double(prop.kappa_cv) + " (want <= " +
            format_double(kKappaCvMax) + ")";
  report.checks.push_back({"kappa coefficient of variation across epoch counts", kappas,
                           std::isfinite(prop.kappa_cv) && prop.kappa_cv <= kKappaCvMax});
  return report;
}

ScenarioReport run_schedule_predict(ScenarioId id, const ScenarioOptions& opts) {
  const bool cyclic = id == ScenarioId::kCyclicPredict;
  ScenarioReport report = new_report(id, opts);
  const std::filesystem::path dir = report_dir(report, opts);

  const char* shape_name = cyclic ? "cyclical_triple" : "halving_decay";
  std::size_t train_size = 2048;
  int base_epochs = 4;
  std::vector<int> target_epochs = {4, 8};
  if (opts.scale == "full") {
    train_size = 30000;
    base_epochs = 13;
    target_epochs = {13, 5};
  }

  const RunConfig base_cfg = make_config(opts, "sgd", "constant", train_size, base_epochs);
  const auto data = std::make_shared<const Dataset>(base_cfg.build_dataset());
  const SweptConfig base = run_config_sweep(base_cfg, data, opts);
  emit_sweep_csv(report, dir, "constant_E" + std::to_string(base_epochs), base);

  const KappaEstimate kappa = estimate_kappa(base.result);
  const ScheduleShape shape =
      cyclic ? ScheduleShape::cyclical_triple() : ScheduleShape::halving_decay();

  CsvTable predict;
  predict.header = kPredictHeader;
  std::vector<RunConfig> configs = {base_cfg};
  for (int epochs : target_epochs) {
    const double predicted = predict_schedule_lr(kappa, shape, train_size, epochs);
    const RunConfig cfg = make_config(opts, "sgd", shape_name, train_size, epochs);
    const SweptConfig swept = run_config_sweep(cfg, data, opts);
    const double ratio = swept.result.best_lr / predicted;
    predict.rows.push_back({shape_name, std::to_string(epochs), format_double(predicted),
                            format_double(swept.result.best_lr), format_double(ratio)});
    emit_sweep_csv(report, dir, std::string(shape_name) + "_E" + std::to_string(epochs), swept);
    configs.push_back(cfg);
    report.checks.push_back(
        {"swept/predicted eta0 at E=" + std::to_string(epochs),
         band_text(ratio, kPredictRatioBand), in_band(ratio, kPredictRatioBand)});
  }

  std::vector<const RunConfig*> cfg_ptrs;
  for (const RunConfig& cfg : configs) {
    cfg_ptrs.push_back(&cfg);
  }
  nlohmann::json meta = artifact_meta(report, "predict", cfg_ptrs);
  meta["kappa"] = format_double(kappa.kappa);
  emit_csv(report, dir / "predict.csv", predict, meta);
  return report;
}

}  // namespace

const char* scenario_name(ScenarioId id) {
  switch (id) {
    case ScenarioId::kInverseProportionSgd:
      return "inverse_prop_sgd";
    case ScenarioId::kInverseProportionAdam:
      return "inverse_prop_adam";
    case ScenarioId::kDataEpochEquivalence:
      return "data_epoch_equiv";
    case ScenarioId::kKappaConstancy:
      return "kappa_constancy";
    case ScenarioId::kDecayPredict:
      return "decay_predict";
    case ScenarioId::kCyclicPredict:
      return "cyclic_predict";
  }
  return "unknown";
}

std::vector<std::string> scenario_names() {
  return {"inverse_prop_sgd", "inverse_prop_adam", "data_epoch_equiv",
          "kappa_constancy",  "decay_predict",     "cyclic_predict"};
}

ScenarioId scenario_from_name(const std::string& name) {
  static const std::pair<const char*, ScenarioId> kTable[] = {
      {"inverse_prop_sgd", ScenarioId::kInverseProportionSgd},
      {"inverse_prop_adam", ScenarioId::kInverseProportionAdam},
      {"data_epoch_equiv", ScenarioId::kDataEpochEquivalence},
      {"kappa_constancy", ScenarioId::kKappaConstancy},
      {"decay_predict", ScenarioId::kDecayPredict},
      {"cyclic_predict", ScenarioId::kCyclicPredict},
  };
  for (const auto& [key, id] : kTable) {
    if (name == key) {
      return id;
    }
  }
  std::string valid;
  for (const std::string& n : scenario_names()) {
    if (!valid.empty()) {
      valid += ", ";
    }
    valid += n;
  }
  throw ConfigError("repro: unknown scenario '" + name + "'; valid ids: " + valid);
}

bool ScenarioReport::all_passed() const {
  for (const CheckLine& check : checks) {
    if (!check.pass) {
      return false;
    }
  }
  return true;
}

ScenarioReport run_scenario(ScenarioId id, const ScenarioOptions& opts) {
  switch (id) {
    case ScenarioId::kInverseProportionSgd:
    case ScenarioId::kInverseProportionAdam:
      return run_inverse_prop(id, opts);
    case ScenarioId::kDataEpochEquivalence:
      return run_data_epoch_equiv(opts);
    case ScenarioId::kKappaConstancy:
      return run_kappa_constancy(opts);
    case ScenarioId::kDecayPredict:
    case ScenarioId::kCyclicPredict:
      return run_schedule_predict(id, opts);
  }
  throw ConfigError("repro: unhandled scenario id");
}

}  // namespace kappatune
