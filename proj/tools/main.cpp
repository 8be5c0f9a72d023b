// kappatune command-line tool.
//
// Subcommands: train, sweep, kappa, solve, repro. Exit codes are a stable
// contract for scripting: 0 success, 2 config/usage error, 3 divergence or
// no convergent rate; a repro run whose threshold checks fail exits 1.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "kappatune/config.hpp"
#include "kappatune/csvio.hpp"
#include "kappatune/errors.hpp"
#include "kappatune/scenarios.hpp"
#include "kappatune/schedule.hpp"
#include "kappatune/tuner.hpp"
#include "kappatune/version.hpp"

namespace kt = kappatune;

namespace {

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 1;
  bool print_config = false;

  // flag overrides: only applied when the flag was actually passed
  std::string dataset_kind;
  std::string data_dir;
  std::string optimizer_kind;
  std::string schedule_kind;
  std::vector<double> multipliers;
  std::size_t train_size = 0;
  int epochs = 0;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  int repeats = 0;
  double eta0 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int points_per_decade = 0;
  int zoom_points = 0;
  bool refine_on = false;
  bool refine_off = false;
};

void add_common_options(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config_path, "JSON config file; flags override its values");
  sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
  sub->add_option("--threads", o.threads, "parallel training jobs (1 = fully serial)")
      ->capture_default_str();
  sub->add_flag("--print-config", o.print_config, "print the resolved config and exit");

  sub->add_option("--dataset", o.dataset_kind, "dataset kind: synthetic | mnist");
  sub->add_option("--data-dir", o.data_dir, "MNIST directory (or set KAPPATUNE_DATA_DIR)");
  sub->add_option("--train-size", o.train_size, "examples per epoch");
  sub->add_option("--epochs", o.epochs, "number of epochs");
  sub->add_option("--batch-size", o.batch_size, "minibatch size");
  sub->add_option("--seed", o.seed, "base seed; repeat r trains with seed base+r");
  sub->add_option("--repeats", o.repeats, "seeded repeats per learning rate");
  sub->add_option("--optimizer", o.optimizer_kind, "sgd | adam");
  sub->add_option("--eta0", o.eta0, "base learning rate for a single run");
  sub->add_option("--schedule", o.schedule_kind,
                  "constant | halving_decay | cyclical_triple | custom");
  sub->add_option("--multipliers", o.multipliers, "per-epoch multipliers for --schedule custom");
  sub->add_option("--lo", o.lo, "sweep window lower edge");
  sub->add_option("--hi", o.hi, "sweep window upper edge");
  sub->add_option("--points-per-decade", o.points_per_decade, "coarse grid density");
  CLI::Option* on = sub->add_flag("--refine", o.refine_on, "zoom around the coarse optimum");
  CLI::Option* off = sub->add_flag("--no-refine", o.refine_off, "skip the zoom pass");
  on->excludes(off);
  sub->add_option("--zoom-points", o.zoom_points, "points in the zoom grid");
}

kt::RunConfig resolve_config(const CLI::App* sub, const CommonOpts& o) {
  kt::RunConfig cfg;
  if (!o.config_path.empty()) {
    cfg = kt::RunConfig::load_file(o.config_path);
  }
  if (sub->count("--dataset")) cfg.dataset.kind = o.dataset_kind;
  if (sub->count("--data-dir")) cfg.dataset.path = o.data_dir;
  if (sub->count("--train-size")) cfg.dataset.train_size = o.train_size;
  if (sub->count("--epochs")) cfg.training.epochs = o.epochs;
  if (sub->count("--batch-size")) cfg.training.batch_size = o.batch_size;
  if (sub->count("--seed")) cfg.training.base_seed = o.seed;
  if (sub->count("--repeats")) cfg.training.repeats = o.repeats;
  if (sub->count("--optimizer")) cfg.optimizer.kind = o.optimizer_kind;
  if (sub->count("--eta0")) cfg.schedule.eta0 = o.eta0;
  if (sub->count("--schedule")) cfg.schedule.kind = o.schedule_kind;
  if (sub->count("--multipliers")) cfg.schedule.multipliers = o.multipliers;
  if (sub->count("--lo")) cfg.sweep.lo = o.lo;
  if (sub->count("--hi")) cfg.sweep.hi = o.hi;
  if (sub->count("--points-per-decade")) cfg.sweep.points_per_decade = o.points_per_decade;
  if (o.refine_on) cfg.sweep.refine = true;
  if (o.refine_off) cfg.sweep.refine = false;
  if (sub->count("--zoom-points")) cfg.sweep.zoom_points = o.zoom_points;
  cfg.finalize();
  return cfg;
}

nlohmann::json artifact_meta(const char* command, const char* schema, const kt::RunConfig& cfg) {
  return nlohmann::json{{"tool", {{"name", "kappatune"}, {"version", kt::kVersion}}},
                        {"command", command},
                        {"schema", schema},
                        {"config", cfg.to_json()}};
}

// Sidecar for append-mode CSVs: keeps one invocation record per appended row.
void append_sidecar(const std::filesystem::path& csv_path, const char* schema,
                    const nlohmann::json& record) {
  std::filesystem::path side = csv_path;
  side += ".meta.json";
  nlohmann::json meta = nlohmann::json::object();
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    nlohmann::json existing;
    in >> existing;
    if (existing.is_object() && existing.contains("invocations")) {
      meta = std::move(existing);
    }
  }
  meta["tool"] = {{"name", "kappatune"}, {"version", kt::kVersion}};
  meta["schema"] = schema;
  if (!meta.contains("invocations")) {
    meta["invocations"] = nlohmann::json::array();
  }
  meta["invocations"].push_back(record);
  kt::write_file_atomic(side, meta.dump(2) + "\n");
}

int cmd_train(const CLI::App* sub, const CommonOpts& o) {
  const kt::RunConfig cfg = resolve_config(sub, o);
  if (o.print_config) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
  }
  const auto data = std::make_shared<const kt::Dataset>(cfg.build_dataset());
  const kt::TrainRun run = cfg.build_run(data);
  const kt::TrainResult result = kt::train(run);

  kt::CsvTable curve;
  curve.header = {"examples_seen", "lr", "train_loss"};
  for (const kt::CurvePoint& p : result.loss_curve) {
    curve.rows.push_back(
        {std::to_string(p.examples_seen), kt::format_double(p.lr), kt::format_double(p.train_loss)});
  }
  const std::filesystem::path path = std::filesystem::path(o.out_dir) / "curve.csv";
  kt::write_csv_with_sidecar(path, curve, artifact_meta("train", "curve", cfg));
  std::cout << "wrote " << path.string() << " (" << curve.rows.size() << " updates)\n";

  if (result.diverged) {
    std::cout << "training diverged after " << curve.rows.size()
              << " updates; curve truncated at divergence\n";
    return 3;
  }
  std::cout << "final_eval_loss = " << kt::format_double(result.final_eval_loss) << "\n";
  std::cout << "eval_accuracy = " << kt::format_double(result.eval_accuracy) << "\n";
  return 0;
}

void write_sweep_csv(const std::filesystem::path& path, const kt::SweepResult& result,
                     const kt::RunConfig& cfg) {
  kt::CsvTable table;
  table.header = {"lr", "mean_eval_loss", "std_eval_loss", "repeats", "diverged_count"};
  for (const kt::RateRecord& r : result.records) {
    table.rows.push_back({kt::format_double(r.lr), kt::format_double(r.mean_eval_loss),
                          kt::format_double(r.std_eval_loss), std::to_string(result.repeats),
                          std::to_string(r.diverged_count)});
  }
  nlohmann::json meta = artifact_meta("sweep", "sweep", cfg);
  meta["best_lr"] = kt::format_double(result.best_lr);
  kt::write_csv_with_sidecar(path, table, meta);
}

// Shared by sweep and kappa. Writes sweep.csv even when everything diverged,
// then signals exit 3 through the bool.
struct SweepOutcome {
  kt::SweepResult result;
  bool no_convergent_rate = false;
};

SweepOutcome run_sweep_command(const kt::RunConfig& cfg, const CommonOpts& o,
                               const std::filesystem::path& csv_path) {
  const auto data = std::make_shared<const kt::Dataset>(cfg.build_dataset());
  const kt::TrainRun run = cfg.build_run(data);
  const std::vector<double> grid =
      kt::make_grid(cfg.sweep.lo, cfg.sweep.hi, cfg.sweep.points_per_decade);
  kt::SweepResult result = kt::sweep(run, grid, cfg.training.repeats, o.threads);
  if (result.all_diverged()) {
    write_sweep_csv(csv_path, result, cfg);
    std::cout << "wrote " << csv_path.string() << "\n";
    return {std::move(result), true};
  }
  if (cfg.sweep.refine) {
    result = kt::refine(result, cfg.sweep.zoom_points, cfg.training.repeats, o.threads);
  }
  write_sweep_csv(csv_path, result, cfg);
  std::cout << "wrote " << csv_path.string() << "\n";
  return {std::move(result), false};
}

int cmd_sweep(const CLI::App* sub, const CommonOpts& o) {
  const kt::RunConfig cfg = resolve_config(sub, o);
  if (o.print_config) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
  }
  const std::filesystem::path path = std::filesystem::path(o.out_dir) / "sweep.csv";
  const SweepOutcome outcome = run_sweep_command(cfg, o, path);
  if (outcome.no_convergent_rate) {
    std::cout << "no convergent rate: every learning rate in the grid diverged\n";
    return 3;
  }
  const kt::SweepResult& result = outcome.result;
  double best_mean = std::numeric_limits<double>::infinity();
  for (const kt::RateRecord& r : result.records) {
    if (r.lr == result.best_lr) {
      best_mean = r.mean_eval_loss;
    }
  }
  std::cout << "best_lr = " << kt::format_double(result.best_lr)
            << " (mean_eval_loss = " << kt::format_double(best_mean) << ")\n";
  return 0;
}

int cmd_kappa(const CLI::App* sub, const CommonOpts& o) {
  const kt::RunConfig cfg = resolve_config(sub, o);
  if (o.print_config) {
    std::cout << cfg.to_json().dump(2) << "\n";
    return 0;
  }
  if (cfg.schedule.kind != "constant") {
    throw kt::ConfigError("kappa: the sweep must use a constant schedule (kappa is defined from "
                          "the constant-rate optimum), got '" + cfg.schedule.kind + "'");
  }
  const std::filesystem::path sweep_path = std::filesystem::path(o.out_dir) / "sweep.csv";
  const SweepOutcome outcome = run_sweep_command(cfg, o, sweep_path);
  if (outcome.no_convergent_rate) {
    std::cout << "no convergent rate: every learning rate in the grid diverged\n";
    return 3;
  }
  const kt::KappaEstimate est = kt::estimate_kappa(outcome.result);
  const double total = static_cast<double>(est.train_size) * static_cast<double>(est.epochs);
  std::cout << "best_lr = " << kt::format_double(est.best_lr) << "\n";
  std::cout << "kappa = " << kt::format_double(est.kappa) << " (best_lr * " << est.train_size
            << " * " << est.epochs << ")\n";

  const std::filesystem::path scaling_path = std::filesystem::path(o.out_dir) / "scaling.csv";
  kt::append_csv_row(scaling_path, {"total_data", "epochs", "train_size", "best_lr", "kappa"},
                     {kt::format_double(total), std::to_string(est.epochs),
                      std::to_string(est.train_size), kt::format_double(est.best_lr),
                      kt::format_double(est.kappa)});
  append_sidecar(scaling_path, "scaling",
                 nlohmann::json{{"config", cfg.to_json()}, {"kappa", kt::format_double(est.kappa)}});
  std::cout << "appended " << scaling_path.string() << "\n";
  return 0;
}

struct SolveOpts {
  double kappa = 0.0;
  std::string shape = "halving_decay";
  std::vector<double> multipliers;
  std::size_t train_size = 0;
  int epochs = 0;
  double swept_eta0 = std::numeric_limits<double>::quiet_NaN();
  std::string out_dir = "out";
};

int cmd_solve(const SolveOpts& o) {
  kt::ScheduleShape shape = kt::ScheduleShape::constant();
  switch (kt::shape_kind_from_name(o.shape)) {
    case kt::ShapeKind::kConstant:
      break;
    case kt::ShapeKind::kHalvingDecay:
      shape = kt::ScheduleShape::halving_decay();
      break;
    case kt::ShapeKind::kCyclicalTriple:
      shape = kt::ScheduleShape::cyclical_triple();
      break;
    case kt::ShapeKind::kCustom:
      shape = kt::ScheduleShape::custom(o.multipliers);
      break;
  }
  const double predicted = kt::solve_eta0(o.kappa, shape, o.train_size, o.epochs);
  std::cout << "eta0 = " << kt::format_double(predicted) << "\n";

  const double ratio = o.swept_eta0 / predicted;  // NaN when no swept value given
  const std::filesystem::path path = std::filesystem::path(o.out_dir) / "predict.csv";
  kt::append_csv_row(path, {"schedule_kind", "epochs", "predicted_eta0", "swept_eta0", "ratio"},
                     {o.shape, std::to_string(o.epochs), kt::format_double(predicted),
                      kt::format_double(o.swept_eta0), kt::format_double(ratio)});
  append_sidecar(path, "predict",
                 nlohmann::json{{"kappa", kt::format_double(o.kappa)},
                                {"shape", o.shape},
                                {"train_size", o.train_size},
                                {"epochs", o.epochs}});
  std::cout << "appended " << path.string() << "\n";
  return 0;
}

struct ReproOpts {
  std::string scenario;
  kt::ScenarioOptions scenario_opts;
};

int cmd_repro(const ReproOpts& o) {
  const kt::ScenarioId id = kt::scenario_from_name(o.scenario);
  const kt::ScenarioReport report = kt::run_scenario(id, o.scenario_opts);
  std::cout << "scenario " << report.scenario << " (" << report.scale << ")\n";
  for (const std::filesystem::path& artifact : report.artifacts) {
    std::cout << "wrote " << artifact.string() << "\n";
  }
  for (const kt::CheckLine& check : report.checks) {
    std::cout << (check.pass ? "[PASS] " : "[FAIL] ") << check.label << ": " << check.detail
              << "\n";
  }
  const bool ok = report.all_passed();
  std::cout << "RESULT: " << (ok ? "PASS" : "FAIL") << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"learning-rate tuning via the cumulative learning constant"};
  app.set_version_flag("--version", kt::kVersion);
  app.require_subcommand(1);

  CommonOpts train_opts;
  CLI::App* train_cmd = app.add_subcommand("train", "run one training job; writes curve.csv");
  add_common_options(train_cmd, train_opts);

  CommonOpts sweep_opts;
  CLI::App* sweep_cmd =
      app.add_subcommand("sweep", "grid-sweep learning rates; writes sweep.csv, prints best_lr");
  add_common_options(sweep_cmd, sweep_opts);

  CommonOpts kappa_opts;
  CLI::App* kappa_cmd = app.add_subcommand(
      "kappa", "sweep a constant rate, report kappa = best_lr * N * E; appends scaling.csv");
  add_common_options(kappa_cmd, kappa_opts);

  SolveOpts solve_opts;
  CLI::App* solve_cmd = app.add_subcommand(
      "solve", "invert a schedule integral: predict eta0 from kappa; appends predict.csv");
  solve_cmd->add_option("--kappa", solve_opts.kappa, "cumulative learning constant")->required();
  solve_cmd->add_option("--shape", solve_opts.shape,
                        "constant | halving_decay | cyclical_triple | custom")
      ->capture_default_str();
  solve_cmd->add_option("--multipliers", solve_opts.multipliers,
                        "per-epoch multipliers for --shape custom");
  solve_cmd->add_option("--train-size", solve_opts.train_size, "examples per epoch")->required();
  solve_cmd->add_option("--epochs", solve_opts.epochs, "number of epochs")->required();
  solve_cmd->add_option("--swept-eta0", solve_opts.swept_eta0,
                        "optional measured optimum, recorded next to the prediction");
  solve_cmd->add_option("--out", solve_opts.out_dir, "output directory")->capture_default_str();

  ReproOpts repro_opts;
  CLI::App* repro_cmd =
      app.add_subcommand("repro", "run a named reproduction scenario and check its thresholds");
  repro_cmd->add_option("scenario", repro_opts.scenario, "scenario id (see docs)")->required();
  repro_cmd->add_option("--scale", repro_opts.scenario_opts.scale, "desk | full")
      ->capture_default_str();
  repro_cmd
      ->add_option("--out", repro_opts.scenario_opts.out_dir, "output directory")
      ->capture_default_str();
  repro_cmd->add_option("--threads", repro_opts.scenario_opts.threads, "parallel training jobs")
      ->capture_default_str();
  repro_cmd->add_option("--data-dir", repro_opts.scenario_opts.data_dir,
                        "MNIST directory for --scale full");
  repro_cmd->add_option("--seed", repro_opts.scenario_opts.base_seed, "base seed")
      ->capture_default_str();
  repro_cmd->add_option("--repeats", repro_opts.scenario_opts.repeats, "repeats per rate")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // help/version exit cleanly; usage errors exit 2
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train_cmd, train_opts);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep_cmd, sweep_opts);
    if (kappa_cmd->parsed()) return cmd_kappa(kappa_cmd, kappa_opts);
    if (solve_cmd->parsed()) return cmd_solve(solve_opts);
    if (repro_cmd->parsed()) return cmd_repro(repro_opts);
  } catch (const kt::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const kt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
