#pragma once

#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include "kappatune/data.hpp"
#include "kappatune/mlp.hpp"
#include "kappatune/optim.hpp"
#include "kappatune/schedule.hpp"

namespace kappatune {

struct OptimizerSpec {
  enum class Kind { kSgd, kAdam };
  Kind kind = Kind::kSgd;
  AdamConfig adam;
};

const char* optimizer_kind_name(OptimizerSpec::Kind kind);

// One fully specified training run. Identical TrainRun values produce
// bitwise-identical results.
struct TrainRun {
  std::shared_ptr<const Dataset> dataset;
  std::size_t train_size = 0;  // N, prefix of the dataset's train split
  int epochs = 0;              // E
  std::size_t batch_size = 64;
  OptimizerSpec optimizer;
  Schedule schedule;  // epoch_size must equal train_size, epochs must match
  std::uint64_t seed = 0;
  std::vector<std::size_t> layer_sizes;

  std::uint64_t total_data() const {
    return static_cast<std::uint64_t>(train_size) * static_cast<std::uint64_t>(epochs);
  }
};

TrainRun with_eta0(TrainRun run, double eta0);

struct CurvePoint {
  std::uint64_t examples_seen = 0;  // cumulative, after the update
  double lr = 0.0;                  // rate applied at the update
  double train_loss = 0.0;
};

struct TrainResult {
  double final_eval_loss = 0.0;  // +infinity when diverged
  double eval_accuracy = 0.0;
  std::vector<CurvePoint> loss_curve;  // truncated at divergence
  bool diverged = false;
  MlpParams final_params;
};

// Per epoch: shuffle with an RNG derived from (seed, epoch), walk minibatches
// keeping the last partial one, look up eta by examples seen, update, then
// evaluate once on the held-out split.
TrainResult train(const TrainRun& run);

// Log-uniform grid including both endpoints, strictly increasing.
std::vector<double> make_grid(double lo, double hi, int points_per_decade);

struct RateRecord {
  double lr = 0.0;
  double mean_eval_loss = 0.0;  // +infinity when any repeat diverged
  double std_eval_loss = 0.0;   // sample standard deviation; 0 for one repeat
  int diverged_count = 0;
};

// Argmin of mean loss; exact ties break toward the smaller rate.
double pick_best_rate(const std::vector<RateRecord>& records);

struct SweepResult {
  std::vector<RateRecord> records;  // sorted by lr
  int repeats = 0;
  double best_lr = 0.0;
  TrainRun config;                  // shared template (eta0 replaced per rate)
  double refined_log10_step = 0.0;  // log10 spacing of the zoom grid, 0 before refine()

  bool all_diverged() const;
};

// For each grid rate, runs `repeats` TrainRuns with seeds base+0..base+r-1.
// Runs are independent; `threads` > 1 executes them in parallel without
// changing any result.
SweepResult sweep(const TrainRun& template_run, const std::vector<double>& grid, int repeats,
                  int threads = 1);

// One zoom level around the coarse optimum: a fresh log-uniform grid between
// the best rate's grid neighbors (an octave beyond when the best sits on a
// boundary), re-swept and merged. Never recurses.
SweepResult refine(const SweepResult& coarse, int zoom_points, int repeats, int threads = 1);

struct KappaEstimate {
  double kappa = 0.0;
  std::size_t train_size = 0;
  int epochs = 0;
  OptimizerSpec::Kind optimizer = OptimizerSpec::Kind::kSgd;
  double best_lr = 0.0;
};

// kappa = best_lr * N * E; requires the sweep to have used a constant shape.
KappaEstimate estimate_kappa(const SweepResult& result);

double predict_constant_lr(const KappaEstimate& kappa, std::uint64_t target_total_data);
double predict_schedule_lr(const KappaEstimate& kappa, const ScheduleShape& shape,
                           std::size_t epoch_size, int epochs);

struct DoublingRatio {
  double scale = 0.0;  // the smaller of the paired scales
  double ratio = 0.0;  // best_lr(2*scale) / best_lr(scale)
};

struct ProportionalityReport {
  double slope = 0.0;  // log(best_lr) vs log(scale) least-squares slope
  bool degenerate = false;
  std::vector<DoublingRatio> doubling_ratios;
  double median_doubling_ratio = 0.0;  // NaN when no doubling pairs exist
  double kappa_cv = 0.0;               // sample std / mean of best_lr * scale
  std::vector<double> kappa_values;
};

// points are (scale, best_lr) pairs where scale is epochs or total data.
ProportionalityReport proportionality_report(const std::vector<std::pair<double, double>>& points);

}  // namespace kappatune
