#include "kappatune/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

#include "kappatune/errors.hpp"
#include "kappatune/rng.hpp"

namespace kappatune {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// seed streams; repeats already offset the base seed, these separate the
// uses of one run's seed
constexpr std::uint64_t kInitStream = 0x696e6974;     // weight init
constexpr std::uint64_t kShuffleStream = 0x73687566;  // + epoch index

void validate_run(const TrainRun& run) {
  if (!run.dataset) {
    throw ConfigError("train: no dataset attached to the run");
  }
  if (run.epochs < 1) {
    throw ConfigError("train: epochs must be >= 1");
  }
  if (run.batch_size < 1) {
    throw ConfigError("train: batch_size must be >= 1");
  }
  if (run.train_size < 1 || run.train_size > run.dataset->train_size()) {
    throw ConfigError("train: train_size = " + std::to_string(run.train_size) + " outside [1, " +
                      std::to_string(run.dataset->train_size()) + "]");
  }
  if (run.layer_sizes.size() < 2) {
    throw ConfigError("train: model needs at least input and output layers");
  }
  if (run.layer_sizes.front() != run.dataset->feature_dim) {
    throw ConfigError("train: input layer " + std::to_string(run.layer_sizes.front()) +
                      " does not match feature_dim " + std::to_string(run.dataset->feature_dim));
  }
  if (run.layer_sizes.back() != run.dataset->num_classes) {
    throw ConfigError("train: output layer " + std::to_string(run.layer_sizes.back()) +
                      " does not match num_classes " + std::to_string(run.dataset->num_classes));
  }
  if (run.schedule.epoch_size != run.train_size ||
      run.schedule.epochs != run.epochs) {
    throw ConfigError("train: schedule span (" + std::to_string(run.schedule.epoch_size) + " x " +
                      std::to_string(run.schedule.epochs) + ") does not match run (" +
                      std::to_string(run.train_size) + " x " + std::to_string(run.epochs) + ")");
  }
  run.schedule.validate();
}

}  // namespace

const char* optimizer_kind_name(OptimizerSpec::Kind kind) {
  return kind == OptimizerSpec::Kind::kSgd ? "sgd" : "adam";
}

TrainRun with_eta0(TrainRun run, double eta0) {
  run.schedule.eta0 = eta0;
  return run;
}

TrainResult train(const TrainRun& run) {
  validate_run(run);

  const Dataset& data = *run.dataset;
  const std::size_t n = run.train_size;
  const std::size_t dim = data.feature_dim;

  TrainResult result;
  MlpParams params = init_mlp(run.layer_sizes, mix64(run.seed, kInitStream));
  AdamState adam;
  if (run.optimizer.kind == OptimizerSpec::Kind::kAdam) {
    adam = AdamState::init(params, run.optimizer.adam);
  }

  std::vector<std::size_t> order(n);
  Batch batch;
  std::uint64_t examples_seen = 0;
  bool diverged = false;

  for (int epoch = 0; epoch < run.epochs && !diverged; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(mix64(run.seed, kShuffleStream + static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    for (std::size_t start = 0; start < n; start += run.batch_size) {
      const std::size_t count = std::min(run.batch_size, n - start);  // last batch kept
      batch.inputs = Matrix2D(count, dim);
      batch.labels.resize(count);
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t src = order[start + b];
        std::memcpy(batch.inputs.row(b), data.train_inputs.row(src), dim * sizeof(double));
        batch.labels[b] = data.train_labels[src];
      }

      const double eta = eta_at(run.schedule, examples_seen);
      const LossAndGrad lg = loss_and_grad(params, batch);
      if (!std::isfinite(lg.loss)) {
        diverged = true;
        break;
      }

      bool step_ok = false;
      if (run.optimizer.kind == OptimizerSpec::Kind::kSgd) {
        step_ok = sgd_step(params, lg.grads, eta);
      } else {
        step_ok = adam_step(params, adam, lg.grads, eta);
      }
      if (!step_ok) {
        diverged = true;
        break;
      }

      examples_seen += count;
      result.loss_curve.push_back({examples_seen, eta, lg.loss});
    }
  }

  if (diverged) {
    result.diverged = true;
    result.final_eval_loss = kInf;
    result.eval_accuracy = 0.0;
    result.final_params = std::move(params);
    return result;
  }

  const EvalResult eval = evaluate(params, data);
  result.final_eval_loss = eval.mean_loss;
  result.eval_accuracy = eval.accuracy;
  result.diverged = !std::isfinite(eval.mean_loss);
  if (result.diverged) {
    result.final_eval_loss = kInf;
  }
  result.final_params = std::move(params);
  return result;
}

std::vector<double> make_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0) || !(hi > lo)) {
    throw ConfigError("make_grid: need 0 < lo < hi, got lo = " + std::to_string(lo) +
                      ", hi = " + std::to_string(hi));
  }
  if (points_per_decade < 1) {
    throw ConfigError("make_grid: points_per_decade must be >= 1");
  }
  const double span = std::log10(hi / lo);
  const int intervals =
      std::max(1, static_cast<int>(std::ceil(span * points_per_decade - 1e-9)));
  std::vector<double> grid(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) {
    grid[static_cast<std::size_t>(i)] =
        lo * std::pow(10.0, span * static_cast<double>(i) / static_cast<double>(intervals));
  }
  grid.front() = lo;
  grid.back() = hi;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) {
      throw ConfigError("make_grid: grid is not strictly increasing");
    }
  }
  return grid;
}

double pick_best_rate(const std::vector<RateRecord>& records) {
  if (records.empty()) {
    throw ConfigError("pick_best_rate: no records");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const RateRecord& r = records[i];
    const RateRecord& b = records[best];
    if (r.mean_eval_loss < b.mean_eval_loss ||
        (r.mean_eval_loss == b.mean_eval_loss && r.lr < b.lr)) {
      best = i;
    }
  }
  return records[best].lr;
}

bool SweepResult::all_diverged() const {
  for (const RateRecord& r : records) {
    if (std::isfinite(r.mean_eval_loss)) {
      return false;
    }
  }
  return true;
}

namespace {

RateRecord summarize_rate(double lr, const std::vector<double>& losses) {
  RateRecord rec;
  rec.lr = lr;
  for (double l : losses) {
    if (!std::isfinite(l)) {
      ++rec.diverged_count;
    }
  }
  if (rec.diverged_count > 0) {
    rec.mean_eval_loss = kInf;
    rec.std_eval_loss = kInf;
    return rec;
  }
  const double n = static_cast<double>(losses.size());
  double mean = 0.0;
  for (double l : losses) {
    mean += l;
  }
  mean /= n;
  double var = 0.0;
  if (losses.size() > 1) {
    for (double l : losses) {
      var += (l - mean) * (l - mean);
    }
    var /= n - 1.0;  // sample variance
  }
  rec.mean_eval_loss = mean;
  rec.std_eval_loss = std::sqrt(var);
  return rec;
}

// Runs one task per (rate, repeat) pair; slot-indexed results keep the
// outcome identical for any thread count.
std::vector<double> run_grid(const TrainRun& template_run, const std::vector<double>& grid,
                             int repeats, int threads) {
  const std::size_t tasks = grid.size() * static_cast<std::size_t>(repeats);
  std::vector<double> losses(tasks);
  auto run_task = [&](std::size_t task) {
    const std::size_t gi = task / static_cast<std::size_t>(repeats);
    const std::size_t rep = task % static_cast<std::size_t>(repeats);
    TrainRun run = with_eta0(template_run, grid[gi]);
    run.seed = template_run.seed + rep;
    losses[task] = train(run).final_eval_loss;
  };

  if (threads <= 1 || tasks <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) {
      run_task(t);
    }
    return losses;
  }

  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(threads), tasks);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t t = next.fetch_add(1); t < tasks; t = next.fetch_add(1)) {
        run_task(t);
      }
    });
  }
  for (std::thread& th : pool) {
    th.join();
  }
  return losses;
}

}  // namespace

SweepResult sweep(const TrainRun& template_run, const std::vector<double>& grid, int repeats,
                  int threads) {
  if (grid.empty()) {
    throw ConfigError("sweep: empty learning-rate grid");
  }
  if (!std::is_sorted(grid.begin(), grid.end())) {
    throw ConfigError("sweep: grid must be sorted ascending");
  }
  if (repeats < 1) {
    throw ConfigError("sweep: repeats must be >= 1");
  }

  const std::vector<double> losses = run_grid(template_run, grid, repeats, threads);

  SweepResult result;
  result.repeats = repeats;
  result.config = template_run;
  result.records.reserve(grid.size());
  for (std::size_t gi = 0; gi < grid.size(); ++gi) {
    std::vector<double> rate_losses(
        losses.begin() + static_cast<std::ptrdiff_t>(gi * static_cast<std::size_t>(repeats)),
        losses.begin() + static_cast<std::ptrdiff_t>((gi + 1) * static_cast<std::size_t>(repeats)));
    result.records.push_back(summarize_rate(grid[gi], rate_losses));
  }
  result.best_lr = pick_best_rate(result.records);
  return result;
}

SweepResult refine(const SweepResult& coarse, int zoom_points, int repeats, int threads) {
  if (coarse.records.empty()) {
    throw ConfigError("refine: empty sweep result");
  }
  if (zoom_points < 2) {
    throw ConfigError("refine: zoom_points must be >= 2");
  }

  std::size_t best = 0;
  for (std::size_t i = 0; i < coarse.records.size(); ++i) {
    if (coarse.records[i].lr == coarse.best_lr) {
      best = i;
    }
  }
  // Zoom span: the best rate's grid neighbors, or one octave beyond when the
  // optimum sits on a grid boundary.
  const double lo = best > 0 ? coarse.records[best - 1].lr : coarse.best_lr / 2.0;
  const double hi =
      best + 1 < coarse.records.size() ? coarse.records[best + 1].lr : coarse.best_lr * 2.0;

  std::vector<double> zoom_grid(static_cast<std::size_t>(zoom_points));
  const double log_lo = std::log10(lo);
  const double log_step = std::log10(hi / lo) / static_cast<double>(zoom_points - 1);
  for (int i = 0; i < zoom_points; ++i) {
    zoom_grid[static_cast<std::size_t>(i)] = std::pow(10.0, log_lo + log_step * i);
  }
  zoom_grid.front() = lo;
  zoom_grid.back() = hi;

  const SweepResult zoomed = sweep(coarse.config, zoom_grid, repeats, threads);

  SweepResult merged;
  merged.repeats = repeats;
  merged.config = coarse.config;
  merged.refined_log10_step = log_step;
  merged.records = coarse.records;
  for (const RateRecord& r : zoomed.records) {
    const bool duplicate =
        std::any_of(merged.records.begin(), merged.records.end(),
                    [&](const RateRecord& e) { return e.lr == r.lr; });
    if (!duplicate) {
      merged.records.push_back(r);
    }
  }
  std::sort(merged.records.begin(), merged.records.end(),
            [](const RateRecord& a, const RateRecord& b) { return a.lr < b.lr; });
  merged.best_lr = pick_best_rate(merged.records);
  return merged;
}

KappaEstimate estimate_kappa(const SweepResult& result) {
  if (result.config.schedule.shape.kind != ShapeKind::kConstant) {
    throw ConfigError("estimate_kappa: sweep used shape '" +
                      std::string(shape_kind_name(result.config.schedule.shape.kind)) +
                      "'; kappa is defined from the constant-rate optimum");
  }
  if (result.records.empty()) {
    throw ConfigError("estimate_kappa: empty sweep result");
  }
  KappaEstimate est;
  est.best_lr = result.best_lr;
  est.train_size = result.config.train_size;
  est.epochs = result.config.epochs;
  est.optimizer = result.config.optimizer.kind;
  est.kappa = result.best_lr * static_cast<double>(est.train_size) *
              static_cast<double>(est.epochs);
  return est;
}

double predict_constant_lr(const KappaEstimate& kappa, std::uint64_t target_total_data) {
  if (target_total_data < 1) {
    throw ConfigError("predict_constant_lr: total data must be >= 1");
  }
  // At the measurement's own scale the prediction is the measurement; the
  // round trip must be exact, not exact-up-to-rounding.
  const std::uint64_t measured =
      static_cast<std::uint64_t>(kappa.train_size) * static_cast<std::uint64_t>(kappa.epochs);
  if (target_total_data == measured && kappa.best_lr > 0.0) {
    return kappa.best_lr;
  }
  return kappa.kappa / static_cast<double>(target_total_data);
}

double predict_schedule_lr(const KappaEstimate& kappa, const ScheduleShape& shape,
                           std::size_t epoch_size, int epochs) {
  return solve_eta0(kappa.kappa, shape, epoch_size, epochs);
}

ProportionalityReport proportionality_report(
    const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) {
    throw DataError("proportionality_report: need at least 2 points");
  }
  for (const auto& [scale, lr] : points) {
    if (!(scale > 0.0) || !(lr > 0.0)) {
      throw DataError("proportionality_report: scales and rates must be positive");
    }
  }

  ProportionalityReport report;

  // log-log least squares
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& [scale, lr] : points) {
    mean_x += std::log(scale);
    mean_y += std::log(lr);
  }
  const double n = static_cast<double>(points.size());
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& [scale, lr] : points) {
    const double dx = std::log(scale) - mean_x;
    sxx += dx * dx;
    sxy += dx * (std::log(lr) - mean_y);
  }
  if (sxx == 0.0) {
    report.degenerate = true;
    report.slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    report.slope = sxy / sxx;
  }

  // every available doubling pair
  for (const auto& [scale_a, lr_a] : points) {
    for (const auto& [scale_b, lr_b] : points) {
      if (std::abs(scale_b - 2.0 * scale_a) <= 1e-9 * scale_a) {
        report.doubling_ratios.push_back({scale_a, lr_b / lr_a});
      }
    }
  }
  if (report.doubling_ratios.empty()) {
    report.median_doubling_ratio = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<double> ratios;
    ratios.reserve(report.doubling_ratios.size());
    for (const DoublingRatio& r : report.doubling_ratios) {
      ratios.push_back(r.ratio);
    }
    std::sort(ratios.begin(), ratios.end());
    const std::size_t mid = ratios.size() / 2;
    report.median_doubling_ratio =
        ratios.size() % 2 == 1 ? ratios[mid] : 0.5 * (ratios[mid - 1] + ratios[mid]);
  }

  // kappa dispersion across points
  for (const auto& [scale, lr] : points) {
    report.kappa_values.push_back(lr * scale);
  }
  double mean_k = 0.0;
  for (double k : report.kappa_values) {
    mean_k += k;
  }
  mean_k /= n;
  double var_k = 0.0;
  if (points.size() > 1) {
    for (double k : report.kappa_values) {
      var_k += (k - mean_k) * (k - mean_k);
    }
    var_k /= n - 1.0;
  }
  report.kappa_cv = mean_k == 0.0 ? 0.0 : std::sqrt(var_k) / mean_k;

  return report;
}

}  // namespace kappatune
