#pragma once

// Named reproduction scenarios: each one runs a bundle of sweeps, writes the
// CSVs a plotting tool needs, and checks its headline claim against fixed
// thresholds. The same entry points back both `repro` on the command line and
// the acceptance gate, so the shipped checks and the tested checks cannot
// drift apart.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kappatune {

enum class ScenarioId {
  kInverseProportionSgd,   // best rate vs total data, SGD
  kInverseProportionAdam,  // best rate vs total data, Adam
  kDataEpochEquivalence,   // N x E determines the optimum, not N or E alone
  kKappaConstancy,         // kappa stable across epoch counts
  kDecayPredict,           // kappa from a constant sweep predicts halving-decay optima
  kCyclicPredict,          // same, cyclical tripling
};

const char* scenario_name(ScenarioId id);
ScenarioId scenario_from_name(const std::string& name);  // ConfigError lists valid ids
std::vector<std::string> scenario_names();

struct CheckLine {
  std::string label;
  std::string detail;  // measured value and the band it must fall in
  bool pass = false;
};

struct ScenarioReport {
  std::string scenario;
  std::string scale;
  std::vector<CheckLine> checks;
  std::vector<std::filesystem::path> artifacts;

  bool all_passed() const;
};

struct ScenarioOptions {
  std::string scale = "desk";  // "desk" (synthetic, minutes) | "full" (MNIST, hours)
  std::filesystem::path out_dir = "out";
  int threads = 1;
  std::string data_dir;  // MNIST directory for full scale; env fallback applies
  std::uint64_t base_seed = 1234;
  int repeats = 3;
};

ScenarioReport run_scenario(ScenarioId id, const ScenarioOptions& opts);

}  // namespace kappatune
