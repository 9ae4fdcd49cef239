#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbmadv/attack.hpp"
#include "cbmadv/dataset.hpp"
#include "cbmadv/eval.hpp"
#include "cbmadv/models.hpp"

namespace cbmadv {

enum class InputMode { Unset, Features, Signals, Synthetic };

// Everything a `run` needs, assembled from a flat key = value config file
// plus command-line overrides. Exactly one input mode must be selected.
struct ExperimentConfig {
  InputMode input_mode = InputMode::Unset;
  std::string features_path;
  std::map<Label, std::string> signal_paths;
  double signal_sample_rate_hz = 12000.0;
  double signal_window_seconds = 0.1;

  SyntheticConfig synthetic = SyntheticConfig::defaults();
  SplitSpec split;
  TrainConfig train;
  std::vector<std::size_t> substitute_hidden = {64, 64, 32};
  AttackConfig attack;
  DefenseConfig defense;
  double gate_min_cv_f1 = 0.95;
  int cv_folds = 5;
  std::vector<Algorithm> victims{kAllAlgorithms.begin(), kAllAlgorithms.end()};
  std::uint64_t master_seed = 35;

  void validate() const;
};

// Applies one `key = value` setting; throws ConfigError for unknown keys or
// bad values.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

// Flat text format: `section.key = value`, '#' comments, blank lines ignored.
ExperimentConfig parse_experiment_config(const std::string& path);

struct CvGateEntry {
  Algorithm algorithm;
  double cv_f1 = 0.0;
  bool passed = false;
};

// Keeps the victims whose cross-validation score reaches the threshold.
std::vector<CvGateEntry> apply_cv_gate(const std::vector<std::pair<Algorithm, double>>& scores,
                                       double threshold);

struct ExperimentResult {
  RobustnessReport report;
  std::vector<CvGateEntry> gate;
  bool any_victim_passed = false;
  bool defended = false;
  std::uint64_t master_seed = 0;
};

// Full pipeline: input -> split -> standardize -> substitute training ->
// CV gate -> victim training -> epsilon-sweep transfer attack -> optional
// adversarial-training rerun. Deterministic under cfg.master_seed.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool defend);

// report.json + figure4.csv (+ figure7.csv for defended runs) under out_dir.
void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir);

// Table-2 style text summary of the gate and sweep results.
std::string experiment_summary(const ExperimentResult& result);

// The name used for the substitute's white-box row in reports.
inline constexpr const char* kSubstituteRowName = "substitute_mlp";

}  // namespace cbmadv
