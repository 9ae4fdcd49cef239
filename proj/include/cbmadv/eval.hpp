#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cbmadv/attack.hpp"
#include "cbmadv/dataset.hpp"
#include "cbmadv/metrics.hpp"
#include "cbmadv/mlp.hpp"
#include "cbmadv/models.hpp"

namespace cbmadv {

struct CrossValidationResult {
  double mean_macro_f1 = 0.0;
  std::vector<double> fold_scores;
  std::vector<TrainedModel> fold_models;
};

// k-fold cross-validation of one algorithm; fold model seeds are derived from
// cfg.seed so the whole run is deterministic.
CrossValidationResult cross_validate(Algorithm kind, const TrainConfig& cfg,
                                     const LabeledDataset& ds, int k);

struct DistanceStats {
  double mean_l0 = 0.0;
  double mean_l2 = 0.0;
  double mean_linf = 0.0;
  double max_linf = 0.0;
};
DistanceStats distance_stats(const AdversarialSet& set);

struct SweepPoint {
  double epsilon = 0.0;
  double f1 = 0.0;
  double weighted_f1 = 0.0;
  double success_rate = 0.0;
  ConfusionMatrix confusion;
  DistanceStats distance;
};

struct ModelReport {
  std::string algorithm;
  bool excluded = false;   // failed the cross-validation gate
  double cv_f1 = 0.0;      // gate score, when the caller ran the gate
  double clean_f1 = 0.0;   // macro-F1 on the unperturbed pool
  double clean_weighted_f1 = 0.0;
  ConfusionMatrix clean_confusion;
  std::vector<SweepPoint> sweep;
  std::vector<SweepPoint> defended_sweep;  // present in defended runs
  double defended_clean_f1 = 0.0;
};

struct RobustnessReport {
  std::vector<ModelReport> models;
  std::uint64_t master_seed = 0;
  std::string substitute_fingerprint;
};

struct NamedModel {
  std::string name;
  TrainedModel model;
};

// For each epsilon in the sweep, crafts one adversarial set against the
// substitute and scores every victim on it; clean (epsilon = 0) baselines are
// always recorded.
RobustnessReport transfer_evaluate(const std::vector<NamedModel>& victims,
                                   const MlpModel& substitute, const LabeledDataset& pool,
                                   const AttackConfig& sweep);

struct DefenseConfig {
  double perturbed_fraction = 0.20;
  double defense_epsilon = 0.03;
  std::uint64_t seed = 0;
  void validate() const;
};

// Replaces a seeded stratified fraction of the training rows with their FGSM
// perturbations (labels unchanged) and retrains. The selection has exactly
// floor(fraction * n) rows.
TrainedModel adversarial_training(Algorithm kind, const TrainConfig& cfg,
                                  const LabeledDataset& victim_train,
                                  const DefenseConfig& defense, const MlpModel& substitute);

// Same selection the defense uses, exposed for auditing.
std::vector<std::size_t> defense_selection(const std::vector<Label>& labels,
                                           const DefenseConfig& defense);

// JSON document: models[] with algorithm, clean_f1, sweep[] of
// {epsilon, f1, success_rate, confusion[4][4], ...}.
void save_report_json(const std::string& path, const RobustnessReport& report);
// Flat CSV `algorithm,epsilon,f1,success_rate`; set `defended` to export the
// defended sweeps instead of the primary ones.
void save_report_csv(const std::string& path, const RobustnessReport& report,
                     bool defended = false);

}  // namespace cbmadv
