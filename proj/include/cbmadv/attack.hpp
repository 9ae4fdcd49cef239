#pragma once

#include <span>
#include <string>
#include <vector>

#include "cbmadv/dataset.hpp"
#include "cbmadv/mlp.hpp"
#include "cbmadv/models.hpp"

namespace cbmadv {

struct AttackConfig {
  std::vector<double> epsilon_sweep = {0.01, 0.02, 0.03, 0.04, 0.05};
  void validate() const;  // finite, non-negative, strictly increasing
};

// One evasion sample: |perturbed[i] - original[i]| <= epsilon + 1e-12.
struct AdversarialSample {
  FeatureVector original;
  FeatureVector perturbed;
  Label true_label;
  double epsilon;
};

struct AdversarialSet {
  std::vector<AdversarialSample> samples;
  std::string substitute_fingerprint;
  double epsilon = 0.0;
};

// Single sign-gradient step x* = x + epsilon * sign(grad_x loss), with
// sign(0) = 0 and no clipping. x is expected in standardized feature units.
AdversarialSample fgsm_craft(const MlpModel& substitute, const FeatureVector& x,
                             Label y, double epsilon);

// One sample per pool row, order preserving. Throws EmptyPool.
AdversarialSet craft_attack_set(const MlpModel& substitute, const LabeledDataset& pool,
                                double epsilon);

enum class Norm { L0, L2, Linf };

// L0 counts coordinates differing by more than 1e-12; L2 is the Euclidean
// distance; Linf the largest absolute coordinate difference. Throws
// DimensionMismatch for unequal lengths.
double lp_distance(std::span<const double> x, std::span<const double> x_star, Norm norm);
double lp_distance(const FeatureVector& x, const FeatureVector& x_star, Norm norm);

// Untargeted criterion: the victim's prediction on the perturbed point
// differs from the true label.
bool attack_success(const TrainedModel& victim, const AdversarialSample& sample);
double attack_success_rate(const TrainedModel& victim, const AdversarialSet& set);

// CSV export: 12 original columns, 12 `adv_`-prefixed perturbed columns,
// `label`, `epsilon`.
void save_adversarial_csv(const std::string& path, const AdversarialSet& set);
AdversarialSet load_adversarial_csv(const std::string& path);

}  // namespace cbmadv
