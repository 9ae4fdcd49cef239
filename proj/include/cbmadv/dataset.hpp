#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cbmadv/features.hpp"

namespace cbmadv {

enum class Label : std::uint8_t { Ball = 0, InnerRace = 1, OuterRace = 2, Normal = 3 };

inline constexpr std::size_t kClassCount = 4;
inline constexpr std::array<Label, kClassCount> kAllLabels = {
    Label::Ball, Label::InnerRace, Label::OuterRace, Label::Normal};

std::string_view label_name(Label l);          // "ball", "inner_race", ...
std::string_view label_display_name(Label l);  // "Ball", "Inner race", ...

// Accepts case/format variants ("Inner Race", "INNER-RACE", "inner_race").
// Throws UnknownLabel otherwise.
Label parse_label(std::string_view text);

struct LabeledDataset {
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;
  bool standardized = false;
  std::string source;

  std::size_t size() const { return rows.size(); }
  std::array<std::size_t, kClassCount> class_counts() const;
  void push_back(const FeatureVector& row, Label label);
};

// Applies a fitted standardizer to every row.
LabeledDataset standardize_dataset(const LabeledDataset& ds, const Standardizer& s);

struct SplitSpec {
  double substitute_fraction = 0.40;
  double attack_fraction = 0.20;
  double victim_fraction = 0.40;
  std::uint64_t seed = 0;

  void validate() const;  // fractions positive, sum to 1 within 1e-9
};

struct SplitResult {
  LabeledDataset substitute_train;
  LabeledDataset attack_pool;
  LabeledDataset victim_train;
};

// Index-level stratified split; per-class counts follow
// round(fraction * class_size) with the remainder assigned to the victim
// partition. Deterministic under spec.seed.
std::array<std::vector<std::size_t>, 3> split_indices(const std::vector<Label>& labels,
                                                      const SplitSpec& spec);
SplitResult split_dataset(const LabeledDataset& ds, const SplitSpec& spec);

// Per-class synthetic signal parameters. Fault classes ride on the same base
// signal as Normal (band-limited noise plus a low-amplitude carrier) and add a
// train of exponentially decaying impulses, each exciting `carrier_hz`, at
// `impulse_rate_hz` repetitions per second.
struct ClassSignalParams {
  double carrier_hz = 0.0;
  double impulse_rate_hz = 0.0;
  double impulse_amplitude = 0.0;
  double noise_std = 0.0;
};

struct SyntheticConfig {
  std::array<int, kClassCount> per_class_count{200, 200, 200, 200};
  double sample_rate_hz = 12000.0;
  double window_seconds = 0.1;
  std::array<ClassSignalParams, kClassCount> params;  // indexed by Label
  std::uint64_t seed = 7;

  static SyntheticConfig defaults();
  void validate() const;  // ConfigError on Nyquist violations or bad counts
};

struct SyntheticDataset {
  std::vector<SignalWindow> windows;  // aligned with dataset rows
  LabeledDataset dataset;             // raw (unstandardized) features
};

SyntheticDataset synthesize_bearing_dataset(const SyntheticConfig& cfg);

// k folds of {0..n-1}: validation sets are disjoint, cover every index, and
// differ in size by at most one (earlier folds take the remainder).
struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
std::vector<Fold> kfold_partition(std::size_t n, int k, std::uint64_t seed);

// Feature CSV: the 12 feature columns in FeatureVector order plus `label`.
LabeledDataset load_feature_csv(const std::string& path);
void save_feature_csv(const std::string& path, const LabeledDataset& ds);

}  // namespace cbmadv
