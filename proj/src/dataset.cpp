#include "cbmadv/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>

#include "cbmadv/error.hpp"
#include "cbmadv/rng.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Base signal shared by every class: low-pass filtered Gaussian noise plus a
// low-amplitude carrier at the Normal class's tonal frequency.
constexpr double kBaseCarrierAmplitude = 0.15;
constexpr double kNoiseLowpassAlpha = 0.6;
// Impulse response decay time constant and the per-window fault severity
// range (defect size and load vary continuously across windows).
constexpr double kImpulseDecaySeconds = 0.0015;
constexpr double kSeverityLo = 0.85;
constexpr double kSeverityHi = 1.25;

}  // namespace

std::string_view label_name(Label l) {
  switch (l) {
    case Label::Ball: return "ball";
    case Label::InnerRace: return "inner_race";
    case Label::OuterRace: return "outer_race";
    case Label::Normal: return "normal";
  }
  return "?";
}

std::string_view label_display_name(Label l) {
  switch (l) {
    case Label::Ball: return "Ball";
    case Label::InnerRace: return "Inner race";
    case Label::OuterRace: return "Outer race";
    case Label::Normal: return "Normal";
  }
  return "?";
}

Label parse_label(std::string_view text) {
  std::string canon;
  canon.reserve(text.size());
  for (char c : trim(text)) {
    if (c == ' ' || c == '-') c = '_';
    canon.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  if (canon == "ball") return Label::Ball;
  if (canon == "inner_race" || canon == "innerrace") return Label::InnerRace;
  if (canon == "outer_race" || canon == "outerrace") return Label::OuterRace;
  if (canon == "normal") return Label::Normal;
  throw UnknownLabel("unknown class label '" + std::string(text) + "'");
}

std::array<std::size_t, kClassCount> LabeledDataset::class_counts() const {
  std::array<std::size_t, kClassCount> counts{};
  for (Label l : labels) ++counts[static_cast<std::size_t>(l)];
  return counts;
}

void LabeledDataset::push_back(const FeatureVector& row, Label label) {
  rows.push_back(row);
  labels.push_back(label);
}

LabeledDataset standardize_dataset(const LabeledDataset& ds, const Standardizer& s) {
  LabeledDataset out;
  out.rows.reserve(ds.size());
  for (const auto& r : ds.rows) out.rows.push_back(standardize(r, s));
  out.labels = ds.labels;
  out.standardized = true;
  out.source = ds.source;
  return out;
}

void SplitSpec::validate() const {
  if (!(substitute_fraction > 0.0) || !(attack_fraction > 0.0) ||
      !(victim_fraction > 0.0))
    throw ConfigError("split fractions must be positive");
  const double total = substitute_fraction + attack_fraction + victim_fraction;
  if (std::fabs(total - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1, got " + format_double(total));
}

std::array<std::vector<std::size_t>, 3> split_indices(const std::vector<Label>& labels,
                                                      const SplitSpec& spec) {
  spec.validate();
  if (labels.empty()) throw ConfigError("cannot split an empty dataset");

  std::array<std::vector<std::size_t>, 3> parts;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (static_cast<std::size_t>(labels[i]) == c) idx.push_back(i);
    if (idx.empty()) continue;
    if (idx.size() < 3)
      throw ClassTooSmall("class '" + std::string(label_name(kAllLabels[c])) +
                          "' has only " + std::to_string(idx.size()) +
                          " rows; need at least 3 to split");
    Rng rng(derive_seed(spec.seed, seeds::kSplitBase + c));
    rng.shuffle(idx);

    const double n = static_cast<double>(idx.size());
    const auto n_sub = static_cast<std::size_t>(std::llround(spec.substitute_fraction * n));
    const auto n_att = static_cast<std::size_t>(std::llround(spec.attack_fraction * n));
    if (n_sub + n_att >= idx.size() || n_sub == 0 || n_att == 0)
      throw ClassTooSmall("class '" + std::string(label_name(kAllLabels[c])) +
                          "' is too small for the requested split fractions");
    parts[0].insert(parts[0].end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_sub));
    parts[1].insert(parts[1].end(), idx.begin() + static_cast<std::ptrdiff_t>(n_sub),
                    idx.begin() + static_cast<std::ptrdiff_t>(n_sub + n_att));
    parts[2].insert(parts[2].end(), idx.begin() + static_cast<std::ptrdiff_t>(n_sub + n_att),
                    idx.end());
  }
  for (auto& p : parts) std::sort(p.begin(), p.end());
  return parts;
}

SplitResult split_dataset(const LabeledDataset& ds, const SplitSpec& spec) {
  if (ds.rows.size() != ds.labels.size())
    throw ConfigError("dataset rows and labels disagree in length");
  const auto parts = split_indices(ds.labels, spec);
  SplitResult out;
  LabeledDataset* targets[3] = {&out.substitute_train, &out.attack_pool, &out.victim_train};
  const char* names[3] = {"substitute", "attack", "victim"};
  for (int p = 0; p < 3; ++p) {
    targets[p]->rows.reserve(parts[p].size());
    for (std::size_t i : parts[static_cast<std::size_t>(p)])
      targets[p]->push_back(ds.rows[i], ds.labels[i]);
    targets[p]->standardized = ds.standardized;
    targets[p]->source = ds.source + ":" + names[p];
  }
  return out;
}

SyntheticConfig SyntheticConfig::defaults() {
  SyntheticConfig cfg;
  cfg.params[static_cast<std::size_t>(Label::Ball)] = {2700.0, 140.0, 2.0, 0.25};
  cfg.params[static_cast<std::size_t>(Label::InnerRace)] = {2760.0, 165.0, 2.15, 0.25};
  cfg.params[static_cast<std::size_t>(Label::OuterRace)] = {2640.0, 110.0, 1.85, 0.25};
  cfg.params[static_cast<std::size_t>(Label::Normal)] = {55.0, 0.0, 0.0, 0.25};
  return cfg;
}

void SyntheticConfig::validate() const {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("synthetic sample rate must be positive");
  if (!(window_seconds > 0.0)) throw ConfigError("synthetic window length must be positive");
  const double nyquist = sample_rate_hz / 2.0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (per_class_count[c] <= 0)
      throw ConfigError("per-class window count must be positive for class '" +
                        std::string(label_name(kAllLabels[c])) + "'");
    const auto& p = params[c];
    if (p.carrier_hz >= nyquist || p.impulse_rate_hz >= nyquist)
      throw ConfigError("class '" + std::string(label_name(kAllLabels[c])) +
                        "': frequency at or above Nyquist (" + format_double(nyquist) + " Hz)");
    if (p.carrier_hz < 0.0 || p.impulse_rate_hz < 0.0 || p.noise_std < 0.0)
      throw ConfigError("negative synthetic signal parameter");
    if (p.impulse_amplitude > 0.0 && p.impulse_rate_hz <= 0.0)
      throw ConfigError("class '" + std::string(label_name(kAllLabels[c])) +
                        "': impulses require a positive repetition frequency");
  }
}

namespace {

SignalWindow synth_window(const SyntheticConfig& cfg, Label label, Rng& rng) {
  const double fs = cfg.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(cfg.window_seconds * fs));
  const auto& p = cfg.params[static_cast<std::size_t>(label)];
  const auto& base = cfg.params[static_cast<std::size_t>(Label::Normal)];

  SignalWindow w;
  w.sample_rate_hz = fs;
  w.samples.assign(n, 0.0);

  // Shaft speed drifts a few percent per window; the drift factor scales the
  // base carrier and the defect repetition rate together. It also keeps the
  // spectral peak from freezing onto a single DFT bin.
  const double speed = 1.0 + 0.06 * (rng.uniform() - 0.5);
  const double carrier_phase = rng.uniform(0.0, 2.0 * kPi);
  const double carrier_hz = base.carrier_hz * speed;
  double lp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / fs;
    lp = kNoiseLowpassAlpha * lp + (1.0 - kNoiseLowpassAlpha) * rng.normal() * p.noise_std;
    w.samples[i] = kBaseCarrierAmplitude * std::sin(2.0 * kPi * carrier_hz * t + carrier_phase) + lp;
  }

  if (p.impulse_amplitude > 0.0) {
    const double severity = rng.uniform(kSeverityLo, kSeverityHi);
    const double resonance_hz = p.carrier_hz * (1.0 + 0.04 * (rng.uniform() - 0.5));
    const double period_s = 1.0 / (p.impulse_rate_hz * speed);
    const double tail_s = 5.0 * kImpulseDecaySeconds;
    double t0 = rng.uniform(0.0, period_s);
    while (t0 < cfg.window_seconds) {
      const double amp = p.impulse_amplitude * severity * rng.uniform(0.9, 1.1);
      const auto i0 = static_cast<std::size_t>(std::ceil(t0 * fs));
      const auto i1 = std::min(n, static_cast<std::size_t>(std::ceil((t0 + tail_s) * fs)));
      for (std::size_t i = i0; i < i1; ++i) {
        const double dt = static_cast<double>(i) / fs - t0;
        w.samples[i] += amp * std::exp(-dt / kImpulseDecaySeconds) *
                        std::sin(2.0 * kPi * resonance_hz * dt);
      }
      t0 += period_s;
    }
  }
  return w;
}

}  // namespace

SyntheticDataset synthesize_bearing_dataset(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticDataset out;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const Label label = kAllLabels[c];
    const std::uint64_t class_seed = derive_seed(cfg.seed, seeds::kSynthClassBase + c);
    for (int i = 0; i < cfg.per_class_count[c]; ++i) {
      Rng rng(derive_seed(class_seed, static_cast<std::uint64_t>(i)));
      SignalWindow w = synth_window(cfg, label, rng);
      out.dataset.push_back(extract_features(w), label);
      out.windows.push_back(std::move(w));
    }
  }
  out.dataset.standardized = false;
  out.dataset.source = "synthetic(seed=" + std::to_string(cfg.seed) + ")";
  return out;
}

std::vector<Fold> kfold_partition(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw InvalidK("k must be at least 2, got " + std::to_string(k));
  if (n < static_cast<std::size_t>(k))
    throw InvalidK("cannot make " + std::to_string(k) + " folds from " +
                   std::to_string(n) + " rows");
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, seeds::kKfold));
  rng.shuffle(idx);

  std::vector<Fold> folds(static_cast<std::size_t>(k));
  std::size_t start = 0;
  for (int f = 0; f < k; ++f) {
    const std::size_t len = n / static_cast<std::size_t>(k) +
                            (static_cast<std::size_t>(f) < n % static_cast<std::size_t>(k) ? 1 : 0);
    auto& fold = folds[static_cast<std::size_t>(f)];
    fold.validation.assign(idx.begin() + static_cast<std::ptrdiff_t>(start),
                           idx.begin() + static_cast<std::ptrdiff_t>(start + len));
    fold.train.reserve(n - len);
    fold.train.insert(fold.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(start));
    fold.train.insert(fold.train.end(), idx.begin() + static_cast<std::ptrdiff_t>(start + len), idx.end());
    std::sort(fold.validation.begin(), fold.validation.end());
    std::sort(fold.train.begin(), fold.train.end());
    start += len;
  }
  return folds;
}

LabeledDataset load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty feature file '" + path + "'");
  const auto header = split(line, ',');
  if (header.size() != kFeatureCount + 1)
    throw ParseError(1, "feature CSV header must have " +
                            std::to_string(kFeatureCount + 1) + " columns");
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    if (header[i] != kFeatureNames[i])
      throw ParseError(1, "expected column '" + std::string(kFeatureNames[i]) +
                              "', got '" + header[i] + "'");
  if (header.back() != "label") throw ParseError(1, "last column must be 'label'");

  LabeledDataset ds;
  ds.source = path;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != kFeatureCount + 1)
      throw ParseError(line_no, "expected " + std::to_string(kFeatureCount + 1) +
                                    " columns, got " + std::to_string(cols.size()) +
                                    " at line " + std::to_string(line_no));
    FeatureVector f;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      if (!parse_double(cols[i], f[i]))
        throw ParseError(line_no, "bad number '" + cols[i] + "' at line " +
                                      std::to_string(line_no));
    ds.push_back(f, parse_label(cols.back()));
  }
  return ds;
}

void save_feature_csv(const std::string& path, const LabeledDataset& ds) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  for (std::size_t i = 0; i < kFeatureCount; ++i) out << kFeatureNames[i] << ',';
  out << "label\n";
  for (std::size_t r = 0; r < ds.size(); ++r) {
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      out << format_double(ds.rows[r][i]) << ',';
    out << label_name(ds.labels[r]) << '\n';
  }
}

}  // namespace cbmadv
