#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cbmadv {

// Fixed-length slice of a vibration time series.
struct SignalWindow {
  std::vector<double> samples;  // acceleration, arbitrary units
  double sample_rate_hz = 0.0;
};

inline constexpr std::size_t kFeatureCount = 12;

// Index constants for FeatureVector components. The order is also the column
// order of the feature CSV format.
enum FeatureIndex : std::size_t {
  kClearanceFactor = 0,
  kCrestFactor,
  kImpulseFactor,
  kKurtosis,
  kMean,
  kPeak,
  kRms,
  kShapeFactor,
  kSkewness,
  kStdDev,
  kPeakFreqAmplitude,
  kPeakFrequency,
};

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "clearance_factor", "crest_factor", "impulse_factor",      "kurtosis",
    "mean",             "peak",         "rms",                 "shape_factor",
    "skewness",         "std_dev",      "peak_freq_amplitude", "peak_frequency",
};

// Twelve vibration features, raw or standardized depending on context.
struct FeatureVector {
  std::array<double, kFeatureCount> v{};

  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
  double* data() { return v.data(); }
  const double* data() const { return v.data(); }
  static constexpr std::size_t size() { return kFeatureCount; }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

// Per-feature z-score parameters fitted on a training partition.
class Standardizer {
 public:
  Standardizer() = default;
  Standardizer(const std::array<double, kFeatureCount>& mean,
               const std::array<double, kFeatureCount>& std_dev);

  bool fitted() const { return fitted_; }
  const std::array<double, kFeatureCount>& mean() const { return mean_; }
  const std::array<double, kFeatureCount>& std_dev() const { return std_; }

  void save(const std::string& path) const;
  static Standardizer load(const std::string& path);

 private:
  std::array<double, kFeatureCount> mean_{};
  std::array<double, kFeatureCount> std_{};
  bool fitted_ = false;
};

// Cuts a signal into non-overlapping consecutive windows of
// round(window_seconds * sample_rate_hz) samples; the trailing remainder is
// discarded. Throws SignalTooShort when not even one window fits.
std::vector<SignalWindow> window_signal(const std::vector<double>& signal,
                                        double sample_rate_hz,
                                        double window_seconds);

// Maps a window to the 12-feature representation. Time-domain statistics use
// population moments; the frequency pair comes from the magnitude spectrum of
// the window's DFT with the DC bin excluded. Throws DegenerateWindow for an
// all-zero window.
FeatureVector extract_features(const SignalWindow& window);

// Fits per-column mean and population standard deviation. Throws
// ZeroVarianceFeature naming the first degenerate column.
Standardizer fit_standardizer(const std::vector<FeatureVector>& rows);

FeatureVector standardize(const FeatureVector& raw, const Standardizer& s);
FeatureVector inverse_standardize(const FeatureVector& z, const Standardizer& s);

// Signal CSV: header row required, either `time_s,amplitude` or `amplitude`.
// The sample rate is supplied out-of-band.
std::vector<double> read_signal_csv(const std::string& path);
void write_signal_csv(const std::string& path, const std::vector<double>& samples,
                      double sample_rate_hz);

}  // namespace cbmadv
