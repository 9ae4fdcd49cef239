#include "cbmadv/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cbmadv/error.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_window(const SignalWindow& w) {
  if (w.samples.empty()) throw ConfigError("signal window has no samples");
  if (!(w.sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
}

// Magnitude spectrum over bins 1..N/2 by direct DFT. The twiddle table keeps
// the cost at one multiply-add pair per (n, k) term; exact periodicity of
// (n*k) mod N keeps the table small.
void spectral_peak(const std::vector<double>& x, double fs, double& peak_amp,
                   double& peak_hz) {
  const std::size_t n = x.size();
  const std::size_t k_max = n / 2;
  if (k_max < 1) {
    peak_amp = 0.0;
    peak_hz = 0.0;
    return;
  }
  std::vector<double> cos_t(n), sin_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(n);
    cos_t[i] = std::cos(a);
    sin_t[i] = std::sin(a);
  }
  double best_mag2 = -1.0;
  std::size_t best_k = 1;
  for (std::size_t k = 1; k <= k_max; ++k) {
    double re = 0.0, im = 0.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += x[i] * cos_t[idx];
      im -= x[i] * sin_t[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    const double mag2 = re * re + im * im;
    if (mag2 > best_mag2) {
      best_mag2 = mag2;
      best_k = k;
    }
  }
  // 2/N scaling reports the physical amplitude of a bin-aligned sinusoid.
  peak_amp = 2.0 * std::sqrt(best_mag2) / static_cast<double>(n);
  peak_hz = static_cast<double>(best_k) * fs / static_cast<double>(n);
}

}  // namespace

Standardizer::Standardizer(const std::array<double, kFeatureCount>& mean,
                           const std::array<double, kFeatureCount>& std_dev)
    : mean_(mean), std_(std_dev), fitted_(true) {
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (!(std_[i] > 0.0))
      throw ZeroVarianceFeature(i, "standardizer std must be positive for column " +
                                       std::string(kFeatureNames[i]));
  }
}

std::vector<SignalWindow> window_signal(const std::vector<double>& signal,
                                        double sample_rate_hz,
                                        double window_seconds) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  if (!(window_seconds > 0.0)) throw ConfigError("window length must be positive");
  const auto len = static_cast<std::size_t>(std::llround(window_seconds * sample_rate_hz));
  if (len == 0) throw ConfigError("window rounds to zero samples");
  if (signal.size() < len)
    throw SignalTooShort("signal of " + std::to_string(signal.size()) +
                         " samples is shorter than one window of " +
                         std::to_string(len));
  std::vector<SignalWindow> out;
  out.reserve(signal.size() / len);
  for (std::size_t start = 0; start + len <= signal.size(); start += len) {
    SignalWindow w;
    w.samples.assign(signal.begin() + static_cast<std::ptrdiff_t>(start),
                     signal.begin() + static_cast<std::ptrdiff_t>(start + len));
    w.sample_rate_hz = sample_rate_hz;
    out.push_back(std::move(w));
  }
  return out;
}

FeatureVector extract_features(const SignalWindow& window) {
  check_window(window);
  const auto& x = window.samples;
  const double n = static_cast<double>(x.size());

  double sum = 0.0, sum_sq = 0.0, sum_abs = 0.0, sum_sqrt_abs = 0.0, peak = 0.0;
  for (double s : x) {
    sum += s;
    sum_sq += s * s;
    const double a = std::fabs(s);
    sum_abs += a;
    sum_sqrt_abs += std::sqrt(a);
    peak = std::max(peak, a);
  }
  if (peak == 0.0)
    throw DegenerateWindow("all-zero window: crest/shape/impulse/clearance undefined");

  const double mean = sum / n;
  const double rms = std::sqrt(sum_sq / n);
  const double mean_abs = sum_abs / n;
  const double mean_sqrt_abs = sum_sqrt_abs / n;

  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double s : x) {
    const double d = s - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;

  FeatureVector f;
  f[kMean] = mean;
  f[kStdDev] = std::sqrt(m2);
  f[kRms] = rms;
  f[kPeak] = peak;
  f[kCrestFactor] = peak / rms;
  f[kShapeFactor] = rms / mean_abs;
  f[kImpulseFactor] = peak / mean_abs;
  f[kClearanceFactor] = peak / (mean_sqrt_abs * mean_sqrt_abs);
  // Moment ratios of a constant window are defined as zero.
  f[kSkewness] = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  f[kKurtosis] = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
  spectral_peak(x, window.sample_rate_hz, f[kPeakFreqAmplitude], f[kPeakFrequency]);
  return f;
}

Standardizer fit_standardizer(const std::vector<FeatureVector>& rows) {
  if (rows.size() < 2) throw ConfigError("standardizer needs at least 2 rows");
  const double n = static_cast<double>(rows.size());
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> sd{};
  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    double s = 0.0;
    for (const auto& r : rows) s += r[c];
    mean[c] = s / n;
    double var = 0.0;
    for (const auto& r : rows) {
      const double d = r[c] - mean[c];
      var += d * d;
    }
    var /= n;
    sd[c] = std::sqrt(var);
    if (sd[c] <= 1e-12 * (1.0 + std::fabs(mean[c])))
      throw ZeroVarianceFeature(c, "feature column '" + std::string(kFeatureNames[c]) +
                                       "' has zero variance");
  }
  return Standardizer(mean, sd);
}

FeatureVector standardize(const FeatureVector& raw, const Standardizer& s) {
  if (!s.fitted()) throw ConfigError("standardizer is not fitted");
  FeatureVector z;
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    z[i] = (raw[i] - s.mean()[i]) / s.std_dev()[i];
  return z;
}

FeatureVector inverse_standardize(const FeatureVector& z, const Standardizer& s) {
  if (!s.fitted()) throw ConfigError("standardizer is not fitted");
  FeatureVector raw;
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    raw[i] = z[i] * s.std_dev()[i] + s.mean()[i];
  return raw;
}

void Standardizer::save(const std::string& path) const {
  if (!fitted_) throw ConfigError("cannot save an unfitted standardizer");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "cbmadv-standardizer v1\n";
  for (std::size_t i = 0; i < kFeatureCount; ++i)
    out << kFeatureNames[i] << ' ' << format_double(mean_[i]) << ' '
        << format_double(std_[i]) << '\n';
}

Standardizer Standardizer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  if (trim(header) != "cbmadv-standardizer v1")
    throw ParseError(1, "unrecognized standardizer header in '" + path + "'");
  std::array<double, kFeatureCount> mean{}, sd{};
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    std::string name;
    if (!(in >> name >> mean[i] >> sd[i]))
      throw ParseError(i + 2, "truncated standardizer file '" + path + "'");
    if (name != kFeatureNames[i])
      throw ParseError(i + 2, "unexpected feature name '" + name + "'");
  }
  return Standardizer(mean, sd);
}

std::vector<double> read_signal_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty signal file '" + path + "'");
  const auto header = split(line, ',');
  std::size_t amp_col;
  if (header.size() == 1 && header[0] == "amplitude") {
    amp_col = 0;
  } else if (header.size() == 2 && header[0] == "time_s" && header[1] == "amplitude") {
    amp_col = 1;
  } else {
    throw ParseError(1, "signal CSV header must be 'amplitude' or 'time_s,amplitude'");
  }
  std::vector<double> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) +
                                    " columns, got " + std::to_string(cols.size()) +
                                    " at line " + std::to_string(line_no));
    double v;
    if (!parse_double(cols[amp_col], v))
      throw ParseError(line_no, "bad amplitude '" + cols[amp_col] + "' at line " +
                                    std::to_string(line_no));
    samples.push_back(v);
  }
  return samples;
}

void write_signal_csv(const std::string& path, const std::vector<double>& samples,
                      double sample_rate_hz) {
  if (!(sample_rate_hz > 0.0)) throw ConfigError("sample rate must be positive");
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "time_s,amplitude\n";
  for (std::size_t i = 0; i < samples.size(); ++i)
    out << format_double(static_cast<double>(i) / sample_rate_hz) << ','
        << format_double(samples[i]) << '\n';
}

}  // namespace cbmadv
