#include "cbmadv/attack.hpp"

#include <cmath>
#include <fstream>

#include "cbmadv/error.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

void AttackConfig::validate() const {
  if (epsilon_sweep.empty()) throw ConfigError("epsilon sweep must be nonempty");
  double prev = -1.0;
  for (double e : epsilon_sweep) {
    if (!std::isfinite(e) || e < 0.0)
      throw ConfigError("epsilons must be finite and non-negative");
    if (e <= prev) throw ConfigError("epsilon sweep must be strictly increasing");
    prev = e;
  }
}

AdversarialSample fgsm_craft(const MlpModel& substitute, const FeatureVector& x,
                             Label y, double epsilon) {
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be non-negative");
  const auto grad = mlp_input_gradient(substitute, x, y);
  AdversarialSample s;
  s.original = x;
  s.perturbed = x;
  s.true_label = y;
  s.epsilon = epsilon;
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    if (grad[i] > 0.0)
      s.perturbed[i] = x[i] + epsilon;
    else if (grad[i] < 0.0)
      s.perturbed[i] = x[i] - epsilon;
    // sign(0) = 0: coordinate untouched
  }
  return s;
}

AdversarialSet craft_attack_set(const MlpModel& substitute, const LabeledDataset& pool,
                                double epsilon) {
  if (pool.rows.empty()) throw EmptyPool("attack pool is empty");
  AdversarialSet set;
  set.epsilon = epsilon;
  set.substitute_fingerprint = mlp_fingerprint(substitute);
  set.samples.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i)
    set.samples.push_back(fgsm_craft(substitute, pool.rows[i], pool.labels[i], epsilon));
  return set;
}

double lp_distance(std::span<const double> x, std::span<const double> x_star, Norm norm) {
  if (x.size() != x_star.size())
    throw DimensionMismatch("vectors of length " + std::to_string(x.size()) + " and " +
                            std::to_string(x_star.size()));
  switch (norm) {
    case Norm::L0: {
      std::size_t count = 0;
      for (std::size_t i = 0; i < x.size(); ++i)
        if (std::fabs(x_star[i] - x[i]) > 1e-12) ++count;
      return static_cast<double>(count);
    }
    case Norm::L2: {
      double s = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x_star[i] - x[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Norm::Linf: {
      double m = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i)
        m = std::max(m, std::fabs(x_star[i] - x[i]));
      return m;
    }
  }
  throw ConfigError("unhandled norm");
}

double lp_distance(const FeatureVector& x, const FeatureVector& x_star, Norm norm) {
  return lp_distance(std::span<const double>(x.data(), x.size()),
                     std::span<const double>(x_star.data(), x_star.size()), norm);
}

bool attack_success(const TrainedModel& victim, const AdversarialSample& sample) {
  return victim.predict(sample.perturbed) != sample.true_label;
}

double attack_success_rate(const TrainedModel& victim, const AdversarialSet& set) {
  if (set.samples.empty()) throw EmptyPool("adversarial set is empty");
  std::size_t hits = 0;
  for (const auto& s : set.samples)
    if (attack_success(victim, s)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(set.samples.size());
}

void save_adversarial_csv(const std::string& path, const AdversarialSet& set) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  for (const auto& name : kFeatureNames) out << name << ',';
  for (const auto& name : kFeatureNames) out << "adv_" << name << ',';
  out << "label,epsilon\n";
  for (const auto& s : set.samples) {
    for (std::size_t i = 0; i < kFeatureCount; ++i) out << format_double(s.original[i]) << ',';
    for (std::size_t i = 0; i < kFeatureCount; ++i) out << format_double(s.perturbed[i]) << ',';
    out << label_name(s.true_label) << ',' << format_double(s.epsilon) << '\n';
  }
}

AdversarialSet load_adversarial_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "empty adversarial file '" + path + "'");
  const auto header = split(line, ',');
  if (header.size() != 2 * kFeatureCount + 2)
    throw ParseError(1, "adversarial CSV must have " +
                            std::to_string(2 * kFeatureCount + 2) + " columns");

  AdversarialSet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 2 * kFeatureCount + 2)
      throw ParseError(line_no, "expected " + std::to_string(2 * kFeatureCount + 2) +
                                    " columns at line " + std::to_string(line_no));
    AdversarialSample s;
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      if (!parse_double(cols[i], s.original[i]))
        throw ParseError(line_no, "bad number at line " + std::to_string(line_no));
    for (std::size_t i = 0; i < kFeatureCount; ++i)
      if (!parse_double(cols[kFeatureCount + i], s.perturbed[i]))
        throw ParseError(line_no, "bad number at line " + std::to_string(line_no));
    s.true_label = parse_label(cols[2 * kFeatureCount]);
    if (!parse_double(cols[2 * kFeatureCount + 1], s.epsilon))
      throw ParseError(line_no, "bad epsilon at line " + std::to_string(line_no));
    set.samples.push_back(s);
  }
  if (set.samples.empty()) throw EmptyPool("adversarial file has no rows");
  set.epsilon = set.samples.front().epsilon;
  return set;
}

}  // namespace cbmadv
