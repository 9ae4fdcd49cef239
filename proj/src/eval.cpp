#include "cbmadv/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "cbmadv/error.hpp"
#include "cbmadv/rng.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

CrossValidationResult cross_validate(Algorithm kind, const TrainConfig& cfg,
                                     const LabeledDataset& ds, int k) {
  const auto folds = kfold_partition(ds.size(), k, cfg.seed);
  CrossValidationResult result;
  result.fold_scores.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    LabeledDataset train;
    train.standardized = ds.standardized;
    train.source = ds.source;
    for (std::size_t i : folds[f].train) train.push_back(ds.rows[i], ds.labels[i]);

    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, seeds::kCvFoldBase + f);
    TrainedModel model = train_classifier(kind, fold_cfg, train);

    std::vector<Label> preds, truths;
    preds.reserve(folds[f].validation.size());
    for (std::size_t i : folds[f].validation) {
      preds.push_back(model.predict(ds.rows[i]));
      truths.push_back(ds.labels[i]);
    }
    result.fold_scores.push_back(macro_f1(confusion_matrix(preds, truths)));
    result.fold_models.push_back(std::move(model));
  }
  result.mean_macro_f1 =
      std::accumulate(result.fold_scores.begin(), result.fold_scores.end(), 0.0) /
      static_cast<double>(result.fold_scores.size());
  return result;
}

DistanceStats distance_stats(const AdversarialSet& set) {
  DistanceStats stats;
  if (set.samples.empty()) return stats;
  for (const auto& s : set.samples) {
    stats.mean_l0 += lp_distance(s.original, s.perturbed, Norm::L0);
    stats.mean_l2 += lp_distance(s.original, s.perturbed, Norm::L2);
    const double linf = lp_distance(s.original, s.perturbed, Norm::Linf);
    stats.mean_linf += linf;
    stats.max_linf = std::max(stats.max_linf, linf);
  }
  const double n = static_cast<double>(set.samples.size());
  stats.mean_l0 /= n;
  stats.mean_l2 /= n;
  stats.mean_linf /= n;
  return stats;
}

namespace {

SweepPoint score_on_set(const TrainedModel& victim, const AdversarialSet& set,
                        const std::vector<Label>& truths) {
  SweepPoint p;
  p.epsilon = set.epsilon;
  std::vector<Label> preds;
  preds.reserve(set.samples.size());
  for (const auto& s : set.samples) preds.push_back(victim.predict(s.perturbed));
  p.confusion = confusion_matrix(preds, truths);
  p.f1 = macro_f1(p.confusion);
  p.weighted_f1 = weighted_f1(p.confusion);
  p.success_rate = attack_success_rate(victim, set);
  p.distance = distance_stats(set);
  return p;
}

}  // namespace

RobustnessReport transfer_evaluate(const std::vector<NamedModel>& victims,
                                   const MlpModel& substitute, const LabeledDataset& pool,
                                   const AttackConfig& sweep) {
  sweep.validate();
  if (pool.rows.empty()) throw EmptyPool("attack pool is empty");

  RobustnessReport report;
  report.substitute_fingerprint = mlp_fingerprint(substitute);

  for (const auto& v : victims) {
    ModelReport mr;
    mr.algorithm = v.name;
    const auto preds = v.model.predict_batch(pool.rows);
    mr.clean_confusion = confusion_matrix(preds, pool.labels);
    mr.clean_f1 = macro_f1(mr.clean_confusion);
    mr.clean_weighted_f1 = weighted_f1(mr.clean_confusion);
    report.models.push_back(std::move(mr));
  }

  for (double eps : sweep.epsilon_sweep) {
    const AdversarialSet set = craft_attack_set(substitute, pool, eps);
    for (std::size_t v = 0; v < victims.size(); ++v)
      report.models[v].sweep.push_back(score_on_set(victims[v].model, set, pool.labels));
  }
  return report;
}

void DefenseConfig::validate() const {
  if (!(perturbed_fraction >= 0.0) || perturbed_fraction >= 1.0)
    throw ConfigError("defense fraction must lie in [0, 1)");
  if (!(defense_epsilon >= 0.0)) throw ConfigError("defense epsilon must be non-negative");
}

std::vector<std::size_t> defense_selection(const std::vector<Label>& labels,
                                           const DefenseConfig& defense) {
  defense.validate();
  const std::size_t n = labels.size();
  const auto target = static_cast<std::size_t>(std::floor(defense.perturbed_fraction *
                                                          static_cast<double>(n)));
  if (target == 0) return {};

  std::array<std::vector<std::size_t>, kClassCount> by_class;
  for (std::size_t i = 0; i < n; ++i)
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);

  // Largest-remainder apportionment of the target across classes.
  std::array<std::size_t, kClassCount> take{};
  std::array<double, kClassCount> frac{};
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    const double quota = defense.perturbed_fraction * static_cast<double>(by_class[c].size());
    take[c] = static_cast<std::size_t>(std::floor(quota));
    frac[c] = quota - static_cast<double>(take[c]);
    assigned += take[c];
  }
  while (assigned < target) {
    std::size_t best = kClassCount;
    for (std::size_t c = 0; c < kClassCount; ++c) {
      if (take[c] >= by_class[c].size()) continue;
      if (best == kClassCount || frac[c] > frac[best]) best = c;
    }
    if (best == kClassCount) break;
    ++take[best];
    frac[best] = -1.0;
    ++assigned;
  }

  std::vector<std::size_t> selected;
  selected.reserve(target);
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (by_class[c].empty() || take[c] == 0) continue;
    Rng rng(derive_seed(derive_seed(defense.seed, seeds::kDefenseSelect), c));
    rng.shuffle(by_class[c]);
    selected.insert(selected.end(), by_class[c].begin(),
                    by_class[c].begin() + static_cast<std::ptrdiff_t>(take[c]));
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

TrainedModel adversarial_training(Algorithm kind, const TrainConfig& cfg,
                                  const LabeledDataset& victim_train,
                                  const DefenseConfig& defense, const MlpModel& substitute) {
  const auto selected = defense_selection(victim_train.labels, defense);
  LabeledDataset hardened = victim_train;
  for (std::size_t i : selected) {
    const auto sample = fgsm_craft(substitute, hardened.rows[i], hardened.labels[i],
                                   defense.defense_epsilon);
    hardened.rows[i] = sample.perturbed;
  }
  return train_classifier(kind, cfg, hardened);
}

namespace {

nlohmann::ordered_json confusion_to_json(const ConfusionMatrix& cm) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < kClassCount; ++i) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t j = 0; j < kClassCount; ++j) row.push_back(cm.counts[i][j]);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::ordered_json sweep_to_json(const std::vector<SweepPoint>& sweep) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : sweep) {
    nlohmann::ordered_json jp;
    jp["epsilon"] = p.epsilon;
    jp["f1"] = p.f1;
    jp["weighted_f1"] = p.weighted_f1;
    jp["success_rate"] = p.success_rate;
    jp["confusion"] = confusion_to_json(p.confusion);
    jp["distance"] = {{"mean_l0", p.distance.mean_l0},
                      {"mean_l2", p.distance.mean_l2},
                      {"mean_linf", p.distance.mean_linf},
                      {"max_linf", p.distance.max_linf}};
    arr.push_back(jp);
  }
  return arr;
}

}  // namespace

void save_report_json(const std::string& path, const RobustnessReport& report) {
  nlohmann::ordered_json doc;
  doc["master_seed"] = report.master_seed;
  doc["substitute_fingerprint"] = report.substitute_fingerprint;
  doc["class_order"] = {"ball", "inner_race", "outer_race", "normal"};
  doc["models"] = nlohmann::ordered_json::array();
  for (const auto& m : report.models) {
    nlohmann::ordered_json jm;
    jm["algorithm"] = m.algorithm;
    jm["excluded"] = m.excluded;
    jm["cv_f1"] = m.cv_f1;
    if (m.excluded) {
      doc["models"].push_back(jm);
      continue;
    }
    jm["clean_f1"] = m.clean_f1;
    jm["clean_weighted_f1"] = m.clean_weighted_f1;
    jm["clean_confusion"] = confusion_to_json(m.clean_confusion);
    jm["sweep"] = sweep_to_json(m.sweep);
    if (!m.defended_sweep.empty()) {
      jm["defended_clean_f1"] = m.defended_clean_f1;
      jm["defended_sweep"] = sweep_to_json(m.defended_sweep);
    }
    doc["models"].push_back(jm);
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
}

void save_report_csv(const std::string& path, const RobustnessReport& report,
                     bool defended) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << "algorithm,epsilon,f1,success_rate\n";
  for (const auto& m : report.models) {
    if (m.excluded) continue;
    const auto& sweep = defended ? m.defended_sweep : m.sweep;
    for (const auto& p : sweep)
      out << m.algorithm << ',' << format_double(p.epsilon) << ',' << format_double(p.f1)
          << ',' << format_double(p.success_rate) << '\n';
  }
}

}  // namespace cbmadv
