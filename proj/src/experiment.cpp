#include "cbmadv/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbmadv/error.hpp"
#include "cbmadv/rng.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

namespace {

// Experiment-level seed salts; everything else derives from the master seed.
constexpr std::uint64_t kSeedSynthetic = 1;
constexpr std::uint64_t kSeedSplit = 2;
constexpr std::uint64_t kSeedSubstitute = 3;
constexpr std::uint64_t kSeedDefense = 4;
constexpr std::uint64_t kSeedVictimBase = 0x100;  // + algorithm enum value
constexpr std::uint64_t kSeedCvBase = 0x200;      // + algorithm enum value

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + value + "'");
}

double parse_real(const std::string& value, const std::string& key) {
  double v;
  if (!parse_double(value, v))
    throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  return v;
}

long long parse_integer(const std::string& value, const std::string& key) {
  long long v;
  if (!parse_int64(value, v))
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  return v;
}

std::vector<double> parse_real_list(const std::string& value, const std::string& key) {
  std::vector<double> out;
  for (const auto& tok : split(value, ','))
    out.push_back(parse_real(tok, key));
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& value, const std::string& key) {
  std::vector<std::size_t> out;
  for (const auto& tok : split(value, ',')) {
    const long long v = parse_integer(tok, key);
    if (v <= 0) throw ConfigError("key '" + key + "': sizes must be positive");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

bool apply_synthetic_class_entry(SyntheticConfig& synth, const std::string& key,
                                 const std::string& rest, const std::string& value) {
  for (Label l : kAllLabels) {
    const std::string prefix = std::string(label_name(l)) + ".";
    if (rest.rfind(prefix, 0) != 0) continue;
    auto& p = synth.params[static_cast<std::size_t>(l)];
    const std::string field = rest.substr(prefix.size());
    if (field == "carrier_hz")
      p.carrier_hz = parse_real(value, key);
    else if (field == "impulse_rate_hz")
      p.impulse_rate_hz = parse_real(value, key);
    else if (field == "impulse_amplitude")
      p.impulse_amplitude = parse_real(value, key);
    else if (field == "noise_std")
      p.noise_std = parse_real(value, key);
    else
      throw ConfigError("unknown config key '" + key + "'");
    return true;
  }
  return false;
}

}  // namespace

void ExperimentConfig::validate() const {
  int selected = 0;
  if (input_mode == InputMode::Features) {
    ++selected;
    if (features_path.empty()) throw ConfigError("input.features path is empty");
  }
  if (input_mode == InputMode::Signals) {
    ++selected;
    if (signal_paths.empty()) throw ConfigError("no input.signal.<class> paths given");
  }
  if (input_mode == InputMode::Synthetic) ++selected;
  if (selected != 1)
    throw ConfigError("exactly one of feature input, signal input, or synthetic "
                      "generation must be selected");
  if (!(gate_min_cv_f1 >= 0.0) || gate_min_cv_f1 > 1.0)
    throw ConfigError("gate.min_cv_f1 must lie in [0, 1]");
  if (cv_folds < 2) throw ConfigError("cv.folds must be at least 2");
  if (victims.empty()) throw ConfigError("victim list is empty");
  if (substitute_hidden.empty()) throw ConfigError("substitute needs at least one hidden layer");
  split.validate();
  train.validate();
  attack.validate();
  defense.validate();
  synthetic.validate();
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "seed") {
    cfg.master_seed = static_cast<std::uint64_t>(parse_integer(value, key));
  } else if (key == "input.features") {
    cfg.input_mode = InputMode::Features;
    cfg.features_path = value;
  } else if (key.rfind("input.signal.", 0) == 0) {
    cfg.input_mode = InputMode::Signals;
    cfg.signal_paths[parse_label(key.substr(13))] = value;
  } else if (key == "input.sample_rate_hz") {
    cfg.signal_sample_rate_hz = parse_real(value, key);
  } else if (key == "input.window_seconds") {
    cfg.signal_window_seconds = parse_real(value, key);
  } else if (key == "input.synthetic") {
    if (parse_bool(value, key)) cfg.input_mode = InputMode::Synthetic;
  } else if (key == "split.substitute_fraction") {
    cfg.split.substitute_fraction = parse_real(value, key);
  } else if (key == "split.attack_fraction") {
    cfg.split.attack_fraction = parse_real(value, key);
  } else if (key == "split.victim_fraction") {
    cfg.split.victim_fraction = parse_real(value, key);
  } else if (key == "synthetic.per_class_count") {
    const long long n = parse_integer(value, key);
    cfg.synthetic.per_class_count.fill(static_cast<int>(n));
  } else if (key == "synthetic.sample_rate_hz") {
    cfg.synthetic.sample_rate_hz = parse_real(value, key);
  } else if (key == "synthetic.window_seconds") {
    cfg.synthetic.window_seconds = parse_real(value, key);
  } else if (key.rfind("synthetic.", 0) == 0 &&
             apply_synthetic_class_entry(cfg.synthetic, key, key.substr(10), value)) {
    // handled
  } else if (key == "train.mlp_epochs") {
    cfg.train.mlp_epochs = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.mlp_batch_size") {
    cfg.train.mlp_batch_size = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.mlp_learning_rate") {
    cfg.train.mlp_learning_rate = parse_real(value, key);
  } else if (key == "train.mlp_lr_decay") {
    cfg.train.mlp_lr_decay = parse_real(value, key);
  } else if (key == "train.mlp_lr_decay_every") {
    cfg.train.mlp_lr_decay_every = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.mlp_hidden") {
    cfg.train.mlp_hidden = parse_size_list(value, key);
  } else if (key == "train.substitute_hidden") {
    cfg.substitute_hidden = parse_size_list(value, key);
  } else if (key == "train.tree_max_depth") {
    cfg.train.tree_max_depth = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.forest_trees") {
    cfg.train.forest_trees = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.forest_mtry") {
    cfg.train.forest_mtry = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.forest_bootstrap") {
    cfg.train.forest_bootstrap = parse_bool(value, key);
  } else if (key == "train.knn_k") {
    cfg.train.knn_k = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.svm_lambda") {
    cfg.train.svm_lambda = parse_real(value, key);
  } else if (key == "train.svm_epochs") {
    cfg.train.svm_epochs = static_cast<int>(parse_integer(value, key));
  } else if (key == "train.svm_learning_rate") {
    cfg.train.svm_learning_rate = parse_real(value, key);
  } else if (key == "train.adaboost_rounds") {
    cfg.train.adaboost_rounds = static_cast<int>(parse_integer(value, key));
  } else if (key == "attack.epsilon_sweep") {
    cfg.attack.epsilon_sweep = parse_real_list(value, key);
  } else if (key == "defense.perturbed_fraction") {
    cfg.defense.perturbed_fraction = parse_real(value, key);
  } else if (key == "defense.epsilon") {
    cfg.defense.defense_epsilon = parse_real(value, key);
  } else if (key == "gate.min_cv_f1") {
    cfg.gate_min_cv_f1 = parse_real(value, key);
  } else if (key == "cv.folds") {
    cfg.cv_folds = static_cast<int>(parse_integer(value, key));
  } else if (key == "victims") {
    cfg.victims.clear();
    for (const auto& name : split(value, ','))
      cfg.victims.push_back(parse_algorithm(name));
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    const std::string value(trim(text.substr(eq + 1)));
    apply_config_entry(cfg, key, value);
  }
  return cfg;
}

std::vector<CvGateEntry> apply_cv_gate(const std::vector<std::pair<Algorithm, double>>& scores,
                                       double threshold) {
  std::vector<CvGateEntry> out;
  out.reserve(scores.size());
  for (const auto& [algo, f1] : scores)
    out.push_back({algo, f1, f1 >= threshold});
  return out;
}

namespace {

LabeledDataset load_input_dataset(const ExperimentConfig& cfg) {
  switch (cfg.input_mode) {
    case InputMode::Features:
      return load_feature_csv(cfg.features_path);
    case InputMode::Synthetic: {
      SyntheticConfig synth = cfg.synthetic;
      synth.seed = derive_seed(cfg.master_seed, kSeedSynthetic);
      return synthesize_bearing_dataset(synth).dataset;
    }
    case InputMode::Signals: {
      LabeledDataset ds;
      ds.source = "signals";
      for (const auto& [label, path] : cfg.signal_paths) {
        const auto samples = read_signal_csv(path);
        for (const auto& w :
             window_signal(samples, cfg.signal_sample_rate_hz, cfg.signal_window_seconds))
          ds.push_back(extract_features(w), label);
      }
      return ds;
    }
    case InputMode::Unset:
      break;
  }
  throw ConfigError("no input selected");
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool defend) {
  cfg.validate();
  ExperimentResult result;
  result.master_seed = cfg.master_seed;
  result.defended = defend;

  const LabeledDataset raw = load_input_dataset(cfg);

  SplitSpec split = cfg.split;
  split.seed = derive_seed(cfg.master_seed, kSeedSplit);
  const SplitResult parts = split_dataset(raw, split);

  const Standardizer scaler = fit_standardizer(parts.substitute_train.rows);
  const LabeledDataset sub_train = standardize_dataset(parts.substitute_train, scaler);
  const LabeledDataset pool = standardize_dataset(parts.attack_pool, scaler);
  const LabeledDataset victim_train = standardize_dataset(parts.victim_train, scaler);

  TrainConfig sub_cfg = cfg.train;
  sub_cfg.seed = derive_seed(cfg.master_seed, kSeedSubstitute);
  const MlpModel substitute = mlp_train(sub_cfg, sub_train, cfg.substitute_hidden);

  std::vector<std::pair<Algorithm, double>> cv_scores;
  for (Algorithm algo : cfg.victims) {
    TrainConfig cv_cfg = cfg.train;
    cv_cfg.seed = derive_seed(cfg.master_seed,
                              kSeedCvBase + static_cast<std::uint64_t>(algo));
    cv_scores.emplace_back(algo,
                           cross_validate(algo, cv_cfg, victim_train, cfg.cv_folds).mean_macro_f1);
  }
  result.gate = apply_cv_gate(cv_scores, cfg.gate_min_cv_f1);

  std::vector<NamedModel> models;
  models.push_back({kSubstituteRowName, TrainedModel(substitute)});
  std::vector<Algorithm> passed;
  for (const auto& entry : result.gate) {
    if (!entry.passed) continue;
    passed.push_back(entry.algorithm);
    TrainConfig victim_cfg = cfg.train;
    victim_cfg.seed = derive_seed(cfg.master_seed,
                                  kSeedVictimBase + static_cast<std::uint64_t>(entry.algorithm));
    models.push_back({std::string(algorithm_name(entry.algorithm)),
                      train_classifier(entry.algorithm, victim_cfg, victim_train)});
  }
  result.any_victim_passed = !passed.empty();

  result.report = transfer_evaluate(models, substitute, pool, cfg.attack);
  result.report.master_seed = cfg.master_seed;
  for (auto& mr : result.report.models)
    for (const auto& entry : result.gate)
      if (mr.algorithm == algorithm_name(entry.algorithm)) mr.cv_f1 = entry.cv_f1;
  for (const auto& entry : result.gate) {
    if (entry.passed) continue;
    ModelReport mr;
    mr.algorithm = algorithm_name(entry.algorithm);
    mr.excluded = true;
    mr.cv_f1 = entry.cv_f1;
    result.report.models.push_back(std::move(mr));
  }

  if (defend && result.any_victim_passed) {
    DefenseConfig defense = cfg.defense;
    defense.seed = derive_seed(cfg.master_seed, kSeedDefense);
    std::vector<NamedModel> defended;
    for (Algorithm algo : passed) {
      TrainConfig victim_cfg = cfg.train;
      victim_cfg.seed = derive_seed(cfg.master_seed,
                                    kSeedVictimBase + static_cast<std::uint64_t>(algo));
      defended.push_back({std::string(algorithm_name(algo)),
                          adversarial_training(algo, victim_cfg, victim_train, defense,
                                               substitute)});
    }
    const RobustnessReport defended_report =
        transfer_evaluate(defended, substitute, pool, cfg.attack);
    for (const auto& dm : defended_report.models) {
      for (auto& mr : result.report.models) {
        if (mr.algorithm != dm.algorithm) continue;
        mr.defended_sweep = dm.sweep;
        mr.defended_clean_f1 = dm.clean_f1;
      }
    }
  }
  return result;
}

void write_experiment_outputs(const ExperimentResult& result, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  const auto path = [&out_dir](const char* name) {
    return (std::filesystem::path(out_dir) / name).string();
  };
  save_report_json(path("report.json"), result.report);
  save_report_csv(path("figure4.csv"), result.report, false);
  if (result.defended) save_report_csv(path("figure7.csv"), result.report, true);
}

std::string experiment_summary(const ExperimentResult& result) {
  std::ostringstream out;
  char buf[160];
  out << "Cross-validation gate (macro-F1)\n";
  std::vector<CvGateEntry> sorted = result.gate;
  std::sort(sorted.begin(), sorted.end(),
            [](const CvGateEntry& a, const CvGateEntry& b) { return a.cv_f1 > b.cv_f1; });
  for (const auto& e : sorted) {
    std::snprintf(buf, sizeof(buf), "  %-36s %6.4f  %s\n",
                  std::string(algorithm_display_name(e.algorithm)).c_str(), e.cv_f1,
                  e.passed ? "ok" : "excluded");
    out << buf;
  }
  out << "\nAdversarial F1 by epsilon (victims on samples crafted against the substitute)\n";
  for (const auto& m : result.report.models) {
    if (m.excluded) continue;
    std::snprintf(buf, sizeof(buf), "  %-20s clean %6.4f |", m.algorithm.c_str(), m.clean_f1);
    out << buf;
    for (const auto& p : m.sweep) {
      std::snprintf(buf, sizeof(buf), " e=%.3g %6.4f", p.epsilon, p.f1);
      out << buf;
    }
    out << '\n';
    if (!m.defended_sweep.empty()) {
      std::snprintf(buf, sizeof(buf), "  %-20s clean %6.4f |", "  +adv. training",
                    m.defended_clean_f1);
      out << buf;
      for (const auto& p : m.defended_sweep) {
        std::snprintf(buf, sizeof(buf), " e=%.3g %6.4f", p.epsilon, p.f1);
        out << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace cbmadv
