#include "cbmadv/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cbmadv/attack.hpp"
#include "cbmadv/dataset.hpp"
#include "cbmadv/error.hpp"
#include "cbmadv/eval.hpp"
#include "cbmadv/experiment.hpp"
#include "cbmadv/features.hpp"
#include "cbmadv/models.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitGate = 3;
constexpr int kExitNumerical = 4;

std::optional<std::uint64_t> env_seed_override() {
  const char* env = std::getenv("CBM_ADVBENCH_SEED");
  if (env == nullptr || *env == '\0') return std::nullopt;
  long long v;
  if (!parse_int64(env, v))
    throw ConfigError("CBM_ADVBENCH_SEED is not an integer: '" + std::string(env) + "'");
  return static_cast<std::uint64_t>(v);
}

struct FeaturesArgs {
  std::string in_path;
  double sample_rate_hz = 0.0;
  double window_seconds = 0.1;
  std::string label;
  std::string out_path;
};

int cmd_features(const FeaturesArgs& args) {
  const Label label = parse_label(args.label);
  const auto samples = read_signal_csv(args.in_path);
  const auto windows = window_signal(samples, args.sample_rate_hz, args.window_seconds);
  LabeledDataset ds;
  ds.source = args.in_path;
  for (const auto& w : windows) ds.push_back(extract_features(w), label);
  save_feature_csv(args.out_path, ds);
  std::cout << "wrote " << ds.size() << " feature rows (label=" << label_name(label)
            << ") to " << args.out_path << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string config_path;
  std::string out_features;
  std::string out_signals_prefix;
  std::uint64_t seed = 7;
  bool seed_given = false;
  int per_class_count = 0;
  double sample_rate_hz = 0.0;
  double window_seconds = 0.0;
};

int cmd_synth(const SynthArgs& args) {
  SyntheticConfig cfg = SyntheticConfig::defaults();
  if (!args.config_path.empty())
    cfg = parse_experiment_config(args.config_path).synthetic;
  if (args.seed_given) cfg.seed = args.seed;
  if (args.per_class_count > 0) cfg.per_class_count.fill(args.per_class_count);
  if (args.sample_rate_hz > 0.0) cfg.sample_rate_hz = args.sample_rate_hz;
  if (args.window_seconds > 0.0) cfg.window_seconds = args.window_seconds;

  const SyntheticDataset synth = synthesize_bearing_dataset(cfg);
  save_feature_csv(args.out_features, synth.dataset);
  std::cout << "wrote " << synth.dataset.size() << " feature rows to "
            << args.out_features << "\n";

  if (!args.out_signals_prefix.empty()) {
    for (Label l : kAllLabels) {
      std::vector<double> concat;
      for (std::size_t i = 0; i < synth.windows.size(); ++i)
        if (synth.dataset.labels[i] == l)
          concat.insert(concat.end(), synth.windows[i].samples.begin(),
                        synth.windows[i].samples.end());
      const std::string path =
          args.out_signals_prefix + "_" + std::string(label_name(l)) + ".csv";
      write_signal_csv(path, concat, cfg.sample_rate_hz);
      std::cout << "wrote " << concat.size() << " samples to " << path << "\n";
    }
  }
  return kExitOk;
}

struct TrainArgs {
  std::string config_path;
  std::string features_path;
  std::string algorithm;
  std::string model_out;
  std::string scaler_path;
  std::uint64_t seed = 0;
};

int cmd_train(const TrainArgs& args) {
  const Algorithm algo = parse_algorithm(args.algorithm);
  TrainConfig cfg;
  if (!args.config_path.empty()) cfg = parse_experiment_config(args.config_path).train;
  cfg.seed = args.seed;

  const LabeledDataset raw = load_feature_csv(args.features_path);
  Standardizer scaler;
  if (std::filesystem::exists(args.scaler_path)) {
    scaler = Standardizer::load(args.scaler_path);
  } else {
    scaler = fit_standardizer(raw.rows);
    scaler.save(args.scaler_path);
    std::cout << "fitted standardizer on " << raw.size() << " rows, saved to "
              << args.scaler_path << "\n";
  }
  const LabeledDataset ds = standardize_dataset(raw, scaler);
  const TrainedModel model = train_classifier(algo, cfg, ds);
  save_model(model, args.model_out);

  const auto preds = model.predict_batch(ds.rows);
  const double f1 = macro_f1(confusion_matrix(preds, ds.labels));
  std::cout << "trained " << algorithm_name(algo) << " on " << ds.size()
            << " rows, training macro-F1 " << format_double(f1) << ", saved to "
            << args.model_out << "\n";
  return kExitOk;
}

struct AttackArgs {
  std::string features_path;
  std::string scaler_path;
  std::string substitute_path;
  double epsilon = 0.0;
  std::string out_path;
};

int cmd_attack(const AttackArgs& args) {
  const TrainedModel substitute = load_model(args.substitute_path);
  const MlpModel* mlp = substitute.as_mlp();
  if (mlp == nullptr)
    throw ConfigError("substitute model must be an MLP, got '" +
                      std::string(algorithm_name(substitute.algorithm())) + "'");
  const Standardizer scaler = Standardizer::load(args.scaler_path);
  const LabeledDataset pool = standardize_dataset(load_feature_csv(args.features_path), scaler);
  const AdversarialSet set = craft_attack_set(*mlp, pool, args.epsilon);
  save_adversarial_csv(args.out_path, set);
  const DistanceStats stats = distance_stats(set);
  std::cout << "crafted " << set.samples.size() << " samples at epsilon "
            << format_double(args.epsilon) << " (mean L0 " << format_double(stats.mean_l0)
            << ", mean L2 " << format_double(stats.mean_l2) << ", max Linf "
            << format_double(stats.max_linf) << "), wrote " << args.out_path << "\n";
  return kExitOk;
}

struct EvaluateArgs {
  std::string model_path;
  std::string scaler_path;
  std::string features_path;
  std::string adv_path;
  std::string report_path;
};

int cmd_evaluate(const EvaluateArgs& args) {
  if (args.features_path.empty() == args.adv_path.empty())
    throw ConfigError("evaluate needs exactly one of --features or --adv");
  const TrainedModel model = load_model(args.model_path);

  std::vector<Label> truths;
  std::vector<Label> preds;
  double success_rate = -1.0;
  if (!args.features_path.empty()) {
    if (args.scaler_path.empty())
      throw ConfigError("--scaler is required when evaluating a feature CSV");
    const Standardizer scaler = Standardizer::load(args.scaler_path);
    const LabeledDataset ds =
        standardize_dataset(load_feature_csv(args.features_path), scaler);
    truths = ds.labels;
    preds = model.predict_batch(ds.rows);
  } else {
    // Adversarial CSVs are already in standardized units.
    const AdversarialSet set = load_adversarial_csv(args.adv_path);
    std::size_t hits = 0;
    for (const auto& s : set.samples) {
      truths.push_back(s.true_label);
      preds.push_back(model.predict(s.perturbed));
      if (preds.back() != s.true_label) ++hits;
    }
    success_rate = static_cast<double>(hits) / static_cast<double>(set.samples.size());
  }

  const ConfusionMatrix cm = confusion_matrix(preds, truths);
  const double f1 = macro_f1(cm);
  std::cout << "macro-F1 " << format_double(f1) << ", weighted-F1 "
            << format_double(weighted_f1(cm)) << "\n";
  if (success_rate >= 0.0)
    std::cout << "attack success rate " << format_double(success_rate) << "\n";
  std::cout << "confusion (rows = actual Ball/InnerRace/OuterRace/Normal):\n";
  for (std::size_t i = 0; i < kClassCount; ++i) {
    std::cout << " ";
    for (std::size_t j = 0; j < kClassCount; ++j) std::cout << ' ' << cm.counts[i][j];
    std::cout << '\n';
  }

  if (!args.report_path.empty()) {
    nlohmann::ordered_json doc;
    doc["algorithm"] = std::string(algorithm_name(model.algorithm()));
    doc["f1"] = f1;
    doc["weighted_f1"] = weighted_f1(cm);
    if (success_rate >= 0.0) doc["success_rate"] = success_rate;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < kClassCount; ++i) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::size_t j = 0; j < kClassCount; ++j) row.push_back(cm.counts[i][j]);
      rows.push_back(row);
    }
    doc["confusion"] = rows;
    std::ofstream out(args.report_path);
    if (!out) throw ConfigError("cannot open '" + args.report_path + "' for writing");
    out << doc.dump(2) << '\n';
  }
  return kExitOk;
}

struct RunArgs {
  std::string config_path;
  bool synthetic = false;
  std::string features_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool defend = false;
  std::string out_dir = "out";
};

int cmd_run(const RunArgs& args) {
  if (args.synthetic && !args.features_path.empty())
    throw ConfigError("--synthetic and --features are mutually exclusive");

  ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = parse_experiment_config(args.config_path);
  if (const auto env = env_seed_override()) cfg.master_seed = *env;
  if (args.seed_given) cfg.master_seed = args.seed;
  if (args.synthetic) cfg.input_mode = InputMode::Synthetic;
  if (!args.features_path.empty()) {
    cfg.input_mode = InputMode::Features;
    cfg.features_path = args.features_path;
  }

  const ExperimentResult result = run_experiment(cfg, args.defend);
  write_experiment_outputs(result, args.out_dir);
  std::cout << experiment_summary(result);
  std::cout << "\nreports written to " << args.out_dir << "/report.json and "
            << args.out_dir << "/figure4.csv";
  if (result.defended) std::cout << " (defended sweep: " << args.out_dir << "/figure7.csv)";
  std::cout << "\n";
  if (!result.any_victim_passed) {
    std::cerr << "error: no victim algorithm passed the cross-validation gate\n";
    return kExitGate;
  }
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Adversarial-attack benchmark for vibration-based machinery diagnostics"};
  app.require_subcommand(1);

  FeaturesArgs feat;
  auto* features_cmd =
      app.add_subcommand("features", "Extract 12-feature rows from a signal CSV");
  features_cmd->add_option("--in", feat.in_path, "signal CSV (time_s,amplitude or amplitude)")
      ->required();
  features_cmd->add_option("--fs", feat.sample_rate_hz, "sample rate in Hz")->required();
  features_cmd->add_option("--window", feat.window_seconds, "window length in seconds");
  features_cmd->add_option("--label", feat.label, "class label for every row")->required();
  features_cmd->add_option("--out", feat.out_path, "output feature CSV")->required();

  SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic bearing dataset");
  synth_cmd->add_option("--config", synth.config_path, "experiment config for synthetic.* keys");
  synth_cmd->add_option("--out-features", synth.out_features, "output feature CSV")->required();
  synth_cmd->add_option("--out-signals", synth.out_signals_prefix,
                        "prefix for per-class signal CSVs");
  synth_cmd->add_option("--seed", synth.seed, "generator seed")
      ->each([&synth](const std::string&) { synth.seed_given = true; });
  synth_cmd->add_option("--count", synth.per_class_count, "windows per class");
  synth_cmd->add_option("--fs", synth.sample_rate_hz, "sample rate in Hz");
  synth_cmd->add_option("--window", synth.window_seconds, "window length in seconds");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train one classifier on a feature CSV");
  train_cmd->add_option("--config", train.config_path, "experiment config for train.* keys");
  train_cmd->add_option("--features", train.features_path, "feature CSV")->required();
  train_cmd->add_option("--algo", train.algorithm, "algorithm name")->required();
  train_cmd->add_option("--out", train.model_out, "output model file")->required();
  train_cmd->add_option("--scaler", train.scaler_path,
                        "standardizer file (loaded if present, else fitted and saved)")
      ->required();
  train_cmd->add_option("--seed", train.seed, "training seed");

  AttackArgs attack;
  auto* attack_cmd =
      app.add_subcommand("attack", "Craft FGSM samples against a substitute MLP");
  attack_cmd->add_option("--features", attack.features_path, "pool feature CSV")->required();
  attack_cmd->add_option("--scaler", attack.scaler_path, "standardizer file")->required();
  attack_cmd->add_option("--substitute", attack.substitute_path, "substitute model file")
      ->required();
  attack_cmd->add_option("--epsilon", attack.epsilon, "perturbation extent")->required();
  attack_cmd->add_option("--out", attack.out_path, "output adversarial CSV")->required();

  EvaluateArgs eval;
  auto* eval_cmd =
      app.add_subcommand("evaluate", "Score a model on clean or adversarial data");
  eval_cmd->add_option("--model", eval.model_path, "model file")->required();
  eval_cmd->add_option("--scaler", eval.scaler_path, "standardizer file (for --features)");
  eval_cmd->add_option("--features", eval.features_path, "clean feature CSV");
  eval_cmd->add_option("--adv", eval.adv_path, "adversarial CSV");
  eval_cmd->add_option("--report", eval.report_path, "optional JSON report path");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the full benchmark pipeline");
  auto* defend_cmd = app.add_subcommand("defend", "Run the pipeline with adversarial training");
  for (auto* cmd : {run_cmd, defend_cmd}) {
    cmd->add_option("--config", run.config_path, "experiment config file");
    cmd->add_flag("--synthetic", run.synthetic, "use the synthetic generator");
    cmd->add_option("--features", run.features_path, "feature CSV input");
    cmd->add_option("--seed", run.seed, "master seed")
        ->each([&run](const std::string&) { run.seed_given = true; });
    cmd->add_option("--out-dir", run.out_dir, "report directory (default: out)");
  }
  run_cmd->add_flag("--defend", run.defend, "also evaluate adversarially trained victims");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (features_cmd->parsed()) return cmd_features(feat);
    if (synth_cmd->parsed()) return cmd_synth(synth);
    if (train_cmd->parsed()) return cmd_train(train);
    if (attack_cmd->parsed()) return cmd_attack(attack);
    if (eval_cmd->parsed()) return cmd_evaluate(eval);
    if (run_cmd->parsed()) return cmd_run(run);
    if (defend_cmd->parsed()) {
      run.defend = true;
      return cmd_run(run);
    }
  } catch (const NonFiniteLoss& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularCovariance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace cbmadv
