// Acceptance suite: one pass/fail line per criterion, exit 0 only if all pass.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "cbmadv/attack.hpp"
#include "cbmadv/dataset.hpp"
#include "cbmadv/error.hpp"
#include "cbmadv/eval.hpp"
#include "cbmadv/experiment.hpp"
#include "cbmadv/features.hpp"
#include "cbmadv/metrics.hpp"
#include "cbmadv/mlp.hpp"
#include "cbmadv/models.hpp"
#include "cbmadv/rng.hpp"

using namespace cbmadv;

namespace {

struct CheckFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool cond, const std::string& msg) {
  if (!cond) throw CheckFailure(msg);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

int g_failures = 0;

void criterion(int id, const std::string& title, const std::function<std::string()>& body) {
  try {
    const std::string detail = body();
    std::cout << "[PASS] criterion " << id << ": " << title;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << "\n";
  } catch (const std::exception& e) {
    ++g_failures;
    std::cout << "[FAIL] criterion " << id << ": " << title << " -- " << e.what() << "\n";
  }
}

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "cbmadv_acceptance" / name;
  std::filesystem::create_directories(dir);
  return dir.string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MlpModel random_substitute_arch(Rng& rng) {
  MlpModel m;
  m.layer_sizes = {kFeatureCount, 64, 64, 32, kClassCount};
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    m.weights.emplace_back(m.layer_sizes[l] * m.layer_sizes[l + 1]);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m.layer_sizes[l]));
    for (auto& w : m.weights.back()) w = rng.normal() * scale * 2.0;
    m.biases.emplace_back(m.layer_sizes[l + 1]);
    for (auto& b : m.biases.back()) b = rng.normal() * 0.1;
  }
  return m;
}

// Forward pass that records hidden pre-activations, used to exclude
// rectifier-kink neighborhoods from the finite-difference comparison.
bool relu_stable(const MlpModel& m, const FeatureVector& x, std::size_t coord, double h) {
  auto hidden_signs = [&m](const FeatureVector& in) {
    std::vector<bool> signs;
    std::vector<double> a(in.data(), in.data() + kFeatureCount);
    for (std::size_t l = 0; l + 2 < m.layer_sizes.size(); ++l) {
      const std::size_t n_in = m.layer_sizes[l];
      const std::size_t n_out = m.layer_sizes[l + 1];
      std::vector<double> z(n_out);
      for (std::size_t o = 0; o < n_out; ++o) {
        double s = m.biases[l][o];
        for (std::size_t i = 0; i < n_in; ++i) s += m.weights[l][o * n_in + i] * a[i];
        z[o] = s;
        signs.push_back(s > 0.0);
      }
      for (auto& v : z) v = v > 0.0 ? v : 0.0;
      a = std::move(z);
    }
    return signs;
  };
  FeatureVector xp = x, xm = x;
  xp[coord] += h;
  xm[coord] -= h;
  const auto s0 = hidden_signs(x);
  return s0 == hidden_signs(xp) && s0 == hidden_signs(xm);
}

struct PipelineFixture {
  ExperimentConfig cfg;
  ExperimentResult result;
  LabeledDataset dataset;  // default synthetic dataset, raw features
};

PipelineFixture run_default_pipeline() {
  PipelineFixture fx;
  fx.cfg.input_mode = InputMode::Synthetic;
  fx.result = run_experiment(fx.cfg, /*defend=*/true);

  SyntheticConfig synth = fx.cfg.synthetic;
  synth.seed = derive_seed(fx.cfg.master_seed, 1);  // matches the pipeline's input
  fx.dataset = synthesize_bearing_dataset(synth).dataset;
  return fx;
}

const ModelReport& find_model(const RobustnessReport& report, const std::string& name) {
  for (const auto& m : report.models)
    if (m.algorithm == name) return m;
  throw CheckFailure("report has no row for '" + name + "'");
}

}  // namespace

int main() {
  std::cout << "cbm-advbench acceptance suite\n";

  // Shared full-size pipeline run (default config, defended).
  PipelineFixture fx;
  try {
    fx = run_default_pipeline();
  } catch (const std::exception& e) {
    std::cout << "[FAIL] pipeline fixture: " << e.what() << "\n";
    std::cout << "1 criteria failed before evaluation\n";
    return 1;
  }

  criterion(1, "analytic input gradient matches central finite differences", [] {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240001);
    const double h = 1e-5;
    int cases = 0;
    double worst = 0.0;
    while (cases < 100) {
      const MlpModel m = random_substitute_arch(rng);
      for (int rep = 0; rep < 10 && cases < 100; ++rep, ++cases) {
        FeatureVector x;
        for (std::size_t i = 0; i < kFeatureCount; ++i) x[i] = rng.normal();
        const Label y = kAllLabels[rng.uniform_index(kClassCount)];
        // Stay clear of the loss floor's clamp region, where the clipped
        // loss is flat by construction.
        if (mlp_loss(m, x, y) > 20.0) continue;
        const auto grad = mlp_input_gradient(m, x, y);
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
          if (!relu_stable(m, x, i, h)) continue;
          FeatureVector xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          const double fd = (mlp_loss(m, xp, y) - mlp_loss(m, xm, y)) / (2.0 * h);
          const double rel = std::fabs(grad[i] - fd) / std::max(std::fabs(fd), 1e-8);
          worst = std::max(worst, rel);
          check(rel <= 1e-4, "relative error " + fmt(rel) + " above 1e-4");
        }
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check(secs < 5.0, "took " + fmt(secs) + " s, limit 5 s");
    return "100 cases, worst relative error " + fmt(worst) + ", " + fmt(secs) + " s";
  });

  criterion(2, "FGSM per-coordinate deltas are exactly {-eps, 0, +eps}", [] {
    SyntheticConfig synth = SyntheticConfig::defaults();
    synth.per_class_count.fill(250);  // 1000-sample pool
    synth.seed = 20240002;
    const LabeledDataset raw = synthesize_bearing_dataset(synth).dataset;
    const Standardizer scaler = fit_standardizer(raw.rows);
    const LabeledDataset pool = standardize_dataset(raw, scaler);

    TrainConfig tc;
    tc.seed = 20240002;
    tc.mlp_epochs = 60;
    const MlpModel substitute = mlp_train(tc, pool, {64, 64, 32});

    const double eps = 0.03;
    const AdversarialSet set = craft_attack_set(substitute, pool, eps);
    check(set.samples.size() == 1000, "expected a 1000-sample pool");
    std::size_t full_linf = 0;
    for (std::size_t i = 0; i < set.samples.size(); ++i) {
      const auto& s = set.samples[i];
      const auto grad = mlp_input_gradient(substitute, s.original, s.true_label);
      bool any_nonzero = false;
      for (std::size_t f = 0; f < kFeatureCount; ++f) {
        const double delta = s.perturbed[f] - s.original[f];
        if (grad[f] == 0.0) {
          check(delta == 0.0, "zero-gradient coordinate moved");
        } else {
          any_nonzero = true;
          check(std::fabs(std::fabs(delta) - eps) <= 1e-12,
                "delta magnitude differs from epsilon");
          check((delta > 0.0) == (grad[f] > 0.0), "delta sign disagrees with gradient");
        }
      }
      const double linf = lp_distance(s.original, s.perturbed, Norm::Linf);
      check(linf <= eps + 1e-12, "Linf above epsilon");
      if (any_nonzero) {
        check(std::fabs(linf - eps) <= 1e-12, "Linf not tight despite nonzero gradient");
        ++full_linf;
      }
    }
    return "1000 samples checked, " + std::to_string(full_linf) + " with tight Linf";
  });

  criterion(3, "figure 5a row recalls and column precisions reproduce the print", [] {
    ConfusionMatrix cm;
    const std::int64_t counts[4][4] = {
        {1634, 2, 0, 3}, {3, 1463, 178, 0}, {5, 16, 389, 0}, {498, 0, 0, 160}};
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) cm.counts[i][j] = counts[i][j];
    const double recalls[4] = {99.69, 88.99, 94.88, 24.32};
    const double precisions[4] = {76.35, 98.78, 68.61, 98.16};
    for (std::size_t c = 0; c < 4; ++c) {
      check(std::fabs(100.0 * cm.row_recall(c) - recalls[c]) < 0.01,
            "row recall " + std::to_string(c) + " off by more than 0.01 pp");
      check(std::fabs(100.0 * cm.col_precision(c) - precisions[c]) < 0.01,
            "column precision " + std::to_string(c) + " off by more than 0.01 pp");
    }
    return "8 printed percentages matched within 0.01 pp";
  });

  criterion(4, "clean 5-fold gate on the default synthetic dataset", [&fx] {
    const auto start = std::chrono::steady_clock::now();
    const Standardizer scaler = fit_standardizer(fx.dataset.rows);
    const LabeledDataset ds = standardize_dataset(fx.dataset, scaler);

    std::ostringstream detail;
    std::ostringstream problems;
    double adaboost_f1 = 0.0;
    double lowest_other = 1.0;
    std::string lowest_name;
    for (Algorithm a : kAllAlgorithms) {
      TrainConfig tc;
      tc.seed = 20240004;
      const double f1 = cross_validate(a, tc, ds, 5).mean_macro_f1;
      detail << algorithm_name(a) << "=" << fmt(f1) << " ";
      if (a == Algorithm::AdaBoost) {
        adaboost_f1 = f1;
      } else {
        if (f1 < lowest_other) {
          lowest_other = f1;
          lowest_name = std::string(algorithm_name(a));
        }
        if ((a == Algorithm::RandomForest || a == Algorithm::Mlp ||
             a == Algorithm::DecisionTree || a == Algorithm::Knn) &&
            f1 < 0.95)
          problems << algorithm_name(a) << " below 0.95 (" << fmt(f1) << "); ";
      }
    }
    if (adaboost_f1 >= lowest_other)
      problems << "adaboost (" << fmt(adaboost_f1) << ") not strictly below " << lowest_name
               << " (" << fmt(lowest_other) << "); ";
    check(problems.str().empty(), problems.str() + "all scores: " + detail.str());
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check(secs < 120.0, "took " + fmt(secs) + " s, limit 120 s");
    return detail.str() + "in " + fmt(secs) + " s";
  });

  criterion(5, "white-box FGSM degrades the substitute itself", [&fx] {
    const ModelReport& sub = find_model(fx.result.report, kSubstituteRowName);
    check(sub.sweep.size() == 5, "expected the default 5-epsilon sweep");
    const double clean = sub.clean_f1;
    const double at_max = sub.sweep.back().f1;
    check(clean - at_max >= 0.05,
          "drop at eps=0.05 is " + fmt(clean - at_max) + ", need >= 0.05");
    double prev = clean;
    for (const auto& p : sub.sweep) {
      check(p.f1 <= prev + 1e-12,
            "self-attack F1 increased at eps=" + fmt(p.epsilon));
      prev = p.f1;
    }
    return "clean " + fmt(clean) + " -> " + fmt(at_max) + " at eps=0.05, non-increasing";
  });

  criterion(6, "transfer: at least half the victims drop at eps=0.05", [&fx] {
    int victims = 0, dropped = 0;
    std::ostringstream detail;
    for (const auto& m : fx.result.report.models) {
      if (m.excluded || m.algorithm == kSubstituteRowName) continue;
      ++victims;
      const double at_max = m.sweep.back().f1;
      if (at_max < m.clean_f1) {
        ++dropped;
        detail << m.algorithm << " ";
      }
    }
    check(victims > 0, "no victims passed the gate");
    check(2 * dropped >= victims,
          std::to_string(dropped) + " of " + std::to_string(victims) + " victims dropped");
    return std::to_string(dropped) + "/" + std::to_string(victims) +
           " victims strictly below clean F1: " + detail.str();
  });

  criterion(7, "adversarial training helps at every epsilon and keeps clean F1", [&fx] {
    int victims = 0;
    for (const auto& m : fx.result.report.models) {
      if (m.excluded || m.algorithm == kSubstituteRowName) continue;
      ++victims;
      check(!m.defended_sweep.empty(), m.algorithm + " has no defended sweep");
      check(m.defended_sweep.size() == m.sweep.size(), "sweep size mismatch");
      for (std::size_t i = 0; i < m.sweep.size(); ++i)
        check(m.defended_sweep[i].f1 >= m.sweep[i].f1,
              m.algorithm + " defended F1 " + fmt(m.defended_sweep[i].f1) +
                  " below undefended " + fmt(m.sweep[i].f1) + " at eps=" +
                  fmt(m.sweep[i].epsilon));
      check(m.clean_f1 - m.defended_clean_f1 <= 0.05,
            m.algorithm + " clean F1 degraded by " + fmt(m.clean_f1 - m.defended_clean_f1));
    }
    check(victims > 0, "no victims passed the gate");
    return std::to_string(victims) + " victims dominated their undefended counterparts";
  });

  criterion(8, "run pipeline is byte-identical across two executions", [&fx] {
    const std::string dir_a = temp_dir("det_a");
    const std::string dir_b = temp_dir("det_b");
    write_experiment_outputs(fx.result, dir_a);
    const ExperimentResult again = run_experiment(fx.cfg, /*defend=*/true);
    write_experiment_outputs(again, dir_b);
    for (const char* name : {"report.json", "figure4.csv", "figure7.csv"}) {
      const std::string a = slurp(dir_a + "/" + name);
      const std::string b = slurp(dir_b + "/" + name);
      check(!a.empty(), std::string(name) + " is empty");
      check(a == b, std::string(name) + " differs between executions");
    }
    return "report.json, figure4.csv, figure7.csv identical";
  });

  criterion(9, "oracle equivalences: knn scan, forest votes, macro-F1 arithmetic", [] {
    Rng rng(20240009);
    // 500-point instance for the k-NN scan.
    LabeledDataset ds;
    for (int i = 0; i < 500; ++i) {
      FeatureVector f;
      for (std::size_t d = 0; d < kFeatureCount; ++d) f[d] = rng.normal();
      ds.push_back(f, kAllLabels[rng.uniform_index(kClassCount)]);
    }
    TrainConfig tc;
    tc.seed = 20240009;
    tc.knn_k = 5;
    const TrainedModel knn = train_classifier(Algorithm::Knn, tc, ds);
    for (int probe = 0; probe < 100; ++probe) {
      FeatureVector x;
      for (std::size_t d = 0; d < kFeatureCount; ++d) x[d] = rng.normal();
      // Brute-force all-pairs scan with the same tie rules.
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t d = 0; d < kFeatureCount; ++d) {
          const double diff = ds.rows[i][d] - x[d];
          d2 += diff * diff;
        }
        dist.push_back({d2, i});
      }
      std::sort(dist.begin(), dist.end());
      std::array<int, kClassCount> votes{};
      std::array<double, kClassCount> sums{};
      for (int i = 0; i < 5; ++i) {
        const auto c = static_cast<std::size_t>(ds.labels[dist[static_cast<std::size_t>(i)].second]);
        ++votes[c];
        sums[c] += std::sqrt(dist[static_cast<std::size_t>(i)].first);
      }
      std::size_t best = kClassCount;
      for (std::size_t c = 0; c < kClassCount; ++c) {
        if (votes[c] == 0) continue;
        if (best == kClassCount || votes[c] > votes[best] ||
            (votes[c] == votes[best] && sums[c] / votes[c] < sums[best] / votes[best]))
          best = c;
      }
      check(knn.predict(x) == kAllLabels[best], "knn disagrees with the brute-force scan");
    }

    // Forest votes against per-tree enumeration.
    LabeledDataset blob;
    for (int i = 0; i < 120; ++i) {
      FeatureVector f;
      const std::size_t c = rng.uniform_index(kClassCount);
      f[0] = (c == 0 ? 2.0 : c == 1 ? -2.0 : 0.0) + rng.normal() * 0.5;
      f[1] = (c == 2 ? 2.0 : c == 3 ? -2.0 : 0.0) + rng.normal() * 0.5;
      blob.push_back(f, kAllLabels[c]);
    }
    tc.forest_trees = 25;
    const TrainedModel forest_model = train_classifier(Algorithm::RandomForest, tc, blob);
    const auto& forest = std::get<RandomForestModel>(forest_model.variant());
    for (int probe = 0; probe < 100; ++probe) {
      FeatureVector x;
      for (std::size_t d = 0; d < kFeatureCount; ++d) x[d] = rng.normal() * 2.0;
      std::array<int, kClassCount> votes{};
      for (const auto& t : forest.trees) ++votes[static_cast<std::size_t>(t.predict(x))];
      std::size_t best = 0;
      for (std::size_t c = 1; c < kClassCount; ++c)
        if (votes[c] > votes[best]) best = c;
      check(forest_model.predict(x) == kAllLabels[best],
            "forest disagrees with per-tree enumeration");
    }

    // Macro-F1 against independent per-class arithmetic.
    for (int trial = 0; trial < 20; ++trial) {
      ConfusionMatrix cm;
      for (std::size_t i = 0; i < kClassCount; ++i)
        for (std::size_t j = 0; j < kClassCount; ++j)
          cm.counts[i][j] = static_cast<std::int64_t>(rng.uniform_index(200));
      cm.counts[0][0] += 1;  // keep the matrix nonempty
      double expected = 0.0;
      for (std::size_t c = 0; c < kClassCount; ++c) {
        double row = 0.0, col = 0.0;
        for (std::size_t j = 0; j < kClassCount; ++j) {
          row += static_cast<double>(cm.counts[c][j]);
          col += static_cast<double>(cm.counts[j][c]);
        }
        if (row == 0.0 && col == 0.0) {
          expected += 1.0;
          continue;
        }
        const double tp = static_cast<double>(cm.counts[c][c]);
        const double p = col > 0.0 ? tp / col : 0.0;
        const double r = row > 0.0 ? tp / row : 0.0;
        expected += (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
      }
      expected /= 4.0;
      check(std::fabs(macro_f1(cm) - expected) < 1e-12, "macro-F1 arithmetic mismatch");
    }
    return "knn scan x100, forest votes x100, macro-F1 x20";
  });

  criterion(10, "feature-CSV input end-to-end (Table 2 ordering when CWRU data is supplied)", [&fx] {
    std::string csv_path;
    bool external = false;
    if (const char* env = std::getenv("CBM_ADVBENCH_CWRU_CSV"); env != nullptr && *env != '\0') {
      csv_path = env;
      external = true;
    } else {
      csv_path = temp_dir("c10") + "/synthetic_features.csv";
      save_feature_csv(csv_path, fx.dataset);
    }

    ExperimentConfig cfg;
    cfg.input_mode = InputMode::Features;
    cfg.features_path = csv_path;
    cfg.gate_min_cv_f1 = external ? 0.95 : 0.5;
    const ExperimentResult result = run_experiment(cfg, /*defend=*/false);
    const std::string out = temp_dir("c10_out");
    write_experiment_outputs(result, out);
    check(!slurp(out + "/report.json").empty(), "report.json missing");
    check(!slurp(out + "/figure4.csv").empty(), "figure4.csv missing");

    if (!external)
      return std::string("no external CWRU CSV supplied (set CBM_ADVBENCH_CWRU_CSV); "
                         "file-input pipeline exercised end-to-end on exported features");

    auto cv_of = [&result](Algorithm a) {
      for (const auto& e : result.gate)
        if (e.algorithm == a) return e.cv_f1;
      throw CheckFailure("missing CV score");
    };
    const double qda = cv_of(Algorithm::Qda);
    const double svm = cv_of(Algorithm::LinearSvm);
    const double nb = cv_of(Algorithm::GaussianNb);
    const double ada = cv_of(Algorithm::AdaBoost);
    for (Algorithm a :
         {Algorithm::RandomForest, Algorithm::Mlp, Algorithm::DecisionTree, Algorithm::Knn})
      check(cv_of(a) >= qda, "top-tier model below QDA");
    check(qda >= svm, "QDA below linear SVM");
    check(svm >= nb, "linear SVM below naive Bayes");
    check(nb > ada, "naive Bayes not above AdaBoost");
    return std::string("external CWRU CSV: Table 2 ordering reproduced");
  });

  if (g_failures == 0) {
    std::cout << "all 10 criteria passed\n";
    return 0;
  }
  std::cout << g_failures << " criteria failed\n";
  return 1;
}
