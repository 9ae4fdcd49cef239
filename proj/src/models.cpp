#include "cbmadv/models.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "cbmadv/error.hpp"
#include "cbmadv/rng.hpp"
#include "cbmadv/textio.hpp"
#include "tree_internal.hpp"

namespace cbmadv {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNbVarianceFloor = 1e-9;

std::vector<std::size_t> present_classes(const LabeledDataset& ds) {
  const auto counts = ds.class_counts();
  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < kClassCount; ++c)
    if (counts[c] > 0) present.push_back(c);
  return present;
}

void require_trainable(const LabeledDataset& ds) {
  if (ds.rows.empty()) throw EmptyClass("cannot train on an empty dataset");
  if (ds.rows.size() != ds.labels.size())
    throw ConfigError("dataset rows and labels disagree in length");
}

// In-place lower Cholesky of a row-major d x d matrix; false when a pivot is
// not strictly positive.
bool cholesky(std::vector<double>& a, std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    double diag = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * d + k] * a[j * d + k];
    if (!(diag > 0.0)) return false;
    const double lj = std::sqrt(diag);
    a[j * d + j] = lj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= a[i * d + k] * a[j * d + k];
      a[i * d + j] = s / lj;
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) a[i * d + j] = 0.0;
  return true;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::Mlp: return "mlp";
    case Algorithm::DecisionTree: return "decision_tree";
    case Algorithm::RandomForest: return "random_forest";
    case Algorithm::Knn: return "knn";
    case Algorithm::GaussianNb: return "gaussian_nb";
    case Algorithm::Qda: return "qda";
    case Algorithm::LinearSvm: return "linear_svm";
    case Algorithm::AdaBoost: return "adaboost";
  }
  return "?";
}

std::string_view algorithm_display_name(Algorithm a) {
  switch (a) {
    case Algorithm::Mlp: return "Multilayer Perceptron";
    case Algorithm::DecisionTree: return "Decision Tree";
    case Algorithm::RandomForest: return "Random Forest";
    case Algorithm::Knn: return "K-Nearest Neighbors";
    case Algorithm::GaussianNb: return "Naive Bayes";
    case Algorithm::Qda: return "Quadratic Discriminant Analysis";
    case Algorithm::LinearSvm: return "Support Vector Machine (Linear)";
    case Algorithm::AdaBoost: return "AdaBoost";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (Algorithm a : kAllAlgorithms)
    if (algorithm_name(a) == name) return a;
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

Label KnnModel::predict(const FeatureVector& x) const {
  const std::size_t n = points.size();
  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const double d = points[i][f] - x[f];
      d2 += d * d;
    }
    dist[i] = {d2, i};
  }
  const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), n);
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());

  std::array<int, kClassCount> votes{};
  std::array<double, kClassCount> dist_sum{};
  for (std::size_t i = 0; i < kk; ++i) {
    const auto c = static_cast<std::size_t>(point_labels[dist[i].second]);
    ++votes[c];
    dist_sum[c] += std::sqrt(dist[i].first);
  }
  // Majority vote; ties by smallest mean distance, then lowest class index.
  std::size_t best = kClassCount;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (votes[c] == 0) continue;
    if (best == kClassCount) {
      best = c;
      continue;
    }
    if (votes[c] > votes[best]) {
      best = c;
    } else if (votes[c] == votes[best]) {
      const double mean_c = dist_sum[c] / votes[c];
      const double mean_b = dist_sum[best] / votes[best];
      if (mean_c < mean_b) best = c;
    }
  }
  return kAllLabels[best];
}

Label GaussianNbModel::predict(const FeatureVector& x) const {
  double best_score = 0.0;
  std::size_t best = classes.size();
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const auto& cs = classes[ci];
    double score = cs.log_prior;
    for (std::size_t f = 0; f < kFeatureCount; ++f) {
      const double d = x[f] - cs.mean[f];
      score += -0.5 * std::log(2.0 * kPi * cs.variance[f]) -
               d * d / (2.0 * cs.variance[f]);
    }
    if (best == classes.size() || score > best_score) {
      best = ci;
      best_score = score;
    }
  }
  return classes[best].label;
}

Label QdaModel::predict(const FeatureVector& x) const {
  double best_score = 0.0;
  std::size_t best = classes.size();
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const auto& cs = classes[ci];
    // Forward substitution L y = x - mean; Mahalanobis = |y|^2.
    std::array<double, kFeatureCount> y{};
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      double s = x[i] - cs.mean[i];
      for (std::size_t j = 0; j < i; ++j) s -= cs.chol[i * kFeatureCount + j] * y[j];
      y[i] = s / cs.chol[i * kFeatureCount + i];
    }
    double maha = 0.0;
    for (double v : y) maha += v * v;
    const double score = cs.log_prior - 0.5 * cs.log_det - 0.5 * maha;
    if (best == classes.size() || score > best_score) {
      best = ci;
      best_score = score;
    }
  }
  return classes[best].label;
}

Label LinearSvmModel::predict(const FeatureVector& x) const {
  double best_score = 0.0;
  std::size_t best = classes.size();
  for (std::size_t ci = 0; ci < classes.size(); ++ci) {
    const auto& cs = classes[ci];
    double score = cs.b;
    for (std::size_t f = 0; f < kFeatureCount; ++f) score += cs.w[f] * x[f];
    if (best == classes.size() || score > best_score) {
      best = ci;
      best_score = score;
    }
  }
  return classes[best].label;
}

namespace {

DecisionTreeModel train_decision_tree(const TrainConfig& cfg, const LabeledDataset& ds) {
  std::vector<double> weights(ds.size(), 1.0);
  std::vector<std::size_t> all(ds.size());
  std::iota(all.begin(), all.end(), 0);
  detail::TreeTrainOptions opts{cfg.tree_max_depth, static_cast<int>(kFeatureCount)};
  auto model = detail::train_cart(ds.rows, ds.labels, weights, all, opts, nullptr);
  model.seed = cfg.seed;
  return model;
}

RandomForestModel train_random_forest(const TrainConfig& cfg, const LabeledDataset& ds) {
  RandomForestModel forest;
  forest.mtry = cfg.forest_mtry;
  forest.bootstrap = cfg.forest_bootstrap;
  forest.seed = cfg.seed;
  std::vector<double> weights(ds.size(), 1.0);
  detail::TreeTrainOptions opts{cfg.tree_max_depth, cfg.forest_mtry};
  const bool subsampled = cfg.forest_mtry < static_cast<int>(kFeatureCount);
  forest.trees.reserve(static_cast<std::size_t>(cfg.forest_trees));
  for (int t = 0; t < cfg.forest_trees; ++t) {
    Rng tree_rng(derive_seed(cfg.seed, seeds::kForestTreeBase + static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> samples(ds.size());
    if (cfg.forest_bootstrap) {
      for (auto& s : samples) s = tree_rng.uniform_index(ds.size());
    } else {
      std::iota(samples.begin(), samples.end(), 0);
    }
    forest.trees.push_back(detail::train_cart(ds.rows, ds.labels, weights, samples, opts,
                                              subsampled ? &tree_rng : nullptr));
  }
  return forest;
}

GaussianNbModel train_gaussian_nb(const TrainConfig&, const LabeledDataset& ds) {
  GaussianNbModel model;
  const auto counts = ds.class_counts();
  for (std::size_t c : present_classes(ds)) {
    GaussianNbModel::ClassStats cs;
    cs.label = kAllLabels[c];
    const double n_c = static_cast<double>(counts[c]);
    cs.log_prior = std::log(n_c / static_cast<double>(ds.size()));
    cs.mean.fill(0.0);
    cs.variance.fill(0.0);
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == cs.label)
        for (std::size_t f = 0; f < kFeatureCount; ++f) cs.mean[f] += ds.rows[i][f];
    for (double& m : cs.mean) m /= n_c;
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == cs.label)
        for (std::size_t f = 0; f < kFeatureCount; ++f) {
          const double d = ds.rows[i][f] - cs.mean[f];
          cs.variance[f] += d * d;
        }
    for (double& v : cs.variance) v = std::max(v / n_c, kNbVarianceFloor);
    model.classes.push_back(cs);
  }
  return model;
}

QdaModel train_qda(const TrainConfig&, const LabeledDataset& ds) {
  QdaModel model;
  const auto counts = ds.class_counts();
  for (std::size_t c : present_classes(ds)) {
    QdaModel::ClassStats cs;
    cs.label = kAllLabels[c];
    const double n_c = static_cast<double>(counts[c]);
    cs.log_prior = std::log(n_c / static_cast<double>(ds.size()));
    cs.mean.fill(0.0);
    for (std::size_t i = 0; i < ds.size(); ++i)
      if (ds.labels[i] == cs.label)
        for (std::size_t f = 0; f < kFeatureCount; ++f) cs.mean[f] += ds.rows[i][f];
    for (double& m : cs.mean) m /= n_c;

    std::vector<double> cov(kFeatureCount * kFeatureCount, 0.0);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.labels[i] != cs.label) continue;
      std::array<double, kFeatureCount> d;
      for (std::size_t f = 0; f < kFeatureCount; ++f) d[f] = ds.rows[i][f] - cs.mean[f];
      for (std::size_t a = 0; a < kFeatureCount; ++a)
        for (std::size_t b = 0; b < kFeatureCount; ++b) cov[a * kFeatureCount + b] += d[a] * d[b];
    }
    for (double& v : cov) v /= n_c;

    std::vector<double> chol = cov;
    if (!cholesky(chol, kFeatureCount)) {
      chol = cov;
      for (std::size_t f = 0; f < kFeatureCount; ++f)
        chol[f * kFeatureCount + f] += model.ridge;
      if (!cholesky(chol, kFeatureCount))
        throw SingularCovariance("class '" + std::string(label_name(cs.label)) +
                                 "' covariance is singular even after ridge " +
                                 format_double(model.ridge));
    }
    cs.log_det = 0.0;
    for (std::size_t f = 0; f < kFeatureCount; ++f)
      cs.log_det += 2.0 * std::log(chol[f * kFeatureCount + f]);
    std::copy(chol.begin(), chol.end(), cs.chol.begin());
    model.classes.push_back(cs);
  }
  return model;
}

LinearSvmModel train_linear_svm(const TrainConfig& cfg, const LabeledDataset& ds) {
  LinearSvmModel model;
  model.lambda = cfg.svm_lambda;
  const double n = static_cast<double>(ds.size());
  for (std::size_t c : present_classes(ds)) {
    LinearSvmModel::ClassScore cs;
    cs.label = kAllLabels[c];
    cs.w.fill(0.0);
    cs.b = 0.0;
    for (int epoch = 0; epoch < cfg.svm_epochs; ++epoch) {
      const double lr = cfg.svm_learning_rate / (1.0 + static_cast<double>(epoch) / 100.0);
      std::array<double, kFeatureCount> grad{};
      double grad_b = 0.0;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const double y = ds.labels[i] == cs.label ? 1.0 : -1.0;
        double score = cs.b;
        for (std::size_t f = 0; f < kFeatureCount; ++f) score += cs.w[f] * ds.rows[i][f];
        if (y * score < 1.0) {
          for (std::size_t f = 0; f < kFeatureCount; ++f) grad[f] -= y * ds.rows[i][f];
          grad_b -= y;
        }
      }
      for (std::size_t f = 0; f < kFeatureCount; ++f)
        cs.w[f] -= lr * (cfg.svm_lambda * cs.w[f] + grad[f] / n);
      cs.b -= lr * grad_b / n;
    }
    model.classes.push_back(cs);
  }
  return model;
}

AdaBoostModel train_adaboost(const TrainConfig& cfg, const LabeledDataset& ds) {
  AdaBoostModel model;
  const std::size_t n = ds.size();
  const double k_classes = static_cast<double>(present_classes(ds).size());
  std::vector<double> weights(n, 1.0 / static_cast<double>(n));
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  detail::TreeTrainOptions stump_opts{1, static_cast<int>(kFeatureCount)};

  for (int round = 0; round < cfg.adaboost_rounds; ++round) {
    auto stump = detail::train_cart(ds.rows, ds.labels, weights, all, stump_opts, nullptr);
    double err = 0.0;
    std::vector<bool> wrong(n);
    for (std::size_t i = 0; i < n; ++i) {
      wrong[i] = stump.predict(ds.rows[i]) != ds.labels[i];
      if (wrong[i]) err += weights[i];
    }
    if (err <= 1e-10) {
      // Perfect stage: dominate the vote and stop.
      model.stages.push_back({std::log((1.0 - 1e-10) / 1e-10) + std::log(k_classes - 1.0),
                              std::move(stump)});
      break;
    }
    if (err >= 1.0 - 1.0 / k_classes) {
      if (model.stages.empty()) model.stages.push_back({1.0, std::move(stump)});
      break;  // no better than chance; SAMME stops here
    }
    const double alpha = std::log((1.0 - err) / err) + std::log(k_classes - 1.0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (wrong[i]) weights[i] *= std::exp(alpha);
      total += weights[i];
    }
    for (double& w : weights) w /= total;
    model.stages.push_back({alpha, std::move(stump)});
  }
  return model;
}

}  // namespace

Algorithm TrainedModel::algorithm() const {
  return std::visit(
      [](const auto& m) -> Algorithm {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, MlpModel>) return Algorithm::Mlp;
        if constexpr (std::is_same_v<T, DecisionTreeModel>) return Algorithm::DecisionTree;
        if constexpr (std::is_same_v<T, RandomForestModel>) return Algorithm::RandomForest;
        if constexpr (std::is_same_v<T, KnnModel>) return Algorithm::Knn;
        if constexpr (std::is_same_v<T, GaussianNbModel>) return Algorithm::GaussianNb;
        if constexpr (std::is_same_v<T, QdaModel>) return Algorithm::Qda;
        if constexpr (std::is_same_v<T, LinearSvmModel>) return Algorithm::LinearSvm;
        if constexpr (std::is_same_v<T, AdaBoostModel>) return Algorithm::AdaBoost;
      },
      model_);
}

Label TrainedModel::predict(const FeatureVector& x) const {
  return std::visit([&x](const auto& m) { return m.predict(x); }, model_);
}

std::vector<Label> TrainedModel::predict_batch(const std::vector<FeatureVector>& xs) const {
  std::vector<Label> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

TrainedModel train_classifier(Algorithm kind, const TrainConfig& cfg,
                              const LabeledDataset& ds) {
  cfg.validate();
  require_trainable(ds);
  switch (kind) {
    case Algorithm::Mlp:
      return TrainedModel(mlp_train(cfg, ds, cfg.mlp_hidden));
    case Algorithm::DecisionTree:
      return TrainedModel(train_decision_tree(cfg, ds));
    case Algorithm::RandomForest:
      return TrainedModel(train_random_forest(cfg, ds));
    case Algorithm::Knn: {
      KnnModel m;
      m.k = cfg.knn_k;
      m.points = ds.rows;
      m.point_labels = ds.labels;
      return TrainedModel(std::move(m));
    }
    case Algorithm::GaussianNb:
      return TrainedModel(train_gaussian_nb(cfg, ds));
    case Algorithm::Qda:
      return TrainedModel(train_qda(cfg, ds));
    case Algorithm::LinearSvm:
      return TrainedModel(train_linear_svm(cfg, ds));
    case Algorithm::AdaBoost:
      return TrainedModel(train_adaboost(cfg, ds));
  }
  throw ConfigError("unhandled algorithm");
}

}  // namespace cbmadv
