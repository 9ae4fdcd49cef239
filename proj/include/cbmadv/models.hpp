#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cbmadv/dataset.hpp"
#include "cbmadv/mlp.hpp"
#include "cbmadv/train_config.hpp"

namespace cbmadv {

enum class Algorithm {
  Mlp,
  DecisionTree,
  RandomForest,
  Knn,
  GaussianNb,
  Qda,
  LinearSvm,
  AdaBoost,
};

inline constexpr std::array<Algorithm, 8> kAllAlgorithms = {
    Algorithm::Mlp,        Algorithm::DecisionTree, Algorithm::RandomForest,
    Algorithm::Knn,        Algorithm::GaussianNb,   Algorithm::Qda,
    Algorithm::LinearSvm,  Algorithm::AdaBoost,
};

std::string_view algorithm_name(Algorithm a);          // "mlp", "decision_tree", ...
std::string_view algorithm_display_name(Algorithm a);  // "Multilayer Perceptron", ...
Algorithm parse_algorithm(std::string_view name);

// Binary CART node; feature < 0 marks a leaf.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  Label leaf = Label::Ball;
};

struct DecisionTreeModel {
  std::vector<TreeNode> nodes;
  int max_depth = -1;
  std::uint64_t seed = 0;
  Label predict(const FeatureVector& x) const;
};

struct RandomForestModel {
  std::vector<DecisionTreeModel> trees;
  int mtry = 4;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  Label predict(const FeatureVector& x) const;  // majority vote, ties to lowest class
};

struct KnnModel {
  int k = 5;
  std::vector<FeatureVector> points;
  std::vector<Label> point_labels;
  Label predict(const FeatureVector& x) const;
};

struct GaussianNbModel {
  struct ClassStats {
    Label label;
    double log_prior;
    std::array<double, kFeatureCount> mean;
    std::array<double, kFeatureCount> variance;  // floored at 1e-9
  };
  std::vector<ClassStats> classes;
  Label predict(const FeatureVector& x) const;
};

struct QdaModel {
  struct ClassStats {
    Label label;
    double log_prior;
    std::array<double, kFeatureCount> mean;
    // Lower Cholesky factor of the (possibly ridge-regularized) covariance,
    // row-major 12x12, and its log-determinant.
    std::array<double, kFeatureCount * kFeatureCount> chol;
    double log_det;
  };
  std::vector<ClassStats> classes;
  double ridge = 1e-6;
  Label predict(const FeatureVector& x) const;
};

struct LinearSvmModel {
  struct ClassScore {
    Label label;
    std::array<double, kFeatureCount> w;
    double b;
  };
  std::vector<ClassScore> classes;  // one-vs-rest; argmax decision score
  double lambda = 1e-4;
  Label predict(const FeatureVector& x) const;
};

struct AdaBoostModel {
  struct Stage {
    double alpha;
    DecisionTreeModel stump;
  };
  std::vector<Stage> stages;
  Label predict(const FeatureVector& x) const;
};

// Immutable tagged union over the classifier suite with a uniform predict
// interface.
class TrainedModel {
 public:
  using Variant = std::variant<MlpModel, DecisionTreeModel, RandomForestModel, KnnModel,
                               GaussianNbModel, QdaModel, LinearSvmModel, AdaBoostModel>;

  TrainedModel() = default;
  explicit TrainedModel(Variant m) : model_(std::move(m)) {}

  Algorithm algorithm() const;
  Label predict(const FeatureVector& x) const;
  std::vector<Label> predict_batch(const std::vector<FeatureVector>& xs) const;

  const Variant& variant() const { return model_; }
  const MlpModel* as_mlp() const { return std::get_if<MlpModel>(&model_); }

 private:
  Variant model_;
};

TrainedModel train_classifier(Algorithm kind, const TrainConfig& cfg,
                              const LabeledDataset& ds);

// Versioned text format; save -> load -> predict is prediction-identical
// (parameters are written as hex floats).
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);

}  // namespace cbmadv
