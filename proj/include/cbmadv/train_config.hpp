#pragma once

#include <cstdint>
#include <vector>

#include "cbmadv/error.hpp"

namespace cbmadv {

// Hyperparameters for the whole classifier suite. The architecture choices are
// fixed by the experiment; everything here is an optimizer/estimator knob.
struct TrainConfig {
  // MLP (mini-batch SGD on cross-entropy)
  int mlp_epochs = 200;
  int mlp_batch_size = 32;
  double mlp_learning_rate = 0.01;
  double mlp_lr_decay = 0.5;
  int mlp_lr_decay_every = 100;
  std::vector<std::size_t> mlp_hidden = {32};  // victim MLP architecture

  // Decision tree / random forest
  int tree_max_depth = -1;  // -1: unlimited
  int forest_trees = 100;
  int forest_mtry = 4;  // ceil(sqrt(12)) features per split
  bool forest_bootstrap = true;

  // k-NN
  int knn_k = 5;

  // Linear SVM (one-vs-rest hinge, full-batch subgradient descent)
  double svm_lambda = 1e-4;
  int svm_epochs = 400;
  double svm_learning_rate = 0.3;

  // AdaBoost (SAMME over depth-1 trees)
  int adaboost_rounds = 50;

  std::uint64_t seed = 0;

  void validate() const {
    if (mlp_epochs < 0 || mlp_batch_size < 1 || !(mlp_learning_rate > 0.0) ||
        !(mlp_lr_decay > 0.0) || mlp_lr_decay_every < 1)
      throw ConfigError("invalid MLP hyperparameters");
    if (forest_trees < 1 || forest_mtry < 1 || knn_k < 1)
      throw ConfigError("invalid tree/forest/knn hyperparameters");
    if (!(svm_lambda > 0.0) || svm_epochs < 1 || !(svm_learning_rate > 0.0))
      throw ConfigError("invalid SVM hyperparameters");
    if (adaboost_rounds < 1) throw ConfigError("invalid AdaBoost rounds");
  }
};

}  // namespace cbmadv
