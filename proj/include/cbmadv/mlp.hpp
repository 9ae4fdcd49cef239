#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "cbmadv/dataset.hpp"
#include "cbmadv/features.hpp"
#include "cbmadv/train_config.hpp"

namespace cbmadv {

// Feed-forward network: rectifier hidden layers, softmax output over the four
// classes. Weights for layer l are stored row-major as out x in.
struct MlpModel {
  std::vector<std::size_t> layer_sizes;         // input size first, 4 last
  std::vector<std::vector<double>> weights;     // one flat matrix per layer
  std::vector<std::vector<double>> biases;
  std::uint64_t seed = 0;
  double final_train_macro_f1 = 0.0;

  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  // Softmax class probabilities; sums to 1 within 1e-9.
  std::vector<double> forward(std::span<const double> x) const;
  Label predict(const FeatureVector& x) const;
};

// Builds a network with the given hidden layer sizes and trains it by
// mini-batch SGD on cross-entropy. Deterministic under cfg.seed; throws
// NonFiniteLoss naming the epoch if training diverges.
MlpModel mlp_train(const TrainConfig& cfg, const LabeledDataset& ds,
                   const std::vector<std::size_t>& hidden_layers);

// Cross-entropy of the true class, probabilities floored at 1e-12.
double mlp_loss(const MlpModel& model, const FeatureVector& x, Label y);

// Exact gradient of mlp_loss with respect to the input, by reverse-mode
// accumulation through every layer.
std::array<double, kFeatureCount> mlp_input_gradient(const MlpModel& model,
                                                     const FeatureVector& x, Label y);

// FNV-1a over the architecture and parameter bits; identifies the exact
// substitute a set of adversarial samples was crafted against.
std::string mlp_fingerprint(const MlpModel& model);

}  // namespace cbmadv
