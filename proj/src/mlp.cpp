#include "cbmadv/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>

#include "cbmadv/error.hpp"
#include "cbmadv/metrics.hpp"
#include "cbmadv/rng.hpp"
#include "cbmadv/textio.hpp"

namespace cbmadv {

namespace {

void softmax_inplace(std::vector<double>& z) {
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - m);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

// Forward pass keeping pre-activations per layer; activations[0] is the input.
struct ForwardTrace {
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> pre_activations;
  std::vector<double> probs;
};

ForwardTrace forward_trace(const MlpModel& m, std::span<const double> x) {
  ForwardTrace t;
  t.activations.emplace_back(x.begin(), x.end());
  const std::size_t n_layers = m.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    const std::size_t in = m.layer_sizes[l];
    const std::size_t out = m.layer_sizes[l + 1];
    const auto& a = t.activations.back();
    std::vector<double> z(out);
    for (std::size_t o = 0; o < out; ++o) {
      double s = m.biases[l][o];
      const double* wrow = m.weights[l].data() + o * in;
      for (std::size_t i = 0; i < in; ++i) s += wrow[i] * a[i];
      z[o] = s;
    }
    t.pre_activations.push_back(z);
    if (l + 1 < n_layers) {
      for (double& v : z) v = std::max(0.0, v);
      t.activations.push_back(std::move(z));
    } else {
      softmax_inplace(z);
      t.probs = std::move(z);
    }
  }
  return t;
}

// Backward pass from softmax cross-entropy. Fills per-layer weight/bias
// gradients when accumulators are given, and always returns the gradient with
// respect to the input.
std::vector<double> backward(const MlpModel& m, const ForwardTrace& t, std::size_t y,
                             std::vector<std::vector<double>>* grad_w,
                             std::vector<std::vector<double>>* grad_b) {
  const std::size_t n_layers = m.weights.size();
  std::vector<double> delta = t.probs;
  delta[y] -= 1.0;
  for (std::size_t li = n_layers; li-- > 0;) {
    const std::size_t in = m.layer_sizes[li];
    const std::size_t out = m.layer_sizes[li + 1];
    const auto& a = t.activations[li];
    if (grad_w) {
      auto& gw = (*grad_w)[li];
      auto& gb = (*grad_b)[li];
      for (std::size_t o = 0; o < out; ++o) {
        const double d = delta[o];
        double* grow = gw.data() + o * in;
        for (std::size_t i = 0; i < in; ++i) grow[i] += d * a[i];
        gb[o] += d;
      }
    }
    std::vector<double> prev(in, 0.0);
    for (std::size_t o = 0; o < out; ++o) {
      const double d = delta[o];
      const double* wrow = m.weights[li].data() + o * in;
      for (std::size_t i = 0; i < in; ++i) prev[i] += wrow[i] * d;
    }
    if (li > 0) {
      const auto& z = t.pre_activations[li - 1];
      for (std::size_t i = 0; i < in; ++i)
        if (z[i] <= 0.0) prev[i] = 0.0;
    }
    delta = std::move(prev);
  }
  return delta;
}

}  // namespace

std::vector<double> MlpModel::forward(std::span<const double> x) const {
  if (x.size() != input_size())
    throw DimensionMismatch("MLP expects " + std::to_string(input_size()) +
                            " inputs, got " + std::to_string(x.size()));
  return forward_trace(*this, x).probs;
}

Label MlpModel::predict(const FeatureVector& x) const {
  const auto probs = forward(std::span<const double>(x.data(), x.size()));
  const std::size_t best =
      static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
  return kAllLabels[best];
}

MlpModel mlp_train(const TrainConfig& cfg, const LabeledDataset& ds,
                   const std::vector<std::size_t>& hidden_layers) {
  cfg.validate();
  if (ds.rows.empty()) throw EmptyClass("cannot train on an empty dataset");
  const auto counts = ds.class_counts();
  if (std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) < 2)
    throw EmptyClass("MLP training needs at least 2 classes present");

  MlpModel m;
  m.seed = cfg.seed;
  m.layer_sizes.push_back(kFeatureCount);
  for (std::size_t h : hidden_layers) {
    if (h == 0) throw ConfigError("hidden layer size must be positive");
    m.layer_sizes.push_back(h);
  }
  m.layer_sizes.push_back(kClassCount);

  Rng init_rng(derive_seed(cfg.seed, seeds::kMlpInit));
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    const std::size_t in = m.layer_sizes[l];
    const std::size_t out = m.layer_sizes[l + 1];
    std::vector<double> w(in * out);
    const double scale = 1.0 / std::sqrt(static_cast<double>(in));
    for (double& v : w) v = init_rng.normal() * scale;
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(out, 0.0);
  }

  const std::size_t n = ds.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  std::vector<std::vector<double>> grad_w, grad_b;
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    grad_w.emplace_back(m.layer_sizes[l] * m.layer_sizes[l + 1], 0.0);
    grad_b.emplace_back(m.layer_sizes[l + 1], 0.0);
  }

  for (int epoch = 0; epoch < cfg.mlp_epochs; ++epoch) {
    Rng epoch_rng(derive_seed(cfg.seed, seeds::kMlpEpochBase + static_cast<std::uint64_t>(epoch)));
    epoch_rng.shuffle(order);
    const double lr = cfg.mlp_learning_rate *
                      std::pow(cfg.mlp_lr_decay, epoch / cfg.mlp_lr_decay_every);

    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.mlp_batch_size)) {
      const std::size_t end = std::min(n, start + static_cast<std::size_t>(cfg.mlp_batch_size));
      const double batch = static_cast<double>(end - start);
      for (auto& g : grad_w) std::fill(g.begin(), g.end(), 0.0);
      for (auto& g : grad_b) std::fill(g.begin(), g.end(), 0.0);

      double batch_loss = 0.0;
      for (std::size_t s = start; s < end; ++s) {
        const std::size_t row = order[s];
        const auto& x = ds.rows[row];
        const auto t = forward_trace(m, std::span<const double>(x.data(), x.size()));
        const auto y = static_cast<std::size_t>(ds.labels[row]);
        batch_loss -= std::log(std::max(t.probs[y], 1e-12));
        backward(m, t, y, &grad_w, &grad_b);
      }
      if (!std::isfinite(batch_loss))
        throw NonFiniteLoss(epoch, "training loss became non-finite at epoch " +
                                       std::to_string(epoch));
      for (std::size_t l = 0; l < m.weights.size(); ++l) {
        const double step = lr / batch;
        for (std::size_t i = 0; i < m.weights[l].size(); ++i)
          m.weights[l][i] -= step * grad_w[l][i];
        for (std::size_t i = 0; i < m.biases[l].size(); ++i)
          m.biases[l][i] -= step * grad_b[l][i];
      }
    }
  }

  std::vector<Label> preds;
  preds.reserve(n);
  for (const auto& x : ds.rows) preds.push_back(m.predict(x));
  m.final_train_macro_f1 = macro_f1(confusion_matrix(preds, ds.labels));
  return m;
}

double mlp_loss(const MlpModel& model, const FeatureVector& x, Label y) {
  const auto probs = model.forward(std::span<const double>(x.data(), x.size()));
  return -std::log(std::max(probs[static_cast<std::size_t>(y)], 1e-12));
}

std::array<double, kFeatureCount> mlp_input_gradient(const MlpModel& model,
                                                     const FeatureVector& x, Label y) {
  if (model.input_size() != kFeatureCount)
    throw DimensionMismatch("input gradient requires a 12-input network");
  const auto t = forward_trace(model, std::span<const double>(x.data(), x.size()));
  const auto g = backward(model, t, static_cast<std::size_t>(y), nullptr, nullptr);
  std::array<double, kFeatureCount> out{};
  std::copy(g.begin(), g.end(), out.begin());
  return out;
}

std::string mlp_fingerprint(const MlpModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  auto mix_double = [&](double d) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(d));
    std::memcpy(&bits, &d, sizeof(bits));
    mix(bits);
  };
  for (std::size_t s : model.layer_sizes) mix(s);
  for (const auto& w : model.weights)
    for (double v : w) mix_double(v);
  for (const auto& b : model.biases)
    for (double v : b) mix_double(v);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "mlp-%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace cbmadv
