#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cbmadv/error.hpp"
#include "cbmadv/models.hpp"
#include "cbmadv/rng.hpp"
#include "tree_internal.hpp"

namespace cbmadv::detail {

namespace {

struct NodeContext {
  std::vector<std::size_t> samples;  // indices into rows; duplicates allowed
  int depth;
  int node_index;  // position in the output node vector to fill
};

Label weighted_majority(const std::array<double, kClassCount>& class_weight) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c)
    if (class_weight[c] > class_weight[best]) best = c;
  return kAllLabels[best];
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

// Exhaustive best split by Gini impurity; thresholds are midpoints between
// sorted adjacent distinct values. Strict comparisons keep the first best
// (lowest feature index, then lowest threshold) on ties.
SplitChoice best_split(const std::vector<FeatureVector>& rows,
                       const std::vector<Label>& labels,
                       const std::vector<double>& weights,
                       const std::vector<std::size_t>& samples,
                       const std::vector<int>& features) {
  std::array<double, kClassCount> total_w{};
  for (std::size_t i : samples) total_w[static_cast<std::size_t>(labels[i])] += weights[i];
  const double w_all = std::accumulate(total_w.begin(), total_w.end(), 0.0);
  double parent_sq = 0.0;
  for (double w : total_w) parent_sq += w * w;
  const double parent_gini = 1.0 - parent_sq / (w_all * w_all);

  SplitChoice best;
  std::vector<std::pair<double, std::size_t>> order(samples.size());
  for (int f : features) {
    for (std::size_t s = 0; s < samples.size(); ++s)
      order[s] = {rows[samples[s]][static_cast<std::size_t>(f)], samples[s]};
    std::sort(order.begin(), order.end());

    std::array<double, kClassCount> left_w{};
    double wl = 0.0, left_sq = 0.0;
    double right_sq = parent_sq;
    std::array<double, kClassCount> right_w = total_w;
    for (std::size_t s = 0; s + 1 < order.size(); ++s) {
      const std::size_t row = order[s].second;
      const auto c = static_cast<std::size_t>(labels[row]);
      const double w = weights[row];
      left_sq += w * (2.0 * left_w[c] + w);
      right_sq -= w * (2.0 * right_w[c] - w);
      left_w[c] += w;
      right_w[c] -= w;
      wl += w;
      if (order[s + 1].first <= order[s].first) continue;  // not a distinct boundary
      const double wr = w_all - wl;
      if (wl <= 0.0 || wr <= 0.0) continue;
      const double gini_l = 1.0 - left_sq / (wl * wl);
      const double gini_r = 1.0 - right_sq / (wr * wr);
      const double gain = parent_gini - (wl * gini_l + wr * gini_r) / w_all;
      if (gain > best.gain + 1e-12) {
        best.found = true;
        best.feature = f;
        best.threshold = 0.5 * (order[s].first + order[s + 1].first);
        best.gain = gain;
      }
    }
  }
  return best;
}

}  // namespace

DecisionTreeModel train_cart(const std::vector<FeatureVector>& rows,
                             const std::vector<Label>& labels,
                             const std::vector<double>& weights,
                             const std::vector<std::size_t>& sample_indices,
                             const TreeTrainOptions& opts, Rng* feature_rng) {
  if (sample_indices.empty()) throw EmptyClass("cannot grow a tree from 0 samples");
  const int depth_limit = opts.max_depth < 0 ? std::numeric_limits<int>::max()
                                             : opts.max_depth;
  DecisionTreeModel model;
  model.max_depth = opts.max_depth;

  std::vector<int> all_features(kFeatureCount);
  std::iota(all_features.begin(), all_features.end(), 0);
  const bool subsample = feature_rng != nullptr &&
                         opts.mtry < static_cast<int>(kFeatureCount);

  std::vector<NodeContext> stack;
  model.nodes.emplace_back();
  stack.push_back({sample_indices, 0, 0});

  while (!stack.empty()) {
    NodeContext ctx = std::move(stack.back());
    stack.pop_back();
    TreeNode& node = model.nodes[static_cast<std::size_t>(ctx.node_index)];

    std::array<double, kClassCount> class_w{};
    for (std::size_t i : ctx.samples)
      class_w[static_cast<std::size_t>(labels[i])] += weights[i];
    const int present =
        static_cast<int>(std::count_if(class_w.begin(), class_w.end(),
                                       [](double w) { return w > 0.0; }));

    const bool stop = ctx.samples.size() < 2 || present <= 1 || ctx.depth >= depth_limit;
    SplitChoice split;
    if (!stop) {
      std::vector<int> features;
      if (subsample) {
        // Partial Fisher-Yates over a scratch copy, then sorted so the scan
        // order (and tie-breaking) is canonical.
        std::vector<int> pool = all_features;
        for (int j = 0; j < opts.mtry; ++j) {
          const std::size_t pick =
              static_cast<std::size_t>(j) +
              feature_rng->uniform_index(pool.size() - static_cast<std::size_t>(j));
          std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
        }
        features.assign(pool.begin(), pool.begin() + opts.mtry);
        std::sort(features.begin(), features.end());
      } else {
        features = all_features;
      }
      split = best_split(rows, labels, weights, ctx.samples, features);
    }

    if (stop || !split.found) {
      node.feature = -1;
      node.leaf = weighted_majority(class_w);
      continue;
    }

    std::vector<std::size_t> left, right;
    for (std::size_t i : ctx.samples) {
      if (rows[i][static_cast<std::size_t>(split.feature)] <= split.threshold)
        left.push_back(i);
      else
        right.push_back(i);
    }

    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = static_cast<int>(model.nodes.size());
    node.right = node.left + 1;
    const int left_idx = node.left;
    const int right_idx = node.right;
    model.nodes.emplace_back();
    model.nodes.emplace_back();
    // Right is pushed first so the left child is processed (and numbered
    // depth-first) next; with subsampling this also fixes the rng draw order.
    stack.push_back({std::move(right), ctx.depth + 1, right_idx});
    stack.push_back({std::move(left), ctx.depth + 1, left_idx});
  }
  return model;
}

}  // namespace cbmadv::detail

namespace cbmadv {

Label DecisionTreeModel::predict(const FeatureVector& x) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    const TreeNode& n = nodes[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold
                                     ? n.left
                                     : n.right);
  }
  return nodes[i].leaf;
}

Label RandomForestModel::predict(const FeatureVector& x) const {
  std::array<int, kClassCount> votes{};
  for (const auto& t : trees) ++votes[static_cast<std::size_t>(t.predict(x))];
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c)
    if (votes[c] > votes[best]) best = c;
  return kAllLabels[best];
}

Label AdaBoostModel::predict(const FeatureVector& x) const {
  std::array<double, kClassCount> score{};
  for (const auto& s : stages) score[static_cast<std::size_t>(s.stump.predict(x))] += s.alpha;
  std::size_t best = 0;
  for (std::size_t c = 1; c < kClassCount; ++c)
    if (score[c] > score[best]) best = c;
  return kAllLabels[best];
}

}  // namespace cbmadv
