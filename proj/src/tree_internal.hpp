#pragma once

#include <vector>

#include "cbmadv/models.hpp"
#include "cbmadv/rng.hpp"

namespace cbmadv::detail {

struct TreeTrainOptions {
  int max_depth = -1;  // -1: unlimited
  int mtry = static_cast<int>(kFeatureCount);
};

// Weighted binary CART. `sample_indices` selects the participating rows
// (duplicates allowed, as produced by bootstrap resampling); `weights` is
// indexed by row. `feature_rng` enables per-split feature subsampling when
// opts.mtry < 12 and must be null otherwise.
DecisionTreeModel train_cart(const std::vector<FeatureVector>& rows,
                             const std::vector<Label>& labels,
                             const std::vector<double>& weights,
                             const std::vector<std::size_t>& sample_indices,
                             const TreeTrainOptions& opts, Rng* feature_rng);

}  // namespace cbmadv::detail
