#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cbmadv/dataset.hpp"

namespace cbmadv {

// 4x4 counts, rows = actual class, columns = predicted class, in the fixed
// order Ball, InnerRace, OuterRace, Normal.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kClassCount>, kClassCount> counts{};

  void add(Label truth, Label predicted) {
    ++counts[static_cast<std::size_t>(truth)][static_cast<std::size_t>(predicted)];
  }
  std::int64_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth][predicted];
  }
  std::int64_t row_total(std::size_t truth) const;
  std::int64_t col_total(std::size_t predicted) const;
  std::int64_t total() const;
  std::int64_t diagonal() const;

  // Per-class recall (row) and precision (column); 0 when the denominator is 0.
  double row_recall(std::size_t c) const;
  double col_precision(std::size_t c) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion_matrix(const std::vector<Label>& predictions,
                                 const std::vector<Label>& truths);

// Unweighted mean of per-class F1. A class absent from both truth and
// prediction contributes 1; precision/recall with a vanishing denominator
// count as 0.
double macro_f1(const ConfusionMatrix& cm);

// Support-weighted mean of per-class F1 (classes absent from truth get
// weight 0).
double weighted_f1(const ConfusionMatrix& cm);

}  // namespace cbmadv
