#include "cbmadv/metrics.hpp"

#include "cbmadv/error.hpp"

namespace cbmadv {

std::int64_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::int64_t s = 0;
  for (std::size_t j = 0; j < kClassCount; ++j) s += counts[truth][j];
  return s;
}

std::int64_t ConfusionMatrix::col_total(std::size_t predicted) const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) s += counts[i][predicted];
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) s += row_total(i);
  return s;
}

std::int64_t ConfusionMatrix::diagonal() const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < kClassCount; ++i) s += counts[i][i];
  return s;
}

double ConfusionMatrix::row_recall(std::size_t c) const {
  const std::int64_t denom = row_total(c);
  return denom > 0 ? static_cast<double>(counts[c][c]) / static_cast<double>(denom) : 0.0;
}

double ConfusionMatrix::col_precision(std::size_t c) const {
  const std::int64_t denom = col_total(c);
  return denom > 0 ? static_cast<double>(counts[c][c]) / static_cast<double>(denom) : 0.0;
}

ConfusionMatrix confusion_matrix(const std::vector<Label>& predictions,
                                 const std::vector<Label>& truths) {
  if (predictions.size() != truths.size())
    throw LengthMismatch("got " + std::to_string(predictions.size()) +
                         " predictions for " + std::to_string(truths.size()) + " truths");
  if (predictions.empty()) throw LengthMismatch("cannot build a confusion matrix from 0 samples");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predictions.size(); ++i) cm.add(truths[i], predictions[i]);
  return cm;
}

namespace {
double class_f1(const ConfusionMatrix& cm, std::size_t c) {
  const double p = cm.col_precision(c);
  const double r = cm.row_recall(c);
  return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}
}  // namespace

double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  for (std::size_t c = 0; c < kClassCount; ++c) {
    if (cm.row_total(c) == 0 && cm.col_total(c) == 0)
      sum += 1.0;  // class absent from both truth and prediction: no error made
    else
      sum += class_f1(cm, c);
  }
  return sum / static_cast<double>(kClassCount);
}

double weighted_f1(const ConfusionMatrix& cm) {
  const double total = static_cast<double>(cm.total());
  double sum = 0.0;
  for (std::size_t c = 0; c < kClassCount; ++c)
    sum += static_cast<double>(cm.row_total(c)) * class_f1(cm, c);
  return sum / total;
}

}  // namespace cbmadv
