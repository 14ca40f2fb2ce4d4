#include "styleaug/metrics.hpp"

#include <string>

#include "styleaug/errors.hpp"

namespace styleaug {

namespace {

void check_same_length(std::size_t gold, std::size_t predicted) {
  if (gold != predicted) {
    throw ValidationError("label vector length mismatch: gold has " + std::to_string(gold) +
                          ", predictions have " + std::to_string(predicted));
  }
}

double safe_ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts confusion_counts(const std::vector<ClassLabel>& gold,
                                 const std::vector<ClassLabel>& predicted,
                                 ClassLabel positive) {
  check_same_length(gold.size(), predicted.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool is_pos = gold[i] == positive;
    const bool said_pos = predicted[i] == positive;
    if (is_pos && said_pos) ++c.tp;
    if (!is_pos && said_pos) ++c.fp;
    if (is_pos && !said_pos) ++c.fn;
    if (!is_pos && !said_pos) ++c.tn;
  }
  return c;
}

double f1_per_class(const std::vector<ClassLabel>& gold,
                    const std::vector<ClassLabel>& predicted, ClassLabel cls) {
  const ConfusionCounts c = confusion_counts(gold, predicted, cls);
  const double precision = safe_ratio(c.tp, c.tp + c.fp);
  const double recall = safe_ratio(c.tp, c.tp + c.fn);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

double macro_f1(const std::vector<ClassLabel>& gold,
                const std::vector<ClassLabel>& predicted) {
  return (f1_per_class(gold, predicted, ClassLabel::kSubjective) +
          f1_per_class(gold, predicted, ClassLabel::kObjective)) /
         2.0;
}

}  // namespace styleaug
