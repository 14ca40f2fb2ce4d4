#pragma once

#include <cstddef>
#include <vector>

#include "styleaug/corpus.hpp"

namespace styleaug {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
};

ConfusionCounts confusion_counts(const std::vector<ClassLabel>& gold,
                                 const std::vector<ClassLabel>& predicted,
                                 ClassLabel positive);

// 2PR/(P+R) with every 0/0 ratio defined as 0.
double f1_per_class(const std::vector<ClassLabel>& gold,
                    const std::vector<ClassLabel>& predicted, ClassLabel cls);

// Unweighted mean of the two per-class F1 scores.
double macro_f1(const std::vector<ClassLabel>& gold,
                const std::vector<ClassLabel>& predicted);

}  // namespace styleaug
