// Times the OpenMP batch kernels against their serial reference on synthetic
// documents. Usage: styleaug_bench [docs] [repeats]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "styleaug/classifier.hpp"
#include "styleaug/rng.hpp"

namespace {

using styleaug::SplitMix64;

std::vector<std::string> synthetic_docs(std::size_t count, std::uint64_t seed) {
  static const char* kWords[] = {
      "market", "council", "report",  "figures", "dreadful", "glorious", "tax",
      "rates",  "city",    "quarter", "opinion", "billion",  "water",    "energy",
      "vote",   "plan",    "budget",  "crisis",  "growth",   "decline",
  };
  constexpr std::size_t kWordCount = sizeof(kWords) / sizeof(kWords[0]);
  SplitMix64 g(seed);
  std::vector<std::string> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t len = 8 + static_cast<std::size_t>(g.bounded(40));
    std::string doc;
    for (std::size_t w = 0; w < len; ++w) {
      if (w != 0) doc.push_back(' ');
      doc += kWords[g.bounded(kWordCount)];
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

template <typename F>
double time_ms(F&& fn, int repeats) {
  double best = 1e300;
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
  }
  return best;
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t doc_count = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 20000;
  const int repeats = argc > 2 ? std::atoi(argv[2]) : 5;

  const auto docs = synthetic_docs(doc_count, 42);
  const auto vocab = styleaug::fit_vocabulary(docs, 1);

#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: not enabled\n");
#endif
  std::printf("documents: %zu, vocabulary: %zu, best of %d runs\n\n", docs.size(), vocab.size(),
              repeats);

  const double t_serial = time_ms([&] { styleaug::transform_batch_serial(vocab, docs); }, repeats);
  const double t_parallel = time_ms([&] { styleaug::transform_batch(vocab, docs); }, repeats);
  std::printf("%-24s %10.2f ms\n", "transform serial", t_serial);
  std::printf("%-24s %10.2f ms  (x%.2f)\n", "transform openmp", t_parallel,
              t_serial / t_parallel);

  const auto features = styleaug::transform_batch(vocab, docs);
  styleaug::TrainOptions opts;
  opts.epochs = 1;
  std::vector<styleaug::ClassLabel> labels(docs.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = i % 2 == 0 ? styleaug::ClassLabel::kObjective : styleaug::ClassLabel::kSubjective;
  }
  const auto model = styleaug::train(features, labels, vocab.size(), opts);

  const double p_serial = time_ms([&] { styleaug::predict_batch_serial(model, features); }, repeats);
  const double p_parallel = time_ms([&] { styleaug::predict_batch(model, features); }, repeats);
  std::printf("%-24s %10.2f ms\n", "predict serial", p_serial);
  std::printf("%-24s %10.2f ms  (x%.2f)\n", "predict openmp", p_parallel, p_serial / p_parallel);
  return 0;
}
