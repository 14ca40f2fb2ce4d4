#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "styleaug/corpus.hpp"
#include "styleaug/sampler.hpp"

namespace styleaug {

inline constexpr int kDefaultTokenBudget = 128;

// Lowercases, splits on maximal runs of non-word code points (Unicode-aware
// enough that Turkish and German letters survive) and truncates to the token
// budget.
std::vector<std::string> tokenize(std::string_view text, int max_tokens = kDefaultTokenBudget);

struct Vocabulary {
  std::vector<std::string> tokens;  // dense index -> token, lexicographic
  std::vector<int> doc_freq;        // parallel to tokens
  std::size_t total_docs = 0;
  int min_df = 2;
  int max_tokens = kDefaultTokenBudget;
  std::unordered_map<std::string, int> index;

  std::size_t size() const { return tokens.size(); }
  int find(std::string_view token) const;
  // ln((1 + N) / (1 + df)) + 1
  double idf(std::size_t token_index) const;
};

Vocabulary fit_vocabulary(const std::vector<std::string>& docs, int min_df = 2,
                          int max_tokens = kDefaultTokenBudget);

// Sparse tf-idf vector, L2-normalized. Documents with no in-vocabulary
// tokens map to the empty (zero) vector.
struct FeatureVector {
  std::vector<std::pair<int, double>> entries;  // ascending index

  double dot(const std::vector<double>& weights) const;
  double norm() const;
};

FeatureVector transform(const Vocabulary& vocab, std::string_view text);

// Batch featurization: the OpenMP kernel is the production path, the serial
// loop is the reference the tests compare it against.
std::vector<FeatureVector> transform_batch(const Vocabulary& vocab,
                                           const std::vector<std::string>& docs);
std::vector<FeatureVector> transform_batch_serial(const Vocabulary& vocab,
                                                  const std::vector<std::string>& docs);

struct TrainOptions {
  int epochs = 3;
  int batch_size = 8;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  TrainOptions hyper;
};

double sigmoid(double z);

// Mean binary cross-entropy plus (l2/2)*||w||^2; the bias is not regularized.
// SUBJECTIVE is the positive class.
double logistic_loss(const LinearModel& model, const std::vector<FeatureVector>& features,
                     const std::vector<ClassLabel>& labels);
void logistic_gradient(const LinearModel& model, const std::vector<FeatureVector>& features,
                       const std::vector<ClassLabel>& labels, std::vector<double>* grad_weights,
                       double* grad_bias);

// Mini-batch SGD on the loss above. Batch order reshuffles every epoch on a
// stream derived from options.seed, so training is a pure function of
// (data, options).
LinearModel train(const std::vector<FeatureVector>& features,
                  const std::vector<ClassLabel>& labels, std::size_t feature_dim,
                  const TrainOptions& options);

// Snapshot after every epoch (the whole-run candidates for dev selection).
// Zero epochs yields the single all-zero initialization.
std::vector<LinearModel> train_checkpoints(const std::vector<FeatureVector>& features,
                                           const std::vector<ClassLabel>& labels,
                                           std::size_t feature_dim, const TrainOptions& options);

struct Prediction {
  ClassLabel label = ClassLabel::kObjective;
  double score = 0.5;  // sigmoid output; a tie at exactly 0.5 is OBJECTIVE
};

Prediction predict(const LinearModel& model, const FeatureVector& features);
Prediction predict_text(const LinearModel& model, const Vocabulary& vocab, std::string_view text);

std::vector<Prediction> predict_batch(const LinearModel& model,
                                      const std::vector<FeatureVector>& features);
std::vector<Prediction> predict_batch_serial(const LinearModel& model,
                                             const std::vector<FeatureVector>& features);

// Index of the candidate with the highest macro F1 on the dev split; ties go
// to the earliest candidate.
std::size_t model_select(const std::vector<LinearModel>& candidates,
                         const std::vector<FeatureVector>& dev_features,
                         const std::vector<ClassLabel>& dev_labels);

void save_model(const std::filesystem::path& path, const Vocabulary& vocab,
                const LinearModel& model);
std::pair<Vocabulary, LinearModel> load_model(const std::filesystem::path& path);

// Writes the training TSV plus a key-value metadata file carrying the
// external fine-tuning recipe (max input length 128, 3 epochs, batch size 8,
// suggested per-language pretrained encoders). No model is executed.
void export_for_finetuning(const AssembledDataset& assembled,
                           const std::filesystem::path& directory);

}  // namespace styleaug
