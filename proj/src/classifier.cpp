#include "styleaug/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/metrics.hpp"
#include "styleaug/rng.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view s) { return std::stod(std::string(s)); }

double label_target(ClassLabel label) {
  return label == ClassLabel::kSubjective ? 1.0 : 0.0;
}

// log(1 + e^z) without overflow.
double softplus(double z) {
  if (z > 0) return z + std::log1p(std::exp(-z));
  return std::log1p(std::exp(z));
}

void check_aligned(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ValidationError("feature/label length mismatch: " + std::to_string(a) + " vs " +
                          std::to_string(b));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, int max_tokens) {
  std::vector<std::string> out;
  if (max_tokens <= 0) return out;
  std::string current;
  auto flush = [&] {
    if (!current.empty() && out.size() < static_cast<std::size_t>(max_tokens)) {
      out.push_back(std::move(current));
    }
    current.clear();
  };
  for (char32_t cp : utf8_decode(text)) {
    if (is_word_cp(cp)) {
      utf8_append(current, simple_lower(cp));
    } else {
      flush();
      if (out.size() == static_cast<std::size_t>(max_tokens)) return out;
    }
  }
  flush();
  return out;
}

int Vocabulary::find(std::string_view token) const {
  auto it = index.find(std::string(token));
  return it == index.end() ? -1 : it->second;
}

double Vocabulary::idf(std::size_t token_index) const {
  const double n = static_cast<double>(total_docs);
  const double df = static_cast<double>(doc_freq[token_index]);
  return std::log((1.0 + n) / (1.0 + df)) + 1.0;
}

Vocabulary fit_vocabulary(const std::vector<std::string>& docs, int min_df, int max_tokens) {
  if (docs.empty()) throw ValidationError("cannot fit a vocabulary on an empty corpus");
  std::map<std::string, int> df;  // ordered: index assignment is lexicographic
  for (const auto& doc : docs) {
    auto tokens = tokenize(doc, max_tokens);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++df[t];
  }
  Vocabulary vocab;
  vocab.total_docs = docs.size();
  vocab.min_df = min_df;
  vocab.max_tokens = max_tokens;
  for (auto& [token, count] : df) {
    if (count < min_df) continue;
    vocab.index.emplace(token, static_cast<int>(vocab.tokens.size()));
    vocab.tokens.push_back(token);
    vocab.doc_freq.push_back(count);
  }
  return vocab;
}

double FeatureVector::dot(const std::vector<double>& weights) const {
  double acc = 0.0;
  for (const auto& [idx, value] : entries) {
    acc += weights[static_cast<std::size_t>(idx)] * value;
  }
  return acc;
}

double FeatureVector::norm() const {
  double acc = 0.0;
  for (const auto& [idx, value] : entries) acc += value * value;
  return std::sqrt(acc);
}

FeatureVector transform(const Vocabulary& vocab, std::string_view text) {
  std::map<int, double> counts;
  for (const auto& token : tokenize(text, vocab.max_tokens)) {
    auto it = vocab.index.find(token);
    if (it != vocab.index.end()) counts[it->second] += 1.0;
  }
  FeatureVector fv;
  fv.entries.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [idx, tf] : counts) {
    const double w = tf * vocab.idf(static_cast<std::size_t>(idx));
    fv.entries.emplace_back(idx, w);
    sq += w * w;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& [idx, w] : fv.entries) w *= inv;
  }
  return fv;
}

std::vector<FeatureVector> transform_batch_serial(const Vocabulary& vocab,
                                                  const std::vector<std::string>& docs) {
  std::vector<FeatureVector> out(docs.size());
  for (std::size_t i = 0; i < docs.size(); ++i) out[i] = transform(vocab, docs[i]);
  return out;
}

std::vector<FeatureVector> transform_batch(const Vocabulary& vocab,
                                           const std::vector<std::string>& docs) {
  std::vector<FeatureVector> out(docs.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(docs.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = transform(vocab, docs[static_cast<std::size_t>(i)]);
  }
  return out;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double logistic_loss(const LinearModel& model, const std::vector<FeatureVector>& features,
                     const std::vector<ClassLabel>& labels) {
  check_aligned(features.size(), labels.size());
  if (features.empty()) throw ValidationError("loss over an empty set");
  double loss = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = features[i].dot(model.weights) + model.bias;
    loss += softplus(z) - label_target(labels[i]) * z;
  }
  loss /= static_cast<double>(features.size());
  double sq = 0.0;
  for (double w : model.weights) sq += w * w;
  return loss + 0.5 * model.hyper.l2 * sq;
}

void logistic_gradient(const LinearModel& model, const std::vector<FeatureVector>& features,
                       const std::vector<ClassLabel>& labels, std::vector<double>* grad_weights,
                       double* grad_bias) {
  check_aligned(features.size(), labels.size());
  grad_weights->assign(model.weights.size(), 0.0);
  *grad_bias = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = features[i].dot(model.weights) + model.bias;
    const double err = sigmoid(z) - label_target(labels[i]);
    for (const auto& [idx, value] : features[i].entries) {
      (*grad_weights)[static_cast<std::size_t>(idx)] += err * value;
    }
    *grad_bias += err;
  }
  const double inv = 1.0 / static_cast<double>(features.size());
  for (std::size_t j = 0; j < grad_weights->size(); ++j) {
    (*grad_weights)[j] = (*grad_weights)[j] * inv + model.hyper.l2 * model.weights[j];
  }
  *grad_bias *= inv;
}

namespace {

void sgd_epoch(LinearModel& model, const std::vector<FeatureVector>& features,
               const std::vector<ClassLabel>& labels, const TrainOptions& options, int epoch) {
  std::vector<std::size_t> order(features.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  SplitMix64 g(stream_seed(options.seed, {"sgd-epoch", std::to_string(epoch)}));
  deterministic_shuffle(order, g);

  const std::size_t batch = static_cast<std::size_t>(std::max(1, options.batch_size));
  const double lr = options.learning_rate;
  std::vector<std::pair<std::size_t, double>> sparse_grad;
  for (std::size_t start = 0; start < order.size(); start += batch) {
    const std::size_t end = std::min(order.size(), start + batch);
    const double inv = 1.0 / static_cast<double>(end - start);
    sparse_grad.clear();
    double grad_bias = 0.0;
    for (std::size_t k = start; k < end; ++k) {
      const FeatureVector& x = features[order[k]];
      const double z = x.dot(model.weights) + model.bias;
      const double err = sigmoid(z) - label_target(labels[order[k]]);
      for (const auto& [idx, value] : x.entries) {
        sparse_grad.emplace_back(static_cast<std::size_t>(idx), err * value);
      }
      grad_bias += err;
    }
    // w <- (1 - lr*l2) * w - lr * mean(batch gradient); bias unregularized.
    const double decay = 1.0 - lr * options.l2;
    for (double& w : model.weights) w *= decay;
    for (const auto& [idx, gv] : sparse_grad) model.weights[idx] -= lr * gv * inv;
    model.bias -= lr * grad_bias * inv;
  }
}

void check_trainable(const std::vector<FeatureVector>& features,
                     const std::vector<ClassLabel>& labels) {
  check_aligned(features.size(), labels.size());
  if (features.empty()) throw ValidationError("cannot train on an empty set");
  bool has_obj = false;
  bool has_subj = false;
  for (ClassLabel l : labels) {
    (l == ClassLabel::kObjective ? has_obj : has_subj) = true;
  }
  if (!has_obj || !has_subj) {
    throw ValidationError("training data must contain both classes");
  }
}

}  // namespace

LinearModel train(const std::vector<FeatureVector>& features,
                  const std::vector<ClassLabel>& labels, std::size_t feature_dim,
                  const TrainOptions& options) {
  check_trainable(features, labels);
  LinearModel model;
  model.hyper = options;
  model.weights.assign(feature_dim, 0.0);
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    sgd_epoch(model, features, labels, options, epoch);
  }
  return model;
}

std::vector<LinearModel> train_checkpoints(const std::vector<FeatureVector>& features,
                                           const std::vector<ClassLabel>& labels,
                                           std::size_t feature_dim, const TrainOptions& options) {
  check_trainable(features, labels);
  LinearModel model;
  model.hyper = options;
  model.weights.assign(feature_dim, 0.0);
  std::vector<LinearModel> checkpoints;
  if (options.epochs <= 0) {
    checkpoints.push_back(model);
    return checkpoints;
  }
  for (int epoch = 1; epoch <= options.epochs; ++epoch) {
    sgd_epoch(model, features, labels, options, epoch);
    checkpoints.push_back(model);
  }
  return checkpoints;
}

Prediction predict(const LinearModel& model, const FeatureVector& features) {
  const double score = sigmoid(features.dot(model.weights) + model.bias);
  return {score > 0.5 ? ClassLabel::kSubjective : ClassLabel::kObjective, score};
}

Prediction predict_text(const LinearModel& model, const Vocabulary& vocab,
                        std::string_view text) {
  return predict(model, transform(vocab, text));
}

std::vector<Prediction> predict_batch_serial(const LinearModel& model,
                                             const std::vector<FeatureVector>& features) {
  std::vector<Prediction> out(features.size());
  for (std::size_t i = 0; i < features.size(); ++i) out[i] = predict(model, features[i]);
  return out;
}

std::vector<Prediction> predict_batch(const LinearModel& model,
                                      const std::vector<FeatureVector>& features) {
  std::vector<Prediction> out(features.size());
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(features.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = predict(model, features[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::size_t model_select(const std::vector<LinearModel>& candidates,
                         const std::vector<FeatureVector>& dev_features,
                         const std::vector<ClassLabel>& dev_labels) {
  if (candidates.empty()) throw ValidationError("model selection needs at least one candidate");
  std::size_t best = 0;
  double best_f1 = -1.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    std::vector<ClassLabel> predicted;
    predicted.reserve(dev_features.size());
    for (const auto& pred : predict_batch(candidates[c], dev_features)) {
      predicted.push_back(pred.label);
    }
    const double f1 = macro_f1(dev_labels, predicted);
    if (f1 > best_f1) {
      best_f1 = f1;
      best = c;
    }
  }
  return best;
}

void save_model(const std::filesystem::path& path, const Vocabulary& vocab,
                const LinearModel& model) {
  if (vocab.size() != model.weights.size()) {
    throw ValidationError("vocabulary and weight vector sizes disagree");
  }
  std::string out;
  out += "styleaug_model\t1\n";
  out += "total_docs\t" + std::to_string(vocab.total_docs) + "\n";
  out += "min_df\t" + std::to_string(vocab.min_df) + "\n";
  out += "max_tokens\t" + std::to_string(vocab.max_tokens) + "\n";
  out += "epochs\t" + std::to_string(model.hyper.epochs) + "\n";
  out += "batch_size\t" + std::to_string(model.hyper.batch_size) + "\n";
  out += "learning_rate\t" + format_double(model.hyper.learning_rate) + "\n";
  out += "l2\t" + format_double(model.hyper.l2) + "\n";
  out += "seed\t" + std::to_string(model.hyper.seed) + "\n";
  out += "bias\t" + format_double(model.bias) + "\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out += "token\t" + vocab.tokens[i] + "\t" + std::to_string(vocab.doc_freq[i]) + "\t" +
           format_double(model.weights[i]) + "\n";
  }
  write_file(path, out);
}

std::pair<Vocabulary, LinearModel> load_model(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  Vocabulary vocab;
  LinearModel model;
  bool versioned = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    auto fields = split(line, '\t');
    const std::string_view kind = fields[0];
    if (kind == "styleaug_model" && fields.size() == 2) {
      if (fields[1] != "1") throw ValidationError("unsupported model file version");
      versioned = true;
    } else if (kind == "total_docs" && fields.size() == 2) {
      vocab.total_docs = std::stoull(std::string(fields[1]));
    } else if (kind == "min_df" && fields.size() == 2) {
      vocab.min_df = std::stoi(std::string(fields[1]));
    } else if (kind == "max_tokens" && fields.size() == 2) {
      vocab.max_tokens = std::stoi(std::string(fields[1]));
    } else if (kind == "epochs" && fields.size() == 2) {
      model.hyper.epochs = std::stoi(std::string(fields[1]));
    } else if (kind == "batch_size" && fields.size() == 2) {
      model.hyper.batch_size = std::stoi(std::string(fields[1]));
    } else if (kind == "learning_rate" && fields.size() == 2) {
      model.hyper.learning_rate = parse_double(fields[1]);
    } else if (kind == "l2" && fields.size() == 2) {
      model.hyper.l2 = parse_double(fields[1]);
    } else if (kind == "seed" && fields.size() == 2) {
      model.hyper.seed = std::stoull(std::string(fields[1]));
    } else if (kind == "bias" && fields.size() == 2) {
      model.bias = parse_double(fields[1]);
    } else if (kind == "token" && fields.size() == 4) {
      vocab.index.emplace(std::string(fields[1]), static_cast<int>(vocab.tokens.size()));
      vocab.tokens.emplace_back(fields[1]);
      vocab.doc_freq.push_back(std::stoi(std::string(fields[2])));
      model.weights.push_back(parse_double(fields[3]));
    } else {
      throw ValidationError("model file line " + std::to_string(line_no) + ": unrecognized record");
    }
  }
  if (!versioned) throw ValidationError("not a styleaug model file: " + path.string());
  return {std::move(vocab), std::move(model)};
}

void export_for_finetuning(const AssembledDataset& assembled,
                           const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  save_tsv(assembled.data, directory / "train.tsv");
  write_file(directory / "train.manifest.json", assembled.manifest.to_json_string());

  std::string meta;
  meta += "max_length\t128\n";
  meta += "epochs\t3\n";
  meta += "batch_size\t8\n";
  meta += "language\t";
  meta += language_code(assembled.data.language);
  meta.push_back('\n');
  const char* suggested = "roberta-base";
  switch (assembled.data.language) {
    case Language::kEn: suggested = "roberta-base"; break;
    case Language::kDe: suggested = "bert-base-german-cased"; break;
    case Language::kTr: suggested = "dbmdz/bert-base-turkish-cased"; break;
  }
  meta += "suggested_model\t";
  meta += suggested;
  meta.push_back('\n');
  meta += "model_en\troberta-base\n";
  meta += "model_de\tbert-base-german-cased\n";
  meta += "model_tr\tdbmdz/bert-base-turkish-cased\n";
  meta += "scope\t" + assembled.manifest.scope_label + "\n";
  meta += "mode\t" + assembled.manifest.mode_label + "\n";
  meta += "objective_count\t" + std::to_string(assembled.manifest.objective_count) + "\n";
  meta += "subjective_count\t" + std::to_string(assembled.manifest.subjective_count) + "\n";
  write_file(directory / "finetune_meta.txt", meta);
}

}  // namespace styleaug
