#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "styleaug/checklist.hpp"
#include "styleaug/classifier.hpp"
#include "styleaug/corpus.hpp"
#include "styleaug/generator.hpp"
#include "styleaug/planner.hpp"

namespace styleaug {

struct BackendConfig {
  std::string kind = "mock";  // "mock" or "remote"
  std::string endpoint;
  std::string path = "/v1/chat/completions";
  std::string model_id = "mock";
  Decoding decoding{};
  double rate_limit_rpm = 0.0;
  int concurrency = 4;
  std::string api_key_env = "GENERATION_API_KEY";
  int timeout_ms = 30000;
  int retry_max_attempts = 5;
  int retry_base_delay_ms = 1000;
};

struct ClassifierConfig {
  TrainOptions train{};
  int min_df = 2;
  int max_tokens = kDefaultTokenBudget;
};

// One experiment, one file. The seed has no default on purpose: every run
// must be reproducible from its config alone.
struct PipelineConfig {
  Language language = Language::kEn;
  std::filesystem::path train_path;
  std::filesystem::path dev_path;
  std::filesystem::path test_path;
  std::vector<Style> styles{kAllStyles.begin(), kAllStyles.end()};
  SamplingMode mode = SamplingMode::kOver;
  std::uint64_t seed = 0;
  bool seed_set = false;
  BackendConfig backend;
  std::filesystem::path cache_path;  // default <out>/generations.jsonl
  std::filesystem::path out_dir = "out";
  ClassifierConfig classifier;
  int per_style_review = 10;
  std::filesystem::path catalog_path;  // empty = builtin catalog
  bool allow_partial = false;
  bool normal_under_paraphrase = false;
  bool shuffle = false;
  int grid_workers = 0;
  std::map<std::string, std::int64_t> expected_deltas;  // split -> delta to flag against

  static PipelineConfig from_json_text(std::string_view text);
  static PipelineConfig load(const std::filesystem::path& path);

  void validate() const;  // throws ConfigError when incomplete

  std::filesystem::path resolved_cache_path() const;
  const StyleCatalog& catalog() const;  // loads catalog_path once, else builtin

  // Resolved config with every default materialized (what --explain prints).
  std::string resolved_json() const;
  // Digest over the experiment identity: everything except filesystem paths,
  // plus the catalog version. Two runs of one experiment on different
  // machines share this digest.
  std::string digest() const;

 private:
  mutable std::optional<StyleCatalog> loaded_catalog_;
};

}  // namespace styleaug
