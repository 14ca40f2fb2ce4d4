#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "styleaug/checklist.hpp"
#include "styleaug/corpus.hpp"
#include "styleaug/planner.hpp"

namespace styleaug {

struct Decoding {
  double temperature = 0.7;
  int max_output_tokens = 256;
};

struct GenerationRequest {
  Language language = Language::kEn;
  Style style = Style::kNormal;
  LabeledSentence source;
  std::string prompt;
  std::string model_id;
  std::string prompt_version;
  Decoding decoding;
};

enum class FailureKind { kTransient, kPermanent };

struct CompletionResult {
  bool ok = false;
  std::string text;  // trimmed, non-empty when ok
  FailureKind kind = FailureKind::kPermanent;
  std::string error;
  int attempts = 1;

  static CompletionResult success(std::string text, int attempts);
  static CompletionResult failure(FailureKind kind, std::string error, int attempts);
};

class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual CompletionResult complete(const GenerationRequest& request) = 0;
};

// Offline backend: echoes the source prefixed with the style's English
// surface form. Deterministic and injective per (style, source text).
class MockBackend : public GeneratorBackend {
 public:
  CompletionResult complete(const GenerationRequest& request) override;
  int call_count() const { return calls_.load(); }

 private:
  std::atomic<int> calls_{0};
};

struct RetryPolicy {
  std::chrono::milliseconds base_delay{1000};
  double factor = 2.0;
  int max_attempts = 5;

  // Upper bound of the jittered sleep taken after `failed_attempts` failures;
  // non-decreasing in failed_attempts.
  std::chrono::milliseconds delay_cap(int failed_attempts) const;
};

struct RemoteOptions {
  std::string base_url;  // e.g. "https://api.example.com"
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::chrono::milliseconds timeout{30000};
  RetryPolicy retry{};
  // Test seams: deterministic jitter and a fake sleeper.
  std::uint64_t jitter_seed = 0;  // 0 = seeded from the system entropy source
  std::function<void(std::chrono::milliseconds)> sleeper;
};

// Chat-completion client. Sends one user message per request and returns the
// first choice's message text. Timeouts, HTTP 429 and 5xx are retried with
// exponential backoff and full jitter; other 4xx and empty completions are
// permanent failures.
class RemoteChatBackend : public GeneratorBackend {
 public:
  explicit RemoteChatBackend(RemoteOptions options);
  CompletionResult complete(const GenerationRequest& request) override;

 private:
  RemoteOptions options_;
  std::mutex jitter_mu_;
  std::uint64_t jitter_state_;
};

// One cached generation. Fingerprint fields identify the request; key is
// their collision-resistant digest.
struct GenerationRecord {
  std::string key;
  std::string model_id;
  Language language = Language::kEn;
  Style style = Style::kNormal;
  std::string source_id;
  std::string prompt_version;
  std::string output_text;  // trimmed, non-empty
  std::string created_at;   // ISO-8601 UTC
  int attempt_count = 1;
  double temperature = 0.7;
  int max_output_tokens = 256;
};

// SHA-256 over the length-delimited concatenation of the inputs; stable
// across runs and platforms. The prompt version stands in for the template
// text, so catalog edits invalidate old entries.
std::string cache_key(std::string_view model_id, Language language, Style style,
                      std::string_view source_text, std::string_view prompt_version);

// Append-only JSONL store with an in-memory index rebuilt on startup.
// Last write wins on duplicate keys. All members are thread-safe; writes are
// serialized through the internal mutex.
class GenerationCache {
 public:
  GenerationCache() = default;  // memory-only
  explicit GenerationCache(std::filesystem::path file);

  std::optional<GenerationRecord> find(const std::string& key) const;
  void put(const GenerationRecord& record);
  std::size_t size() const;
  std::vector<GenerationRecord> all() const;  // stable first-seen order

  const std::filesystem::path& path() const { return path_; }

 private:
  mutable std::mutex mu_;
  std::filesystem::path path_;
  std::vector<GenerationRecord> ordered_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Blocking requests-per-minute limiter with roughly one second of burst
// capacity. A rate of zero disables limiting.
class TokenBucket {
 public:
  using Clock = std::chrono::steady_clock;
  explicit TokenBucket(double per_minute);
  TokenBucket(double per_minute, std::function<Clock::time_point()> now,
              std::function<void(Clock::duration)> sleep);

  void acquire();

 private:
  double per_second_;
  double capacity_;
  double tokens_;
  Clock::time_point last_refill_;
  std::function<Clock::time_point()> now_;
  std::function<void(Clock::duration)> sleep_;
  std::mutex mu_;
};

struct GenerationFailure {
  Style style = Style::kNormal;
  std::string source_id;
  FailureKind kind = FailureKind::kPermanent;
  std::string message;
  int attempts = 0;
};

struct RunReport {
  std::vector<GenerationRecord> records;   // plan order
  std::vector<GenerationFailure> failures; // plan order
  int backend_calls = 0;
  int cache_hits = 0;
};

struct ExecuteOptions {
  std::string model_id = "mock";
  Decoding decoding{};
  int concurrency = 4;
  double rate_limit_rpm = 0.0;
};

// Resolves every plan entry against the dataset (aborting before any backend
// call on a mismatch), then completes each (style, source) pair through the
// cache: hits are reused, misses call the backend with at most
// options.concurrency requests in flight. Failures are reported alongside
// successes; they never abort the run.
RunReport execute_plan(const SamplingPlan& plan, const Dataset& dataset,
                       const StyleCatalog& catalog, GeneratorBackend& backend,
                       GenerationCache& cache, const ExecuteOptions& options = {});

}  // namespace styleaug
