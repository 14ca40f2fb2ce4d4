#include "styleaug/generator.hpp"

#include <httplib.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <json.hpp>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/rng.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

using nlohmann::json;

std::string length_delimited(std::string_view field) {
  std::string out = std::to_string(field.size());
  out.push_back(':');
  out.append(field);
  return out;
}

json record_to_json(const GenerationRecord& r) {
  return json{{"key", r.key},
              {"model_id", r.model_id},
              {"language", language_code(r.language)},
              {"style", style_name(r.style)},
              {"source_id", r.source_id},
              {"prompt_version", r.prompt_version},
              {"output_text", r.output_text},
              {"created_at", r.created_at},
              {"attempt_count", r.attempt_count},
              {"temperature", r.temperature},
              {"max_output_tokens", r.max_output_tokens}};
}

GenerationRecord record_from_json(const json& j) {
  GenerationRecord r;
  r.key = j.at("key").get<std::string>();
  r.model_id = j.at("model_id").get<std::string>();
  r.language = language_from_string(j.at("language").get<std::string>());
  r.style = style_from_string(j.at("style").get<std::string>());
  r.source_id = j.at("source_id").get<std::string>();
  r.prompt_version = j.at("prompt_version").get<std::string>();
  r.output_text = j.at("output_text").get<std::string>();
  r.created_at = j.value("created_at", "");
  r.attempt_count = j.value("attempt_count", 1);
  r.temperature = j.value("temperature", 0.7);
  r.max_output_tokens = j.value("max_output_tokens", 256);
  return r;
}

}  // namespace

CompletionResult CompletionResult::success(std::string text, int attempts) {
  CompletionResult r;
  r.ok = true;
  r.text = std::move(text);
  r.attempts = attempts;
  return r;
}

CompletionResult CompletionResult::failure(FailureKind kind, std::string error, int attempts) {
  CompletionResult r;
  r.ok = false;
  r.kind = kind;
  r.error = std::move(error);
  r.attempts = attempts;
  return r;
}

CompletionResult MockBackend::complete(const GenerationRequest& request) {
  calls_.fetch_add(1, std::memory_order_relaxed);
  std::string text = "[";
  text += style_name(request.style);
  text += "] ";
  text += request.source.text;
  return CompletionResult::success(std::move(text), 1);
}

std::chrono::milliseconds RetryPolicy::delay_cap(int failed_attempts) const {
  if (failed_attempts < 1) return std::chrono::milliseconds(0);
  double cap = static_cast<double>(base_delay.count()) *
               std::pow(factor, static_cast<double>(failed_attempts - 1));
  return std::chrono::milliseconds(static_cast<long long>(cap));
}

RemoteChatBackend::RemoteChatBackend(RemoteOptions options) : options_(std::move(options)) {
  if (options_.base_url.empty()) {
    throw ConfigError("remote backend requires an endpoint URL");
  }
  jitter_state_ = options_.jitter_seed != 0 ? options_.jitter_seed : std::random_device{}();
}

CompletionResult RemoteChatBackend::complete(const GenerationRequest& request) {
  const json body = {
      {"model", request.model_id},
      {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.decoding.temperature},
      {"max_tokens", request.decoding.max_output_tokens},
  };
  const std::string payload = body.dump();

  for (int attempt = 1;; ++attempt) {
    httplib::Client client(options_.base_url);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    client.set_connection_timeout(secs.count(), 0);
    client.set_read_timeout(secs.count(), 0);
    httplib::Headers headers;
    if (!options_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + options_.api_key);
    }

    std::string error;
    FailureKind kind = FailureKind::kTransient;
    auto res = client.Post(options_.path, headers, payload, "application/json");
    if (!res) {
      error = "connection failure: " + httplib::to_string(res.error());
    } else if (res->status == 200) {
      try {
        const json reply = json::parse(res->body);
        const auto& choices = reply.at("choices");
        if (!choices.is_array() || choices.empty()) {
          return CompletionResult::failure(FailureKind::kPermanent,
                                           "response carries no choices", attempt);
        }
        std::string text = trim(choices.at(0).at("message").at("content").get<std::string>());
        if (text.empty()) {
          // Degenerate output; retrying rarely produces anything different.
          return CompletionResult::failure(FailureKind::kPermanent, "empty completion", attempt);
        }
        return CompletionResult::success(std::move(text), attempt);
      } catch (const json::exception& ex) {
        return CompletionResult::failure(FailureKind::kPermanent,
                                         std::string("malformed response: ") + ex.what(), attempt);
      }
    } else if (res->status == 429 || res->status >= 500) {
      error = "HTTP " + std::to_string(res->status);
    } else {
      return CompletionResult::failure(FailureKind::kPermanent,
                                       "HTTP " + std::to_string(res->status), attempt);
    }

    if (attempt >= options_.retry.max_attempts) {
      return CompletionResult::failure(kind, error + " (retries exhausted)", attempt);
    }
    // Full jitter: sleep uniformly in [0, cap].
    const auto cap = options_.retry.delay_cap(attempt);
    std::chrono::milliseconds delay{0};
    if (cap.count() > 0) {
      std::lock_guard<std::mutex> lock(jitter_mu_);
      SplitMix64 g(jitter_state_);
      delay = std::chrono::milliseconds(
          static_cast<long long>(g.bounded(static_cast<std::uint64_t>(cap.count()) + 1)));
      jitter_state_ = g.next();
    }
    if (options_.sleeper) {
      options_.sleeper(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }
}

std::string cache_key(std::string_view model_id, Language language, Style style,
                      std::string_view source_text, std::string_view prompt_version) {
  std::string material = "genkey-v1|";
  material += length_delimited(model_id);
  material += length_delimited(language_code(language));
  material += length_delimited(style_name(style));
  material += length_delimited(source_text);
  material += length_delimited(prompt_version);
  return sha256_hex(material);
}

GenerationCache::GenerationCache(std::filesystem::path file) : path_(std::move(file)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  const std::string raw = read_file(path_);
  std::size_t line_no = 0;
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw ValidationError("cache " + path_.string() + " line " + std::to_string(line_no) +
                            ": " + ex.what());
    }
    GenerationRecord r = record_from_json(j);
    auto it = index_.find(r.key);
    if (it == index_.end()) {
      index_.emplace(r.key, ordered_.size());
      ordered_.push_back(std::move(r));
    } else {
      ordered_[it->second] = std::move(r);  // last write wins
    }
  }
}

std::optional<GenerationRecord> GenerationCache::find(const std::string& key) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return ordered_[it->second];
}

void GenerationCache::put(const GenerationRecord& record) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = index_.find(record.key);
  if (it == index_.end()) {
    index_.emplace(record.key, ordered_.size());
    ordered_.push_back(record);
  } else {
    ordered_[it->second] = record;
  }
  if (!path_.empty()) {
    if (path_.has_parent_path()) {
      std::error_code ec;
      std::filesystem::create_directories(path_.parent_path(), ec);
    }
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to cache file: " + path_.string());
    out << record_to_json(record).dump() << '\n';
    if (!out) throw IoError("error while writing cache file: " + path_.string());
  }
}

std::size_t GenerationCache::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return ordered_.size();
}

std::vector<GenerationRecord> GenerationCache::all() const {
  std::lock_guard<std::mutex> lock(mu_);
  return ordered_;
}

TokenBucket::TokenBucket(double per_minute)
    : TokenBucket(per_minute, [] { return Clock::now(); },
                  [](Clock::duration d) { std::this_thread::sleep_for(d); }) {}

TokenBucket::TokenBucket(double per_minute, std::function<Clock::time_point()> now,
                         std::function<void(Clock::duration)> sleep)
    : per_second_(per_minute / 60.0),
      capacity_(std::max(1.0, per_minute / 60.0)),
      tokens_(capacity_),
      now_(std::move(now)),
      sleep_(std::move(sleep)) {
  last_refill_ = now_();
}

void TokenBucket::acquire() {
  if (per_second_ <= 0.0) return;
  for (;;) {
    Clock::duration wait;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto t = now_();
      const double elapsed = std::chrono::duration<double>(t - last_refill_).count();
      tokens_ = std::min(capacity_, tokens_ + elapsed * per_second_);
      last_refill_ = t;
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      wait = std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>((1.0 - tokens_) / per_second_));
    }
    sleep_(wait);
  }
}

RunReport execute_plan(const SamplingPlan& plan, const Dataset& dataset,
                       const StyleCatalog& catalog, GeneratorBackend& backend,
                       GenerationCache& cache, const ExecuteOptions& options) {
  std::unordered_map<std::string_view, const LabeledSentence*> by_id;
  for (const auto& s : dataset.sentences) by_id.emplace(s.id, &s);

  struct Task {
    Style style;
    const LabeledSentence* source;
  };
  std::vector<Task> tasks;
  for (const auto& entry : plan.entries) {
    for (const auto& id : entry.source_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw ValidationError("plan references id '" + id + "' that is absent from the dataset");
      }
      const ClassLabel wanted = style_uses_subjective_sources(entry.style)
                                    ? ClassLabel::kSubjective
                                    : ClassLabel::kObjective;
      if (it->second->label != wanted) {
        throw ValidationError("plan entry for style '" + std::string(style_name(entry.style)) +
                              "' selects id '" + id + "' of the wrong class");
      }
      tasks.push_back({entry.style, it->second});
    }
  }

  struct Slot {
    bool ok = false;
    GenerationRecord record;
    GenerationFailure failure;
  };
  std::vector<Slot> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> backend_calls{0};
  std::atomic<int> cache_hits{0};
  TokenBucket bucket(options.rate_limit_rpm);

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      Slot& slot = slots[i];

      const std::string key = cache_key(options.model_id, plan.language, task.style,
                                        task.source->text, catalog.version());
      if (auto hit = cache.find(key)) {
        slot.record = *hit;
        slot.ok = true;
        cache_hits.fetch_add(1);
        continue;
      }

      GenerationRequest request{plan.language, task.style,          *task.source,
                                catalog.render_prompt(plan.language, task.style, task.source->text),
                                options.model_id, catalog.version(), options.decoding};
      bucket.acquire();
      CompletionResult result = backend.complete(request);
      backend_calls.fetch_add(1);
      if (result.ok) {
        GenerationRecord record{key,
                                options.model_id,
                                plan.language,
                                task.style,
                                task.source->id,
                                catalog.version(),
                                trim(result.text),
                                now_iso8601_utc(),
                                result.attempts,
                                options.decoding.temperature,
                                options.decoding.max_output_tokens};
        cache.put(record);
        slot.record = std::move(record);
        slot.ok = true;
      } else {
        slot.failure = {task.style, task.source->id, result.kind, result.error, result.attempts};
        slot.ok = false;
      }
    }
  };

  const int thread_count =
      std::max(1, std::min<int>(options.concurrency, static_cast<int>(tasks.size())));
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(thread_count));
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& th : threads) th.join();
  }

  RunReport report;
  report.backend_calls = backend_calls.load();
  report.cache_hits = cache_hits.load();
  for (auto& slot : slots) {
    if (slot.ok) {
      report.records.push_back(std::move(slot.record));
    } else {
      report.failures.push_back(std::move(slot.failure));
    }
  }
  return report;
}

}  // namespace styleaug
