#include <doctest.h>

#include <httplib.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "styleaug/errors.hpp"
#include "styleaug/generator.hpp"
#include "testutil.hpp"

using namespace styleaug;

namespace {

GenerationRequest request_for(Style style, const LabeledSentence& source) {
  GenerationRequest r;
  r.language = Language::kEn;
  r.style = style;
  r.source = source;
  r.prompt = StyleCatalog::builtin().render_prompt(Language::kEn, style, source.text);
  r.model_id = "mock";
  r.prompt_version = StyleCatalog::builtin().version();
  return r;
}

// Fails permanently for selected source ids; counts completions.
class FlakyBackend : public GeneratorBackend {
 public:
  explicit FlakyBackend(std::set<std::string> bad_ids) : bad_ids_(std::move(bad_ids)) {}
  CompletionResult complete(const GenerationRequest& request) override {
    ++calls;
    if (bad_ids_.count(request.source.id)) {
      return CompletionResult::failure(FailureKind::kPermanent, "backend refused", 1);
    }
    return CompletionResult::success("rewrite of " + request.source.text, 1);
  }
  int calls = 0;

 private:
  std::set<std::string> bad_ids_;
};

}  // namespace

TEST_CASE("cache_key: stable, sensitive to every fingerprint field") {
  const auto base = cache_key("m1", Language::kEn, Style::kEmotional, "Rates rose.", "1");
  CHECK(base == cache_key("m1", Language::kEn, Style::kEmotional, "Rates rose.", "1"));
  CHECK(base != cache_key("m2", Language::kEn, Style::kEmotional, "Rates rose.", "1"));
  CHECK(base != cache_key("m1", Language::kEn, Style::kEmotional, "Rates rose.", "2"));
  CHECK(base != cache_key("m1", Language::kTr, Style::kEmotional, "Rates rose.", "1"));
  CHECK(base != cache_key("m1", Language::kEn, Style::kPartisan, "Rates rose.", "1"));
  CHECK(base != cache_key("m1", Language::kEn, Style::kEmotional, "Rates fell.", "1"));
  CHECK(base.size() == 64);
}

TEST_CASE("mock backend: style marker plus the source text, deterministic") {
  MockBackend mock;
  LabeledSentence src{"1", "Rates rose.", ClassLabel::kObjective, std::nullopt};
  const auto a = mock.complete(request_for(Style::kEmotional, src));
  REQUIRE(a.ok);
  CHECK(a.text == "[emotional] Rates rose.");

  LabeledSentence subj{"2", "I think it rains.", ClassLabel::kSubjective, std::nullopt};
  const auto b = mock.complete(request_for(Style::kNormal, subj));
  CHECK(b.text == "[normal] I think it rains.");

  const auto c = mock.complete(request_for(Style::kEmotional, src));
  CHECK(c.text == a.text);
  CHECK(mock.call_count() == 3);
}

TEST_CASE("execute_plan: cold cache calls once per selection, warm cache calls zero") {
  const Dataset ds = testutil::make_dataset(12, 7);  // delta 5
  const auto plan = build_plan(ds, {Style::kEmotional}, SamplingMode::kOver, 3);
  REQUIRE(plan.total_selected() == 5);

  MockBackend mock;
  GenerationCache cache;
  const auto first = execute_plan(plan, ds, StyleCatalog::builtin(), mock, cache, {});
  CHECK(first.records.size() == 5);
  CHECK(first.failures.empty());
  CHECK(first.backend_calls == 5);
  CHECK(mock.call_count() == 5);

  const auto second = execute_plan(plan, ds, StyleCatalog::builtin(), mock, cache, {});
  CHECK(second.records.size() == 5);
  CHECK(second.backend_calls == 0);
  CHECK(second.cache_hits == 5);
  CHECK(mock.call_count() == 5);

  // Same outputs in plan order either way.
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(first.records[i].source_id == second.records[i].source_id);
    CHECK(first.records[i].output_text == second.records[i].output_text);
  }
}

TEST_CASE("execute_plan: unresolvable id aborts before any backend call") {
  const Dataset ds = testutil::make_dataset(6, 3);
  auto plan = build_plan(ds, {Style::kEmotional}, SamplingMode::kOver, 3);
  plan.entries[0].source_ids.push_back("zzz");
  MockBackend mock;
  GenerationCache cache;
  CHECK_THROWS_WITH_AS(execute_plan(plan, ds, StyleCatalog::builtin(), mock, cache, {}),
                       doctest::Contains("zzz"), ValidationError);
  CHECK(mock.call_count() == 0);
}

TEST_CASE("execute_plan: wrong-class selection aborts before any backend call") {
  const Dataset ds = testutil::make_dataset(6, 3);
  auto plan = build_plan(ds, {Style::kEmotional}, SamplingMode::kOver, 3);
  plan.entries[0].source_ids.push_back("s0");  // subjective id under a non-NORMAL style
  MockBackend mock;
  GenerationCache cache;
  CHECK_THROWS_AS(execute_plan(plan, ds, StyleCatalog::builtin(), mock, cache, {}),
                  ValidationError);
  CHECK(mock.call_count() == 0);
}

TEST_CASE("execute_plan: failures ride alongside successes, order preserved") {
  const Dataset ds = testutil::make_dataset(10, 2);  // delta 8
  const auto plan = build_plan(ds, {Style::kPartisan}, SamplingMode::kOver, 1);
  std::set<std::string> bad{plan.entries[0].source_ids[1], plan.entries[0].source_ids[4]};
  FlakyBackend backend(bad);
  GenerationCache cache;
  const auto report = execute_plan(plan, ds, StyleCatalog::builtin(), backend, cache, {});
  CHECK(report.records.size() == 6);
  CHECK(report.failures.size() == 2);
  CHECK(report.records.size() + report.failures.size() == plan.total_selected());
  for (const auto& f : report.failures) {
    CHECK(bad.count(f.source_id) == 1);
    CHECK(f.kind == FailureKind::kPermanent);
  }
  // Failed selections are not cached; a retry run only re-asks for them.
  FlakyBackend retry_backend({});
  const auto retry = execute_plan(plan, ds, StyleCatalog::builtin(), retry_backend, cache, {});
  CHECK(retry.records.size() == 8);
  CHECK(retry_backend.calls == 2);
}

TEST_CASE("execute_plan: concurrency stays within the configured bound") {
  class SlowBackend : public GeneratorBackend {
   public:
    CompletionResult complete(const GenerationRequest& request) override {
      const int now = ++inflight;
      max_inflight = std::max(max_inflight.load(), now);
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      --inflight;
      return CompletionResult::success("x " + request.source.id, 1);
    }
    std::atomic<int> inflight{0};
    std::atomic<int> max_inflight{0};
  };
  const Dataset ds = testutil::make_dataset(20, 4);  // delta 16
  const auto plan = build_plan(ds, {Style::kEmotional}, SamplingMode::kOver, 9);
  SlowBackend backend;
  GenerationCache cache;
  ExecuteOptions opts;
  opts.concurrency = 4;
  const auto report = execute_plan(plan, ds, StyleCatalog::builtin(), backend, cache, opts);
  CHECK(report.records.size() == 16);
  CHECK(backend.max_inflight.load() <= 4);
  // Records still come back in plan order.
  for (std::size_t i = 0; i < report.records.size(); ++i) {
    CHECK(report.records[i].source_id == plan.entries[0].source_ids[i]);
  }
}

TEST_CASE("generation cache: persists, reloads and keeps the last write per key") {
  const auto dir = testutil::fresh_temp_dir("cache");
  const auto file = dir / "gen.jsonl";
  {
    GenerationCache cache(file);
    GenerationRecord r;
    r.key = "k1";
    r.model_id = "m";
    r.language = Language::kTr;
    r.style = Style::kDerogatory;
    r.source_id = "s1";
    r.prompt_version = "1";
    r.output_text = "aşağılayıcı metin";
    r.created_at = "2024-01-01T00:00:00Z";
    cache.put(r);
    r.output_text = "updated";
    r.attempt_count = 2;
    cache.put(r);
    GenerationRecord other = r;
    other.key = "k2";
    other.source_id = "s2";
    cache.put(other);
    CHECK(cache.size() == 2);
  }
  GenerationCache reloaded(file);
  CHECK(reloaded.size() == 2);
  const auto hit = reloaded.find("k1");
  REQUIRE(hit.has_value());
  CHECK(hit->output_text == "updated");
  CHECK(hit->attempt_count == 2);
  CHECK(hit->style == Style::kDerogatory);
  CHECK(reloaded.all().front().key == "k1");  // first-seen order
  CHECK_FALSE(reloaded.find("k9").has_value());
  std::filesystem::remove_all(dir);
}

TEST_CASE("retry policy: the jitter envelope never decreases") {
  RetryPolicy policy;  // base 1s, factor 2, 5 attempts
  CHECK(policy.delay_cap(1) == std::chrono::milliseconds(1000));
  CHECK(policy.delay_cap(2) == std::chrono::milliseconds(2000));
  CHECK(policy.delay_cap(3) == std::chrono::milliseconds(4000));
  CHECK(policy.delay_cap(4) == std::chrono::milliseconds(8000));
  for (int k = 1; k < 10; ++k) CHECK(policy.delay_cap(k + 1) >= policy.delay_cap(k));
}

TEST_CASE("token bucket: spaces requests at the configured rate") {
  using Clock = TokenBucket::Clock;
  Clock::time_point now{};
  Clock::duration slept{};
  TokenBucket bucket(
      60.0, [&] { return now; },
      [&](Clock::duration d) {
        slept += d;
        now += d;
      });
  bucket.acquire();  // burst token available immediately
  CHECK(slept == Clock::duration::zero());
  bucket.acquire();  // must wait ~1 second at 60 rpm
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(slept).count() >= 990);

  TokenBucket unlimited(0.0, [&] { return now; }, [&](Clock::duration) { FAIL("slept"); });
  for (int i = 0; i < 100; ++i) unlimited.acquire();
}

TEST_CASE("remote backend: parses a completion, retries 429, stops on 4xx") {
  httplib::Server server;
  std::atomic<int> hits{0};
  int fail_first = 0;
  int status_on_fail = 429;
  std::string content = "Hello.";
  server.Post("/v1/chat/completions", [&](const httplib::Request&, httplib::Response& res) {
    const int n = ++hits;
    if (n <= fail_first) {
      res.status = status_on_fail;
      res.set_content("{}", "application/json");
      return;
    }
    res.set_content(
        std::string("{\"choices\":[{\"message\":{\"role\":\"assistant\",\"content\":\"") +
            content + "\"}}]}",
        "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread listener([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto make_backend = [&](int max_attempts) {
    RemoteOptions opt;
    opt.base_url = "http://127.0.0.1:" + std::to_string(port);
    opt.api_key = "test-key";
    opt.retry.base_delay = std::chrono::milliseconds(1);
    opt.retry.max_attempts = max_attempts;
    opt.jitter_seed = 7;
    return RemoteChatBackend(opt);
  };
  LabeledSentence src{"1", "Rates rose.", ClassLabel::kObjective, std::nullopt};
  const auto req = request_for(Style::kEmotional, src);

  SUBCASE("well-formed response with one choice") {
    auto backend = make_backend(5);
    const auto result = backend.complete(req);
    REQUIRE(result.ok);
    CHECK(result.text == "Hello.");
    CHECK(result.attempts == 1);
  }

  SUBCASE("two 429s then success gives attempt_count 3") {
    fail_first = 2;
    auto backend = make_backend(5);
    const auto result = backend.complete(req);
    REQUIRE(result.ok);
    CHECK(result.attempts == 3);
    CHECK(hits.load() == 3);
  }

  SUBCASE("persistent 401 is permanent with zero retries") {
    fail_first = 1000;
    status_on_fail = 401;
    auto backend = make_backend(5);
    const auto result = backend.complete(req);
    REQUIRE_FALSE(result.ok);
    CHECK(result.kind == FailureKind::kPermanent);
    CHECK(result.attempts == 1);
    CHECK(hits.load() == 1);
  }

  SUBCASE("persistent 500 exhausts retries as transient") {
    fail_first = 1000;
    status_on_fail = 500;
    auto backend = make_backend(3);
    const auto result = backend.complete(req);
    REQUIRE_FALSE(result.ok);
    CHECK(result.kind == FailureKind::kTransient);
    CHECK(result.attempts == 3);
  }

  SUBCASE("empty completion is a permanent failure") {
    content = "   ";
    auto backend = make_backend(5);
    const auto result = backend.complete(req);
    REQUIRE_FALSE(result.ok);
    CHECK(result.kind == FailureKind::kPermanent);
    CHECK(result.error == "empty completion");
  }

  server.stop();
  listener.join();
}
