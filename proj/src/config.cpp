#include "styleaug/config.hpp"

#include <json.hpp>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"

namespace styleaug {

namespace {

using nlohmann::json;

[[noreturn]] void bad_key(const std::string& where, const std::string& key) {
  throw ConfigError("unknown config key '" + key + "' in " + where);
}

json parse_object(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("config is not valid JSON: ") + ex.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  return j;
}

template <typename T>
T get_as(const json& j, const std::string& where, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' in " + where + " has the wrong type");
  }
}

BackendConfig parse_backend(const json& j) {
  BackendConfig b;
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") b.kind = get_as<std::string>(value, "backend", key);
    else if (key == "endpoint") b.endpoint = get_as<std::string>(value, "backend", key);
    else if (key == "path") b.path = get_as<std::string>(value, "backend", key);
    else if (key == "model_id") b.model_id = get_as<std::string>(value, "backend", key);
    else if (key == "temperature") b.decoding.temperature = get_as<double>(value, "backend", key);
    else if (key == "max_output_tokens") b.decoding.max_output_tokens = get_as<int>(value, "backend", key);
    else if (key == "rate_limit_rpm") b.rate_limit_rpm = get_as<double>(value, "backend", key);
    else if (key == "concurrency") b.concurrency = get_as<int>(value, "backend", key);
    else if (key == "api_key_env") b.api_key_env = get_as<std::string>(value, "backend", key);
    else if (key == "timeout_ms") b.timeout_ms = get_as<int>(value, "backend", key);
    else if (key == "retry_max_attempts") b.retry_max_attempts = get_as<int>(value, "backend", key);
    else if (key == "retry_base_delay_ms") b.retry_base_delay_ms = get_as<int>(value, "backend", key);
    else bad_key("backend", key);
  }
  if (b.kind != "mock" && b.kind != "remote") {
    throw ConfigError("backend.kind must be 'mock' or 'remote', got '" + b.kind + "'");
  }
  return b;
}

ClassifierConfig parse_classifier(const json& j) {
  ClassifierConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "epochs") c.train.epochs = get_as<int>(value, "classifier", key);
    else if (key == "batch_size") c.train.batch_size = get_as<int>(value, "classifier", key);
    else if (key == "learning_rate") c.train.learning_rate = get_as<double>(value, "classifier", key);
    else if (key == "l2") c.train.l2 = get_as<double>(value, "classifier", key);
    else if (key == "min_df") c.min_df = get_as<int>(value, "classifier", key);
    else if (key == "max_tokens") c.max_tokens = get_as<int>(value, "classifier", key);
    else bad_key("classifier", key);
  }
  return c;
}

}  // namespace

PipelineConfig PipelineConfig::from_json_text(std::string_view text) {
  const json j = parse_object(text);
  PipelineConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "language") {
      c.language = language_from_string(get_as<std::string>(value, "config", key));
    } else if (key == "train") {
      c.train_path = get_as<std::string>(value, "config", key);
    } else if (key == "dev") {
      c.dev_path = get_as<std::string>(value, "config", key);
    } else if (key == "test") {
      c.test_path = get_as<std::string>(value, "config", key);
    } else if (key == "styles") {
      c.styles.clear();
      for (const auto& s : get_as<std::vector<std::string>>(value, "config", key)) {
        c.styles.push_back(style_from_string(s));
      }
    } else if (key == "mode") {
      c.mode = mode_from_string(get_as<std::string>(value, "config", key));
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(value, "config", key);
      c.seed_set = true;
    } else if (key == "backend") {
      c.backend = parse_backend(value);
    } else if (key == "cache") {
      c.cache_path = get_as<std::string>(value, "config", key);
    } else if (key == "out") {
      c.out_dir = get_as<std::string>(value, "config", key);
    } else if (key == "classifier") {
      c.classifier = parse_classifier(value);
    } else if (key == "per_style_review") {
      c.per_style_review = get_as<int>(value, "config", key);
    } else if (key == "catalog") {
      c.catalog_path = get_as<std::string>(value, "config", key);
    } else if (key == "allow_partial") {
      c.allow_partial = get_as<bool>(value, "config", key);
    } else if (key == "normal_under_paraphrase") {
      c.normal_under_paraphrase = get_as<bool>(value, "config", key);
    } else if (key == "shuffle") {
      c.shuffle = get_as<bool>(value, "config", key);
    } else if (key == "grid_workers") {
      c.grid_workers = get_as<int>(value, "config", key);
    } else if (key == "expected_deltas") {
      for (const auto& [split, delta] : value.items()) {
        c.expected_deltas[split] = get_as<std::int64_t>(delta, "expected_deltas", split);
      }
    } else {
      bad_key("config", key);
    }
  }
  c.classifier.train.seed = c.seed;
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string(e.what()));
  }
  return from_json_text(text);
}

void PipelineConfig::validate() const {
  if (!seed_set) {
    throw ConfigError("seed is required (set \"seed\" in the config or pass --seed); "
                      "runs must be reproducible by construction");
  }
  if (styles.empty()) throw ConfigError("styles must not be empty");
  if (per_style_review < 1) throw ConfigError("per_style_review must be at least 1");
  if (classifier.train.epochs < 0) throw ConfigError("classifier.epochs must be non-negative");
  if (classifier.train.batch_size < 1) throw ConfigError("classifier.batch_size must be positive");
  if (classifier.max_tokens < 1) throw ConfigError("classifier.max_tokens must be positive");
  if (backend.kind == "remote" && backend.endpoint.empty()) {
    throw ConfigError("remote backend requires backend.endpoint");
  }
  if (backend.decoding.temperature < 0) throw ConfigError("backend.temperature must be >= 0");
  if (backend.decoding.max_output_tokens < 1) {
    throw ConfigError("backend.max_output_tokens must be positive");
  }
  if (backend.concurrency < 1) throw ConfigError("backend.concurrency must be at least 1");
}

std::filesystem::path PipelineConfig::resolved_cache_path() const {
  return cache_path.empty() ? out_dir / "generations.jsonl" : cache_path;
}

const StyleCatalog& PipelineConfig::catalog() const {
  if (catalog_path.empty()) return StyleCatalog::builtin();
  if (!loaded_catalog_) loaded_catalog_ = StyleCatalog::load(catalog_path);
  return *loaded_catalog_;
}

namespace {

json semantic_core(const PipelineConfig& c, const std::string& catalog_version) {
  std::vector<std::string> style_names;
  for (Style s : c.styles) style_names.emplace_back(style_name(s));
  return json{
      {"language", language_code(c.language)},
      {"styles", style_names},
      {"mode", mode_name(c.mode)},
      {"seed", c.seed},
      {"backend",
       {{"kind", c.backend.kind},
        {"endpoint", c.backend.endpoint},
        {"path", c.backend.path},
        {"model_id", c.backend.model_id},
        {"temperature", c.backend.decoding.temperature},
        {"max_output_tokens", c.backend.decoding.max_output_tokens},
        {"rate_limit_rpm", c.backend.rate_limit_rpm},
        {"concurrency", c.backend.concurrency}}},
      {"classifier",
       {{"epochs", c.classifier.train.epochs},
        {"batch_size", c.classifier.train.batch_size},
        {"learning_rate", c.classifier.train.learning_rate},
        {"l2", c.classifier.train.l2},
        {"min_df", c.classifier.min_df},
        {"max_tokens", c.classifier.max_tokens}}},
      {"per_style_review", c.per_style_review},
      {"allow_partial", c.allow_partial},
      {"normal_under_paraphrase", c.normal_under_paraphrase},
      {"shuffle", c.shuffle},
      {"catalog_version", catalog_version},
  };
}

}  // namespace

std::string PipelineConfig::resolved_json() const {
  json j = semantic_core(*this, catalog().version());
  j["train"] = train_path.string();
  j["dev"] = dev_path.string();
  j["test"] = test_path.string();
  j["cache"] = resolved_cache_path().string();
  j["out"] = out_dir.string();
  j["catalog"] = catalog_path.string();
  j["grid_workers"] = grid_workers;
  j["backend"]["api_key_env"] = backend.api_key_env;
  j["backend"]["timeout_ms"] = backend.timeout_ms;
  j["backend"]["retry_max_attempts"] = backend.retry_max_attempts;
  j["backend"]["retry_base_delay_ms"] = backend.retry_base_delay_ms;
  j["config_digest"] = digest();
  if (!expected_deltas.empty()) {
    json deltas = json::object();
    for (const auto& [split, delta] : expected_deltas) deltas[split] = delta;
    j["expected_deltas"] = deltas;
  }
  return j.dump(2) + "\n";
}

std::string PipelineConfig::digest() const {
  return sha256_hex(semantic_core(*this, catalog().version()).dump());
}

}  // namespace styleaug
