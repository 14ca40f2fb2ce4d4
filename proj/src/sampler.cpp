#include "styleaug/sampler.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/rng.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

using nlohmann::json;

struct PlanView {
  const LabeledSentence* source;
  const GenerationRecord* record;  // null when generation failed or is absent
  Style style;
};

std::string uncovered_message(const std::vector<std::string>& ids) {
  std::string msg = "generation records missing for " + std::to_string(ids.size()) +
                    " plan selection(s):";
  const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) msg += " " + ids[i];
  if (ids.size() > shown) msg += " ...";
  msg += " (re-run generation or pass --allow-partial)";
  return msg;
}

// Resolves every plan selection against the dataset and the record set.
// Class discipline is enforced here as well, so a tampered plan cannot slip
// objective paraphrases into the subjective class.
std::vector<PlanView> resolve(const Dataset& dataset, const SamplingPlan& plan,
                              const std::vector<GenerationRecord>& records,
                              bool allow_partial, std::size_t* uncovered_out) {
  std::unordered_map<std::string_view, const LabeledSentence*> by_id;
  for (const auto& s : dataset.sentences) by_id.emplace(s.id, &s);

  std::map<std::pair<int, std::string_view>, const GenerationRecord*> record_index;
  for (const auto& r : records) {
    record_index[{static_cast<int>(r.style), std::string_view(r.source_id)}] = &r;
  }

  std::vector<PlanView> views;
  std::vector<std::string> uncovered;
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
      auto rec = record_index.find({static_cast<int>(entry.style), std::string_view(id)});
      const GenerationRecord* record = rec == record_index.end() ? nullptr : rec->second;
      if (record == nullptr) uncovered.push_back(id);
      views.push_back({it->second, record, entry.style});
    }
  }
  if (!uncovered.empty() && !allow_partial) {
    throw ValidationError(uncovered_message(uncovered));
  }
  *uncovered_out = uncovered.size();
  return views;
}

StyleScope scope_of(const SamplingPlan& plan) {
  if (plan.all_styles) return StyleScope::all_styles();
  if (plan.entries.size() == 1) return StyleScope::single(plan.entries.front().style);
  throw ValidationError("a multi-style plan without the all_styles scope cannot be assembled");
}

LabeledSentence generated_row(const PlanView& view) {
  LabeledSentence row;
  row.id = generated_sentence_id(view.source->id, view.style, view.record->model_id);
  // Generated text may contain line breaks; the TSV carrier cannot, so runs
  // of whitespace collapse to single spaces here (the cache keeps the
  // verbatim trimmed text).
  row.text = collapse_whitespace(view.record->output_text);
  row.label = ClassLabel::kSubjective;
  row.generated = GeneratedOrigin{std::string(style_name(view.style)), view.source->id,
                                  view.record->model_id};
  return row;
}

AssemblyManifest base_manifest(const Dataset& dataset, const SamplingPlan& plan,
                               const StyleScope& scope, const AssemblyOptions& options,
                               std::size_t uncovered) {
  AssemblyManifest m;
  m.scope_label = scope.label();
  m.mode_label = std::string(mode_name(plan.mode));
  m.seed = plan.seed;
  m.plan_digest = plan_digest(plan);
  m.base_digest = sha256_hex(serialize_tsv(dataset));
  m.allow_partial = options.allow_partial;
  m.normal_under_paraphrase = options.normal_under_paraphrase;
  m.uncovered = uncovered;
  return m;
}

void finalize_manifest(AssembledDataset& out, const std::vector<PlanView>& used_views) {
  std::string model;
  for (const auto& v : used_views) {
    if (v.record == nullptr) continue;
    if (model.empty()) {
      model = v.record->model_id;
    } else if (model != v.record->model_id) {
      throw ValidationError("generation records for one plan span multiple model ids ('" + model +
                            "' vs '" + v.record->model_id + "')");
    }
    if (collapse_whitespace(v.record->output_text) == v.source->text) {
      out.manifest.verbatim_duplicates.push_back(
          generated_sentence_id(v.source->id, v.style, v.record->model_id));
    }
  }
  out.manifest.model_id = model.empty() ? "-" : model;
  const ClassStats st = stats(out.data);
  out.manifest.objective_count = st.objective_count;
  out.manifest.subjective_count = st.subjective_count;
}

}  // namespace

std::string StyleScope::label() const {
  switch (kind) {
    case StyleScopeKind::kNoStyle: return "no_style";
    case StyleScopeKind::kAllStyles: return "all_styles";
    case StyleScopeKind::kSingleStyle: return std::string(style_name(*style));
  }
  return "no_style";
}

std::string generated_sentence_id(std::string_view source_id, Style style,
                                  std::string_view model_id) {
  std::string id(source_id);
  id += "::";
  id += style_name(style);
  id += "::";
  id += model_id;
  return id;
}

AssembledDataset assemble_under(const Dataset& dataset, const SamplingPlan& plan,
                                const std::vector<GenerationRecord>& records,
                                const AssemblyOptions& options) {
  if (plan.mode != SamplingMode::kUnder) {
    throw ValidationError("assemble_under requires a plan built in under-sampling mode");
  }
  const StyleScope scope = scope_of(plan);
  std::size_t uncovered = 0;
  const bool normal_scope =
      scope.kind == StyleScopeKind::kSingleStyle && *scope.style == Style::kNormal;
  // In the strict NORMAL reading the paraphrase records are not consumed, so
  // missing ones must not block assembly.
  const bool need_records = !normal_scope || options.normal_under_paraphrase;
  std::vector<PlanView> views =
      resolve(dataset, plan, records, options.allow_partial || !need_records, &uncovered);

  AssembledDataset out;
  out.data.language = dataset.language;
  out.data.split = dataset.split;
  out.mode = plan.mode;
  out.scope = scope;
  out.manifest = base_manifest(dataset, plan, scope, options, need_records ? uncovered : 0);

  std::unordered_set<std::string_view> removed;
  std::vector<PlanView> appended;
  std::vector<std::string> dropped_ids;  // owns the NORMAL drop selection

  if (normal_scope) {
    // NORMAL under-sampling drops objective rows outright. The drop draw runs
    // on its own stream so it never disturbs the paraphrase selection.
    const std::size_t k = plan.entries.front().source_ids.size();
    std::vector<std::string> pool;
    for (const auto& s : dataset.sentences) {
      if (s.label == ClassLabel::kObjective) pool.push_back(s.id);
    }
    if (pool.size() < k) {
      throw ValidationError("normal under-sampling: objective pool has " +
                            std::to_string(pool.size()) + " rows but " + std::to_string(k) +
                            " must be dropped");
    }
    SplitMix64 g(stream_seed(plan.seed, {"plan", language_code(plan.language), "normal", "drop"}));
    dropped_ids = take_sample(pool, k, g);
    for (const auto& id : dropped_ids) removed.insert(id);
    if (options.normal_under_paraphrase) {
      for (const auto& v : views) {
        if (v.record != nullptr) appended.push_back(v);
      }
    }
  } else {
    for (const auto& v : views) {
      if (v.record == nullptr) continue;  // allow_partial: keep the original row
      removed.insert(v.source->id);
      appended.push_back(v);
    }
  }

  for (const auto& s : dataset.sentences) {
    if (!removed.count(s.id)) out.data.sentences.push_back(s);
  }
  for (const auto& v : appended) out.data.sentences.push_back(generated_row(v));

  out.manifest.originals_removed = removed.size();
  out.manifest.generated_added = appended.size();
  finalize_manifest(out, appended);
  return out;
}

AssembledDataset assemble_over(const Dataset& dataset, const SamplingPlan& plan,
                               const std::vector<GenerationRecord>& records,
                               const AssemblyOptions& options) {
  if (plan.mode != SamplingMode::kOver) {
    throw ValidationError("assemble_over requires a plan built in over-sampling mode");
  }
  const StyleScope scope = scope_of(plan);
  std::size_t uncovered = 0;
  std::vector<PlanView> views = resolve(dataset, plan, records, options.allow_partial, &uncovered);

  AssembledDataset out;
  out.data.language = dataset.language;
  out.data.split = dataset.split;
  out.mode = plan.mode;
  out.scope = scope;
  out.manifest = base_manifest(dataset, plan, scope, options, uncovered);

  out.data.sentences = dataset.sentences;
  std::vector<PlanView> appended;
  for (const auto& v : views) {
    if (v.record == nullptr) continue;
    appended.push_back(v);
    out.data.sentences.push_back(generated_row(v));
  }
  out.manifest.generated_added = appended.size();
  finalize_manifest(out, appended);
  return out;
}

AssembledDataset assemble_no_style(const Dataset& dataset) {
  AssembledDataset out;
  out.data = dataset;
  out.mode = std::nullopt;
  out.scope = StyleScope::no_style();
  out.manifest.scope_label = out.scope.label();
  out.manifest.mode_label = "none";
  out.manifest.base_digest = sha256_hex(serialize_tsv(dataset));
  out.manifest.model_id = "-";
  const ClassStats st = stats(dataset);
  out.manifest.objective_count = st.objective_count;
  out.manifest.subjective_count = st.subjective_count;
  return out;
}

void shuffle_for_training(AssembledDataset& assembled, std::uint64_t seed) {
  SplitMix64 g(stream_seed(seed, {"shuffle", assembled.manifest.scope_label,
                                  assembled.manifest.mode_label}));
  deterministic_shuffle(assembled.data.sentences, g);
  assembled.manifest.shuffled = true;
}

std::string AssemblyManifest::to_json_string() const {
  json j{{"scope", scope_label},
         {"mode", mode_label},
         {"seed", seed},
         {"plan_digest", plan_digest},
         {"base_digest", base_digest},
         {"model_id", model_id},
         {"objective_count", objective_count},
         {"subjective_count", subjective_count},
         {"generated_added", generated_added},
         {"originals_removed", originals_removed},
         {"allow_partial", allow_partial},
         {"normal_under_paraphrase", normal_under_paraphrase},
         {"shuffled", shuffled},
         {"uncovered", uncovered},
         {"verbatim_duplicates", verbatim_duplicates},
         {"config_digest", config_digest}};
  return j.dump(2) + "\n";
}

AssemblyManifest AssemblyManifest::from_json_string(std::string_view raw) {
  json j = json::parse(raw);
  AssemblyManifest m;
  m.scope_label = j.at("scope").get<std::string>();
  m.mode_label = j.at("mode").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.plan_digest = j.value("plan_digest", "");
  m.base_digest = j.value("base_digest", "");
  m.model_id = j.value("model_id", "-");
  m.objective_count = j.at("objective_count").get<std::size_t>();
  m.subjective_count = j.at("subjective_count").get<std::size_t>();
  m.generated_added = j.value("generated_added", std::size_t{0});
  m.originals_removed = j.value("originals_removed", std::size_t{0});
  m.allow_partial = j.value("allow_partial", false);
  m.normal_under_paraphrase = j.value("normal_under_paraphrase", false);
  m.shuffled = j.value("shuffled", false);
  m.uncovered = j.value("uncovered", std::size_t{0});
  if (j.contains("verbatim_duplicates")) {
    m.verbatim_duplicates = j.at("verbatim_duplicates").get<std::vector<std::string>>();
  }
  m.config_digest = j.value("config_digest", "");
  return m;
}

}  // namespace styleaug
