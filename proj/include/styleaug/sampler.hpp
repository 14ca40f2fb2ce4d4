#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "styleaug/corpus.hpp"
#include "styleaug/generator.hpp"
#include "styleaug/planner.hpp"

namespace styleaug {

enum class StyleScopeKind { kNoStyle, kSingleStyle, kAllStyles };

struct StyleScope {
  StyleScopeKind kind = StyleScopeKind::kNoStyle;
  std::optional<Style> style;

  static StyleScope no_style() { return {StyleScopeKind::kNoStyle, std::nullopt}; }
  static StyleScope single(Style s) { return {StyleScopeKind::kSingleStyle, s}; }
  static StyleScope all_styles() { return {StyleScopeKind::kAllStyles, std::nullopt}; }

  std::string label() const;  // "no_style", the style name, or "all_styles"

  bool operator==(const StyleScope&) const = default;
};

struct AssemblyManifest {
  std::string scope_label;
  std::string mode_label;  // "under", "over" or "none"
  std::uint64_t seed = 0;
  std::string plan_digest;
  std::string base_digest;  // sha256 of the base dataset's canonical TSV
  std::string model_id;
  std::size_t objective_count = 0;
  std::size_t subjective_count = 0;
  std::size_t generated_added = 0;
  std::size_t originals_removed = 0;
  bool allow_partial = false;
  bool normal_under_paraphrase = false;
  bool shuffled = false;
  std::size_t uncovered = 0;  // plan selections without a generation record
  // Generated rows whose text equals their source verbatim. Kept in the
  // dataset (dropping them would unbalance the counts) but flagged here.
  std::vector<std::string> verbatim_duplicates;
  std::string config_digest;  // filled by the CLI layer

  std::string to_json_string() const;
  static AssemblyManifest from_json_string(std::string_view raw);
};

struct AssembledDataset {
  Dataset data;
  std::optional<SamplingMode> mode;
  StyleScope scope;
  AssemblyManifest manifest;
};

struct AssemblyOptions {
  bool allow_partial = false;
  // Experimental variant: under-sampling with NORMAL also appends the
  // paraphrases instead of only dropping objective rows.
  bool normal_under_paraphrase = false;
};

// Under-sampling. Non-NORMAL styles: the selected objective sentences are
// removed and their subjective-labeled rewrites appended. NORMAL: the same
// number of seeded-chosen objective sentences is dropped and nothing is
// added (unless options.normal_under_paraphrase).
AssembledDataset assemble_under(const Dataset& dataset, const SamplingPlan& plan,
                                const std::vector<GenerationRecord>& records,
                                const AssemblyOptions& options = {});

// Over-sampling: all originals retained, every generated sentence appended
// with label SUBJECTIVE. Balanced by construction when the plan quota equals
// the class delta.
AssembledDataset assemble_over(const Dataset& dataset, const SamplingPlan& plan,
                               const std::vector<GenerationRecord>& records,
                               const AssemblyOptions& options = {});

// Pass-through wrapper tagging the baseline that trains on originals only.
AssembledDataset assemble_no_style(const Dataset& dataset);

// Deterministic permutation of the sentence order; the multiset of rows is
// unchanged.
void shuffle_for_training(AssembledDataset& assembled, std::uint64_t seed);

std::string generated_sentence_id(std::string_view source_id, Style style,
                                  std::string_view model_id);

}  // namespace styleaug
