#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "styleaug/corpus.hpp"

namespace styleaug {

// The eight rewrite styles, in catalog order. NORMAL paraphrases subjective
// sentences; every other style rewrites objective sentences.
enum class Style {
  kNormal,
  kSubjective,
  kEmotional,
  kPropaganda,
  kDerogatory,
  kExaggerated,
  kPartisan,
  kPrejudiced,
};

inline constexpr std::array<Style, 8> kAllStyles = {
    Style::kNormal,     Style::kSubjective,  Style::kEmotional, Style::kPropaganda,
    Style::kDerogatory, Style::kExaggerated, Style::kPartisan,  Style::kPrejudiced,
};

// Canonical names double as the English surface forms.
std::string_view style_name(Style style);
Style style_from_string(std::string_view s);  // case-insensitive

inline bool style_uses_subjective_sources(Style style) {
  return style == Style::kNormal;
}

struct ChecklistEntry {
  Style style;
  std::string statement;
  std::vector<std::string> citations;
};

// The six indicators of subjective writing the style set is drawn from,
// with their literature citation keys.
const std::vector<ChecklistEntry>& checklist_entries();

// Per-language prompt templates and style surface forms. Immutable once
// constructed; safe for concurrent reads. The version tag participates in
// generation cache keys, so template edits must bump it.
class StyleCatalog {
 public:
  static const StyleCatalog& builtin();
  static StyleCatalog parse(std::string_view raw);
  static StyleCatalog load(const std::filesystem::path& path);

  std::string serialize() const;
  void save(const std::filesystem::path& path) const;

  const std::string& version() const { return version_; }
  std::vector<Language> languages() const;
  bool has_language(Language lang) const;

  const std::string& surface_form(Language lang, Style style) const;
  const std::string& prompt_template(Language lang) const;

  // Substitutes {style} and {sentence}; the sentence is inserted verbatim.
  std::string render_prompt(Language lang, Style style, std::string_view sentence) const;

 private:
  StyleCatalog() = default;
  void validate() const;

  std::string version_;
  std::map<Language, std::string> templates_;
  std::map<Language, std::array<std::string, kAllStyles.size()>> surface_forms_;
};

}  // namespace styleaug
