#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace styleaug {

enum class ClassLabel { kObjective, kSubjective };
enum class Language { kEn, kTr, kDe };
enum class Split { kTrain, kDev, kTest };

std::string_view label_to_string(ClassLabel label);  // "OBJ" / "SUBJ"
ClassLabel label_from_string(std::string_view s);    // case-insensitive

std::string_view language_code(Language lang);  // "EN" / "TR" / "DE"
Language language_from_string(std::string_view s);

std::string_view split_name(Split split);  // "train" / "dev" / "test"
Split split_from_string(std::string_view s);

// Present only on rows produced by a generator backend.
struct GeneratedOrigin {
  std::string style_name;
  std::string source_id;
  std::string model_id;

  bool operator==(const GeneratedOrigin&) const = default;
};

struct LabeledSentence {
  std::string id;
  std::string text;  // trimmed, non-empty, no tabs or line breaks
  ClassLabel label = ClassLabel::kObjective;
  std::optional<GeneratedOrigin> generated;

  bool is_original() const { return !generated.has_value(); }
  bool operator==(const LabeledSentence&) const = default;
};

struct Dataset {
  Language language = Language::kEn;
  Split split = Split::kTrain;
  std::vector<LabeledSentence> sentences;

  bool operator==(const Dataset&) const = default;
};

struct ClassStats {
  std::size_t objective_count = 0;
  std::size_t subjective_count = 0;

  std::size_t size() const { return objective_count + subjective_count; }
  std::size_t delta() const {
    return objective_count >= subjective_count
               ? objective_count - subjective_count
               : subjective_count - objective_count;
  }
  std::optional<ClassLabel> majority() const {
    if (objective_count == subjective_count) return std::nullopt;
    return objective_count > subjective_count ? ClassLabel::kObjective
                                              : ClassLabel::kSubjective;
  }
};

// Parses `sentence_id<TAB>sentence<TAB>label` records. A single leading
// header line (first field exactly `sentence_id`) and blank lines are
// skipped; every other malformed line raises ValidationError with its line
// number. Labels OBJ/SUBJ are matched case-insensitively; all parsed rows
// get origin ORIGINAL.
Dataset parse_tsv(std::string_view raw, Language language, Split split_kind);
Dataset load_tsv(const std::filesystem::path& path, Language language, Split split_kind);

// Header plus one line per sentence, UTF-8, '\n' endings.
// parse_tsv(serialize_tsv(d)) == d for datasets of original rows.
std::string serialize_tsv(const Dataset& dataset);
void save_tsv(const Dataset& dataset, const std::filesystem::path& path);

ClassStats stats(const Dataset& dataset);

}  // namespace styleaug
