#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "styleaug/checklist.hpp"
#include "styleaug/corpus.hpp"
#include "styleaug/generator.hpp"

namespace styleaug {

struct ReviewItem {
  GenerationRecord record;
  std::string source_text;
};

// Seeded draw of per_style items per (model, style). The draw stream is keyed
// by (seed, style) and NOT by model, and pools are sorted by source id, so
// two models generated from the same plan review the same source sentences.
// Styles with fewer records than requested yield everything they have plus a
// warning.
std::vector<ReviewItem> sample_for_review(const std::vector<GenerationRecord>& records,
                                          const Dataset& source_dataset, int per_style,
                                          std::uint64_t seed,
                                          std::ostream* warnings = nullptr);

struct AnnotationRecord {
  std::string item_key;
  Style style = Style::kNormal;
  std::string model_id;
  Language language = Language::kEn;
  bool q1 = false;
  bool q2 = false;
  std::string annotator;
  std::string timestamp;
};

struct SessionResult {
  std::vector<AnnotationRecord> completed;  // this session only
  std::size_t skipped = 0;
  std::size_t already_annotated = 0;
  bool quit_early = false;
};

// Interactive terminal questionnaire: shows each item, asks the two yes/no
// questions, appends every completed record to output_path immediately.
// Answers: y, n, s (skip the item), q (save and quit). Items whose key is
// already present in output_path are skipped, so an interrupted session
// resumes where it stopped.
SessionResult run_session(const std::vector<ReviewItem>& items,
                          const std::string& annotator_id,
                          const std::filesystem::path& output_path, std::istream& in,
                          std::ostream& out);

struct StyleScore {
  Style style = Style::kNormal;
  std::string model_id;
  double q1_score = 0.0;  // yes-fraction, raw
  double q2_score = 0.0;
  std::size_t n = 0;
};

// Yes-fractions per (style, model). Skipped items never reached the file, so
// they count in neither numerator nor denominator.
std::vector<StyleScore> aggregate(const std::vector<AnnotationRecord>& records);

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);

// Scores rounded to one decimal for display; StyleScore keeps the raw values.
std::string render_scores(const std::vector<StyleScore>& scores);

}  // namespace styleaug
