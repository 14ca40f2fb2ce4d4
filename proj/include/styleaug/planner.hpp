#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "styleaug/checklist.hpp"
#include "styleaug/corpus.hpp"

namespace styleaug {

enum class SamplingMode { kUnder, kOver };

std::string_view mode_name(SamplingMode mode);  // "under" / "over"
SamplingMode mode_from_string(std::string_view s);

struct PlanEntry {
  Style style;
  std::vector<std::string> source_ids;  // draw order, unique within the entry
};

struct SamplingPlan {
  Language language = Language::kEn;
  SamplingMode mode = SamplingMode::kOver;
  std::uint64_t seed = 0;
  bool all_styles = false;
  std::string dataset_digest;  // sha256 of the source TSV; empty if unknown
  std::string config_digest;   // experiment identity; empty if unknown
  std::vector<PlanEntry> entries;

  std::size_t total_selected() const;
};

// Number of generations needed: the full class-count difference when
// over-sampling, half of it (floored) when under-sampling.
std::size_t quota(const ClassStats& stats, SamplingMode mode);

// Draws quota(stats, mode) source ids per style, without replacement, from
// the style's eligible pool (subjective sentences for NORMAL, objective for
// everything else). Each style's draw runs on its own SplitMix64 stream
// seeded from (seed, language, style), so plans are bit-reproducible and
// styles never perturb each other.
SamplingPlan build_plan(const Dataset& dataset, const std::vector<Style>& styles,
                        SamplingMode mode, std::uint64_t seed);

// One plan covering the seven non-NORMAL styles with the quota split evenly:
// each style gets quota/7, and the remainder goes one each to the earliest
// styles in catalog order. Draws are without replacement across styles.
SamplingPlan build_all_styles_plan(const Dataset& dataset, SamplingMode mode,
                                   std::uint64_t seed);

std::string serialize_plan(const SamplingPlan& plan);
SamplingPlan parse_plan(std::string_view raw);
void save_plan(const SamplingPlan& plan, const std::filesystem::path& path);
SamplingPlan load_plan(const std::filesystem::path& path);

// Digest of the canonical serialized form; referenced by downstream manifests.
std::string plan_digest(const SamplingPlan& plan);

}  // namespace styleaug
