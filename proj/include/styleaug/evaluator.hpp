#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "styleaug/classifier.hpp"
#include "styleaug/corpus.hpp"
#include "styleaug/generator.hpp"
#include "styleaug/metrics.hpp"
#include "styleaug/sampler.hpp"

namespace styleaug {

struct EvalReport {
  double macro_f1 = 0.0;
  double f1_subjective = 0.0;
  double f1_objective = 0.0;
  std::size_t support_objective = 0;
  std::size_t support_subjective = 0;
  // Provenance of the training run behind the scores.
  std::string style_label = "no_style";
  std::string mode_label = "none";
  std::string model_id = "-";
  std::uint64_t seed = 0;
  std::string config_digest;
};

struct Provenance {
  std::string style_label = "no_style";
  std::string mode_label = "none";
  std::string model_id = "-";
  std::uint64_t seed = 0;
  std::string config_digest;
};

EvalReport evaluate(const LinearModel& model, const Vocabulary& vocab,
                    const Dataset& eval_set, const Provenance& provenance = {});

std::string render_eval_report(const EvalReport& report);

struct GridCell {
  StyleScope scope;
  SamplingMode mode = SamplingMode::kUnder;
  bool ok = false;
  std::string error;
  EvalReport report;
};

struct ReportGrid {
  Language language = Language::kEn;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string model_id = "-";
  std::vector<StyleScope> rows;  // render order
  std::vector<GridCell> cells;

  const GridCell* cell(const StyleScope& scope, SamplingMode mode) const;
};

struct GridOptions {
  std::vector<Style> styles{kAllStyles.begin(), kAllStyles.end()};
  bool include_all_styles = true;
  std::uint64_t seed = 0;
  std::string model_id = "mock";
  Decoding decoding{};
  TrainOptions classifier{};
  int min_df = 2;
  int max_tokens = kDefaultTokenBudget;
  // Worker threads for independent cells; 0 means one per style.
  int workers = 0;
  ExecuteOptions exec{};
  AssemblyOptions assembly{};
  std::string config_digest;
  // When set, each cell writes its plan, assembled TSV and manifest here.
  std::filesystem::path artifact_dir;
};

// One full sweep: for every (style row, sampling mode) cell the pipeline runs
// plan -> generate (through the shared cache) -> assemble -> train (with
// per-epoch checkpoints selected on dev) -> evaluate on test. The no-style
// baseline trains once and fills both mode columns. A failed cell is marked
// and reported, never fatal.
ReportGrid run_grid(const Dataset& train, const Dataset& dev, const Dataset& test,
                    const StyleCatalog& catalog, GeneratorBackend& backend,
                    GenerationCache& cache, const GridOptions& options);

std::string render_grid_text(const ReportGrid& grid);
std::string render_grid_tsv(const ReportGrid& grid);

// Rebuilds a grid from its own TSV rendering (failed cells keep their error
// text; per-class supports are restored, everything else scores as written).
// render_grid_tsv(parse_grid_tsv(t)) == t for grids this library wrote.
ReportGrid parse_grid_tsv(std::string_view raw);

// "↑" when b improves on a, "↓" when it regresses, "=" within 1e-9.
std::string comparison_marker(double a, double b);

struct ComparisonCell {
  std::string row_label;
  std::string mode_label;
  bool ok = false;
  double value_a = 0.0;
  double value_b = 0.0;
  std::string marker;
};

struct ModelComparison {
  std::string model_a;
  std::string model_b;
  std::uint64_t seed_a = 0;
  std::uint64_t seed_b = 0;
  std::string config_a;
  std::string config_b;
  std::vector<ComparisonCell> cells;
};

// Pairs the two grids cell by cell on macro F1. Grids must share the same
// row and mode structure.
ModelComparison compare_generators(const ReportGrid& grid_a, const ReportGrid& grid_b);

std::string render_comparison_text(const ModelComparison& comparison);
std::string render_comparison_tsv(const ModelComparison& comparison);

}  // namespace styleaug
