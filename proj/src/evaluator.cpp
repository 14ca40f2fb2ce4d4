#include "styleaug/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>

#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/planner.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

std::string f1_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

std::vector<std::string> dataset_texts(const Dataset& ds) {
  std::vector<std::string> out;
  out.reserve(ds.sentences.size());
  for (const auto& s : ds.sentences) out.push_back(s.text);
  return out;
}

std::vector<ClassLabel> dataset_labels(const Dataset& ds) {
  std::vector<ClassLabel> out;
  out.reserve(ds.sentences.size());
  for (const auto& s : ds.sentences) out.push_back(s.label);
  return out;
}

std::string cell_stem(const StyleScope& scope, std::optional<SamplingMode> mode) {
  if (scope.kind == StyleScopeKind::kNoStyle) return "no_style";
  return std::string(mode_name(*mode)) + "_" + scope.label();
}

constexpr double kMarkerEpsilon = 1e-9;

}  // namespace

EvalReport evaluate(const LinearModel& model, const Vocabulary& vocab,
                    const Dataset& eval_set, const Provenance& provenance) {
  if (eval_set.sentences.empty()) throw ValidationError("evaluation set is empty");
  const auto features = transform_batch(vocab, dataset_texts(eval_set));
  const auto predictions = predict_batch(model, features);
  const std::vector<ClassLabel> gold = dataset_labels(eval_set);
  std::vector<ClassLabel> predicted;
  predicted.reserve(predictions.size());
  for (const auto& p : predictions) predicted.push_back(p.label);

  EvalReport report;
  report.f1_subjective = f1_per_class(gold, predicted, ClassLabel::kSubjective);
  report.f1_objective = f1_per_class(gold, predicted, ClassLabel::kObjective);
  report.macro_f1 = (report.f1_subjective + report.f1_objective) / 2.0;
  const ClassStats st = stats(eval_set);
  report.support_objective = st.objective_count;
  report.support_subjective = st.subjective_count;
  report.style_label = provenance.style_label;
  report.mode_label = provenance.mode_label;
  report.model_id = provenance.model_id;
  report.seed = provenance.seed;
  report.config_digest = provenance.config_digest;
  return report;
}

std::string render_eval_report(const EvalReport& r) {
  std::string out;
  out += "style: " + r.style_label + "\n";
  out += "mode: " + r.mode_label + "\n";
  out += "generator_model: " + r.model_id + "\n";
  out += "seed: " + std::to_string(r.seed) + "\n";
  out += "config: " + (r.config_digest.empty() ? "-" : r.config_digest) + "\n";
  out += "f1_macro: " + f1_str(r.macro_f1) + " (macro-averaged F1 over the two classes)\n";
  out += "f1_subjective: " + f1_str(r.f1_subjective) + "\n";
  out += "f1_objective: " + f1_str(r.f1_objective) + "\n";
  out += "support: " + std::to_string(r.support_objective) + " OBJ / " +
         std::to_string(r.support_subjective) + " SUBJ\n";
  out += "note: surrogate tf-idf + logistic-SGD classifier; scores rank sampling strategies\n";
  return out;
}

const GridCell* ReportGrid::cell(const StyleScope& scope, SamplingMode mode) const {
  for (const auto& c : cells) {
    if (c.scope != scope) continue;
    if (scope.kind == StyleScopeKind::kNoStyle || c.mode == mode) return &c;
  }
  return nullptr;
}

ReportGrid run_grid(const Dataset& train, const Dataset& dev, const Dataset& test,
                    const StyleCatalog& catalog, GeneratorBackend& backend,
                    GenerationCache& cache, const GridOptions& options) {
  if (train.sentences.empty()) throw ValidationError("grid: training split is empty");
  if (dev.sentences.empty()) throw ValidationError("grid: dev split is empty");
  if (test.sentences.empty()) throw ValidationError("grid: test split is empty");

  ReportGrid grid;
  grid.language = train.language;
  grid.seed = options.seed;
  grid.config_digest = options.config_digest;
  grid.model_id = options.model_id;
  grid.rows.push_back(StyleScope::no_style());
  for (Style s : options.styles) grid.rows.push_back(StyleScope::single(s));
  if (options.include_all_styles) grid.rows.push_back(StyleScope::all_styles());

  struct Job {
    StyleScope scope;
    std::optional<SamplingMode> mode;  // empty for the shared no-style run
  };
  std::vector<Job> jobs;
  jobs.push_back({StyleScope::no_style(), std::nullopt});
  for (std::size_t r = 1; r < grid.rows.size(); ++r) {
    for (SamplingMode mode : {SamplingMode::kUnder, SamplingMode::kOver}) {
      jobs.push_back({grid.rows[r], mode});
    }
  }

  const auto dev_texts = dataset_texts(dev);
  const auto dev_labels = dataset_labels(dev);

  ExecuteOptions exec = options.exec;
  exec.model_id = options.model_id;
  exec.decoding = options.decoding;

  std::vector<GridCell> results(jobs.size());
  auto run_job = [&](std::size_t j) {
    const Job& job = jobs[j];
    GridCell& cell = results[j];
    cell.scope = job.scope;
    cell.mode = job.mode.value_or(SamplingMode::kUnder);
    try {
      AssembledDataset assembled;
      std::optional<SamplingPlan> plan;
      if (job.scope.kind == StyleScopeKind::kNoStyle) {
        assembled = assemble_no_style(train);
      } else {
        if (job.scope.kind == StyleScopeKind::kAllStyles) {
          plan = build_all_styles_plan(train, *job.mode, options.seed);
        } else {
          plan = build_plan(train, {*job.scope.style}, *job.mode, options.seed);
        }
        // Strict NORMAL under-sampling only drops rows; its paraphrases would
        // go unused, so skip the backend for that cell.
        const bool needs_generation = !(job.scope.kind == StyleScopeKind::kSingleStyle &&
                                        *job.scope.style == Style::kNormal &&
                                        *job.mode == SamplingMode::kUnder &&
                                        !options.assembly.normal_under_paraphrase);
        std::vector<GenerationRecord> records;
        if (needs_generation) {
          records = execute_plan(*plan, train, catalog, backend, cache, exec).records;
        }
        assembled = *job.mode == SamplingMode::kUnder
                        ? assemble_under(train, *plan, records, options.assembly)
                        : assemble_over(train, *plan, records, options.assembly);
      }
      assembled.manifest.config_digest = options.config_digest;
      if (plan) plan->config_digest = options.config_digest;

      if (!options.artifact_dir.empty()) {
        const std::string stem = cell_stem(job.scope, job.mode);
        if (plan) save_plan(*plan, options.artifact_dir / (stem + ".plan.txt"));
        save_tsv(assembled.data, options.artifact_dir / (stem + ".tsv"));
        write_file(options.artifact_dir / (stem + ".manifest.json"),
                   assembled.manifest.to_json_string());
      }

      const auto docs = dataset_texts(assembled.data);
      const auto labels = dataset_labels(assembled.data);
      const Vocabulary vocab = fit_vocabulary(docs, options.min_df, options.max_tokens);
      const auto features = transform_batch(vocab, docs);
      const auto checkpoints =
          train_checkpoints(features, labels, vocab.size(), options.classifier);
      const auto dev_features = transform_batch(vocab, dev_texts);
      const std::size_t best = model_select(checkpoints, dev_features, dev_labels);

      Provenance prov;
      prov.style_label = job.scope.label();
      prov.mode_label = job.mode ? std::string(mode_name(*job.mode)) : "none";
      prov.model_id = job.scope.kind == StyleScopeKind::kNoStyle ? "-" : options.model_id;
      prov.seed = options.seed;
      prov.config_digest = options.config_digest;
      cell.report = evaluate(checkpoints[best], vocab, test, prov);
      cell.ok = true;
    } catch (const std::exception& ex) {
      cell.ok = false;
      cell.error = ex.what();
    }
  };

  int workers = options.workers > 0 ? options.workers
                                    : static_cast<int>(std::max<std::size_t>(1, options.styles.size()));
  workers = std::min<int>(workers, static_cast<int>(jobs.size()));
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    run_job(static_cast<std::size_t>(j));
  }

  grid.cells = std::move(results);
  return grid;
}

namespace {

struct TextRow {
  std::string label;
  // us_f1, us_f1sub, os_f1, os_f1sub; empty when failed
  std::array<std::string, 4> values;
  std::array<double, 4> raw{0, 0, 0, 0};
  std::array<bool, 4> ok{false, false, false, false};
};

std::vector<TextRow> collect_rows(const ReportGrid& grid) {
  std::vector<TextRow> rows;
  for (const auto& scope : grid.rows) {
    TextRow row;
    row.label = scope.label();
    const GridCell* under = grid.cell(scope, SamplingMode::kUnder);
    const GridCell* over = grid.cell(scope, SamplingMode::kOver);
    const std::array<const GridCell*, 2> cols = {under, over};
    for (std::size_t c = 0; c < 2; ++c) {
      if (cols[c] != nullptr && cols[c]->ok) {
        row.raw[c * 2] = cols[c]->report.macro_f1;
        row.raw[c * 2 + 1] = cols[c]->report.f1_subjective;
        row.ok[c * 2] = row.ok[c * 2 + 1] = true;
        row.values[c * 2] = f1_str(row.raw[c * 2]);
        row.values[c * 2 + 1] = f1_str(row.raw[c * 2 + 1]);
      } else {
        row.values[c * 2] = row.values[c * 2 + 1] = "failed";
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string render_grid_text(const ReportGrid& grid) {
  auto rows = collect_rows(grid);
  // Column maxima get the '*' marker, mirroring the usual bold-the-best table.
  std::array<double, 4> best{};
  std::array<bool, 4> any{};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 4; ++c) {
      if (row.ok[c] && (!any[c] || row.raw[c] > best[c])) {
        best[c] = row.raw[c];
        any[c] = true;
      }
    }
  }

  std::string out;
  out += "grid for language ";
  out += language_code(grid.language);
  out += ", seed " + std::to_string(grid.seed);
  if (!grid.config_digest.empty()) out += ", config " + grid.config_digest.substr(0, 12);
  out += "\n\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %10s\n", "style", "US-F1",
                "US-F1Sub", "OS-F1", "OS-F1Sub");
  out += line;
  for (const auto& row : rows) {
    std::array<std::string, 4> cells = row.values;
    for (std::size_t c = 0; c < 4; ++c) {
      if (row.ok[c] && any[c] && std::abs(row.raw[c] - best[c]) < kMarkerEpsilon) {
        cells[c] += "*";
      }
    }
    std::snprintf(line, sizeof(line), "%-12s %10s %10s %10s %10s\n", row.label.c_str(),
                  cells[0].c_str(), cells[1].c_str(), cells[2].c_str(), cells[3].c_str());
    out += line;
  }
  out += "\n";
  out += "* best in column; F1 = macro-averaged F1 over the two classes; F1Sub = subjective-class F1\n";
  out += "all-styles quota: quota div 7 per style, remainder one each in catalog order\n";
  out += "classifier: tf-idf + logistic SGD surrogate; scores rank sampling strategies only\n";
  return out;
}

std::string render_grid_tsv(const ReportGrid& grid) {
  std::string out;
  out += "# styleaug_grid\t1\n";
  out += "# language\t";
  out += language_code(grid.language);
  out.push_back('\n');
  out += "# seed\t" + std::to_string(grid.seed) + "\n";
  out += "# config_digest\t" + (grid.config_digest.empty() ? "-" : grid.config_digest) + "\n";
  out += "# model\t" + (grid.model_id.empty() ? "-" : grid.model_id) + "\n";
  out += "scope\tmode\tstatus\tf1\tf1_sub\tsupport_obj\tsupport_subj\terror\n";
  auto emit = [&out](const GridCell& c, std::string_view mode_label) {
    out += c.scope.label();
    out.push_back('\t');
    out += mode_label;
    out.push_back('\t');
    if (c.ok) {
      out += "ok\t" + f1_str(c.report.macro_f1) + "\t" + f1_str(c.report.f1_subjective) + "\t" +
             std::to_string(c.report.support_objective) + "\t" +
             std::to_string(c.report.support_subjective) + "\t";
    } else {
      out += "failed\t-\t-\t-\t-\t";
      out += collapse_whitespace(c.error);
    }
    out.push_back('\n');
  };
  for (const auto& scope : grid.rows) {
    if (scope.kind == StyleScopeKind::kNoStyle) {
      const GridCell* c = grid.cell(scope, SamplingMode::kUnder);
      if (c != nullptr) emit(*c, "none");
      continue;
    }
    for (SamplingMode mode : {SamplingMode::kUnder, SamplingMode::kOver}) {
      const GridCell* c = grid.cell(scope, mode);
      if (c != nullptr) emit(*c, mode_name(mode));
    }
  }
  return out;
}

ReportGrid parse_grid_tsv(std::string_view raw) {
  ReportGrid grid;
  bool versioned = false;
  bool header_seen = false;
  std::size_t line_no = 0;
  auto scope_from_label = [](std::string_view label) -> StyleScope {
    if (label == "no_style") return StyleScope::no_style();
    if (label == "all_styles") return StyleScope::all_styles();
    return StyleScope::single(style_from_string(label));
  };
  for (std::string_view line : split(raw, '\n')) {
    ++line_no;
    if (trim_view(line).empty()) continue;
    auto fields = split(line, '\t');
    if (line.front() == '#') {
      const std::string_view key = trim_view(fields[0].substr(1));
      if (key == "styleaug_grid" && fields.size() == 2) {
        if (fields[1] != "1") throw ValidationError("unsupported grid file version");
        versioned = true;
      } else if (key == "language" && fields.size() == 2) {
        grid.language = language_from_string(fields[1]);
      } else if (key == "seed" && fields.size() == 2) {
        grid.seed = std::stoull(std::string(fields[1]));
      } else if (key == "config_digest" && fields.size() == 2) {
        grid.config_digest = fields[1] == "-" ? std::string() : std::string(fields[1]);
      } else if (key == "model" && fields.size() == 2) {
        grid.model_id = std::string(fields[1]);
      }
      continue;
    }
    if (!header_seen && fields[0] == "scope") {
      header_seen = true;
      continue;
    }
    if (fields.size() != 8) {
      throw ValidationError("grid file line " + std::to_string(line_no) +
                            ": expected 8 tab-separated fields");
    }
    GridCell cell;
    cell.scope = scope_from_label(fields[0]);
    cell.mode = fields[1] == "none" ? SamplingMode::kUnder : mode_from_string(fields[1]);
    cell.ok = fields[2] == "ok";
    if (cell.ok) {
      cell.report.macro_f1 = std::stod(std::string(fields[3]));
      cell.report.f1_subjective = std::stod(std::string(fields[4]));
      // Macro is the mean of the two per-class scores; recover the other one.
      cell.report.f1_objective = 2.0 * cell.report.macro_f1 - cell.report.f1_subjective;
      cell.report.support_objective = std::stoull(std::string(fields[5]));
      cell.report.support_subjective = std::stoull(std::string(fields[6]));
      cell.report.style_label = fields[0];
      cell.report.mode_label = fields[1];
      cell.report.model_id = cell.scope.kind == StyleScopeKind::kNoStyle ? "-" : grid.model_id;
      cell.report.seed = grid.seed;
      cell.report.config_digest = grid.config_digest;
    } else {
      cell.error = std::string(fields[7]);
    }
    if (grid.rows.empty() || !(grid.rows.back() == cell.scope)) {
      bool known = false;
      for (const auto& row : grid.rows) known = known || row == cell.scope;
      if (!known) grid.rows.push_back(cell.scope);
    }
    grid.cells.push_back(std::move(cell));
  }
  if (!versioned) throw ValidationError("not a styleaug grid file");
  return grid;
}

std::string comparison_marker(double a, double b) {
  if (b - a > kMarkerEpsilon) return "↑";
  if (a - b > kMarkerEpsilon) return "↓";
  return "=";
}

ModelComparison compare_generators(const ReportGrid& grid_a, const ReportGrid& grid_b) {
  if (grid_a.rows.size() != grid_b.rows.size()) {
    throw ValidationError("grids disagree on row structure and cannot be compared");
  }
  for (std::size_t r = 0; r < grid_a.rows.size(); ++r) {
    if (grid_a.rows[r] != grid_b.rows[r]) {
      throw ValidationError("grids disagree on row structure and cannot be compared");
    }
  }

  ModelComparison cmp;
  auto model_of = [](const ReportGrid& g) -> std::string {
    if (!g.model_id.empty() && g.model_id != "-") return g.model_id;
    for (const auto& c : g.cells) {
      if (c.scope.kind != StyleScopeKind::kNoStyle && c.ok) return c.report.model_id;
    }
    return "-";
  };
  cmp.model_a = model_of(grid_a);
  cmp.model_b = model_of(grid_b);
  cmp.seed_a = grid_a.seed;
  cmp.seed_b = grid_b.seed;
  cmp.config_a = grid_a.config_digest;
  cmp.config_b = grid_b.config_digest;

  auto add_cell = [&cmp](const std::string& label, std::string_view mode_label,
                         const GridCell* a, const GridCell* b) {
    ComparisonCell cell;
    cell.row_label = label;
    cell.mode_label = std::string(mode_label);
    if (a != nullptr && b != nullptr && a->ok && b->ok) {
      cell.ok = true;
      cell.value_a = a->report.macro_f1;
      cell.value_b = b->report.macro_f1;
      cell.marker = comparison_marker(cell.value_a, cell.value_b);
    }
    cmp.cells.push_back(std::move(cell));
  };

  for (const auto& scope : grid_a.rows) {
    if (scope.kind == StyleScopeKind::kNoStyle) {
      add_cell(scope.label(), "none", grid_a.cell(scope, SamplingMode::kUnder),
               grid_b.cell(scope, SamplingMode::kUnder));
      continue;
    }
    for (SamplingMode mode : {SamplingMode::kUnder, SamplingMode::kOver}) {
      add_cell(scope.label(), mode_name(mode), grid_a.cell(scope, mode),
               grid_b.cell(scope, mode));
    }
  }
  return cmp;
}

std::string render_comparison_text(const ModelComparison& comparison) {
  std::string out;
  out += "generator comparison: A = " + comparison.model_a + ", B = " + comparison.model_b + "\n";
  out += "seeds: A " + std::to_string(comparison.seed_a) + ", B " +
         std::to_string(comparison.seed_b) + "\n";
  out += "configs: A " + (comparison.config_a.empty() ? "-" : comparison.config_a) + ", B " +
         (comparison.config_b.empty() ? "-" : comparison.config_b) + "\n\n";
  char line[160];
  std::snprintf(line, sizeof(line), "%-12s %-6s %10s %10s  %s\n", "style", "mode", "A", "B", "B vs A");
  out += line;
  for (const auto& c : comparison.cells) {
    if (c.ok) {
      std::snprintf(line, sizeof(line), "%-12s %-6s %10s %10s  %s\n", c.row_label.c_str(),
                    c.mode_label.c_str(), f1_str(c.value_a).c_str(), f1_str(c.value_b).c_str(),
                    c.marker.c_str());
    } else {
      std::snprintf(line, sizeof(line), "%-12s %-6s %10s %10s  %s\n", c.row_label.c_str(),
                    c.mode_label.c_str(), "-", "-", "?");
    }
    out += line;
  }
  out += "\nmarkers: ↑ B improves on A, ↓ B regresses, = equal\n";
  return out;
}

std::string render_comparison_tsv(const ModelComparison& comparison) {
  std::string out;
  out += "# styleaug_comparison\t1\n";
  out += "# model_a\t" + comparison.model_a + "\n";
  out += "# model_b\t" + comparison.model_b + "\n";
  out += "# seed_a\t" + std::to_string(comparison.seed_a) + "\n";
  out += "# seed_b\t" + std::to_string(comparison.seed_b) + "\n";
  out += "# config_a\t" + (comparison.config_a.empty() ? "-" : comparison.config_a) + "\n";
  out += "# config_b\t" + (comparison.config_b.empty() ? "-" : comparison.config_b) + "\n";
  out += "scope\tmode\tstatus\tf1_a\tf1_b\tmarker\n";
  for (const auto& c : comparison.cells) {
    out += c.row_label + "\t" + c.mode_label + "\t";
    if (c.ok) {
      out += "ok\t" + f1_str(c.value_a) + "\t" + f1_str(c.value_b) + "\t" + c.marker;
    } else {
      out += "failed\t-\t-\t?";
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace styleaug
