#include <doctest.h>

#include <cmath>
#include <vector>

#include "styleaug/errors.hpp"
#include "styleaug/evaluator.hpp"
#include "styleaug/metrics.hpp"
#include "styleaug/rng.hpp"
#include "testutil.hpp"

using namespace styleaug;

namespace {

constexpr ClassLabel S = ClassLabel::kSubjective;
constexpr ClassLabel O = ClassLabel::kObjective;

std::vector<ClassLabel> random_labels(SplitMix64& g, std::size_t n) {
  std::vector<ClassLabel> v(n);
  for (auto& l : v) l = g.bounded(2) == 0 ? O : S;
  return v;
}

// Direct-formula oracle written against the confusion matrix, independent of
// the production metric path.
double oracle_f1(const std::vector<ClassLabel>& gold, const std::vector<ClassLabel>& pred,
                 ClassLabel cls) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred[i] == cls && gold[i] == cls) ++tp;
    if (pred[i] == cls && gold[i] != cls) ++fp;
    if (pred[i] != cls && gold[i] == cls) ++fn;
  }
  const double p = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  const double r = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  return (p + r) == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

ReportGrid tiny_grid(const std::vector<double>& style_f1, const std::string& model) {
  // One OVER column across the eight styles; enough structure for comparisons.
  ReportGrid grid;
  grid.language = Language::kEn;
  grid.seed = 1;
  grid.rows.push_back(StyleScope::no_style());
  GridCell base;
  base.scope = StyleScope::no_style();
  base.ok = true;
  base.report.macro_f1 = 0.5;
  grid.cells.push_back(base);
  for (std::size_t i = 0; i < kAllStyles.size(); ++i) {
    grid.rows.push_back(StyleScope::single(kAllStyles[i]));
    for (SamplingMode mode : {SamplingMode::kUnder, SamplingMode::kOver}) {
      GridCell cell;
      cell.scope = StyleScope::single(kAllStyles[i]);
      cell.mode = mode;
      cell.ok = true;
      cell.report.macro_f1 = style_f1[i];
      cell.report.model_id = model;
      cell.report.style_label = cell.scope.label();
      grid.cells.push_back(cell);
    }
  }
  return grid;
}

}  // namespace

TEST_CASE("f1 worked example: gold SSOO vs pred SOOO") {
  const std::vector<ClassLabel> gold{S, S, O, O};
  const std::vector<ClassLabel> pred{S, O, O, O};
  CHECK(std::abs(f1_per_class(gold, pred, S) - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(f1_per_class(gold, pred, O) - 4.0 / 5.0) < 1e-12);
  CHECK(std::abs(macro_f1(gold, pred) - 11.0 / 15.0) < 1e-12);
}

TEST_CASE("f1 degenerate conventions") {
  CHECK(f1_per_class({O, O}, {O, O}, S) == 0.0);  // never gold, never predicted
  CHECK(f1_per_class({S, S}, {S, S}, S) == 1.0);
  CHECK(macro_f1({S, O}, {S, O}) == 1.0);
  CHECK(macro_f1({S, S}, {O, O}) == 0.0);
  CHECK_THROWS_AS(macro_f1({S}, {S, O}), ValidationError);
}

TEST_CASE("f1 equals the direct-formula oracle on random label pairs") {
  SplitMix64 g(8088);
  for (int round = 0; round < 300; ++round) {
    const std::size_t n = 1 + g.bounded(50);
    const auto gold = random_labels(g, n);
    const auto pred = random_labels(g, n);
    CHECK(f1_per_class(gold, pred, S) == oracle_f1(gold, pred, S));
    CHECK(f1_per_class(gold, pred, O) == oracle_f1(gold, pred, O));
    CHECK(macro_f1(gold, pred) == (oracle_f1(gold, pred, S) + oracle_f1(gold, pred, O)) / 2.0);
  }
}

TEST_CASE("relabeling symmetry: swapping classes swaps per-class F1s") {
  SplitMix64 g(8188);
  auto flip = [](std::vector<ClassLabel> v) {
    for (auto& l : v) l = l == S ? O : S;
    return v;
  };
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 1 + g.bounded(40);
    const auto gold = random_labels(g, n);
    const auto pred = random_labels(g, n);
    CHECK(f1_per_class(gold, pred, S) == f1_per_class(flip(gold), flip(pred), O));
    CHECK(macro_f1(gold, pred) == macro_f1(flip(gold), flip(pred)));
    const double m = macro_f1(gold, pred);
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
}

TEST_CASE("macro F1 is 1 exactly when predictions equal gold (both classes present)") {
  SplitMix64 g(8388);
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + g.bounded(30);
    auto gold = random_labels(g, n);
    gold[0] = S;
    gold[1] = O;  // both classes occur
    CHECK(macro_f1(gold, gold) == 1.0);
    auto pred = gold;
    pred[g.bounded(n)] = pred[g.bounded(n)] == S ? O : S;  // perturb one slot
    if (pred != gold) CHECK(macro_f1(gold, pred) < 1.0);
  }
}

TEST_CASE("random predictions on balanced labels land near 0.5") {
  SplitMix64 g(8288);
  std::vector<ClassLabel> gold;
  gold.reserve(10000);
  for (int i = 0; i < 5000; ++i) {
    gold.push_back(S);
    gold.push_back(O);
  }
  const auto pred = random_labels(g, gold.size());
  CHECK(std::abs(macro_f1(gold, pred) - 0.5) < 0.03);
}

TEST_CASE("evaluate: an always-subjective model on a balanced set") {
  const Dataset test = testutil::make_dataset(20, 20, Language::kEn, Split::kTest);
  Vocabulary vocab = fit_vocabulary({"irrelevant"}, 1);
  LinearModel always_subj;
  always_subj.weights.assign(vocab.size(), 0.0);
  always_subj.bias = 10.0;
  Provenance prov;
  prov.style_label = "partisan";
  prov.mode_label = "over";
  prov.model_id = "mock";
  prov.seed = 7;
  const EvalReport report = evaluate(always_subj, vocab, test, prov);
  CHECK(report.f1_objective == 0.0);
  CHECK(std::abs(report.f1_subjective - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(report.macro_f1 - 1.0 / 3.0) < 1e-12);
  CHECK(report.support_objective == 20);
  CHECK(report.support_subjective == 20);
  CHECK(report.style_label == "partisan");
  CHECK(report.mode_label == "over");
  CHECK(report.macro_f1 == (report.f1_subjective + report.f1_objective) / 2.0);

  CHECK_THROWS_AS(evaluate(always_subj, vocab, Dataset{}, prov), ValidationError);
}

TEST_CASE("evaluate: a perfect model scores 1.0") {
  const Dataset test = testutil::make_dataset(10, 10, Language::kEn, Split::kTest);
  std::vector<std::string> docs;
  std::vector<ClassLabel> labels;
  for (const auto& s : test.sentences) {
    docs.push_back(s.text);
    labels.push_back(s.label);
  }
  const Vocabulary vocab = fit_vocabulary(docs, 1);
  TrainOptions opts;
  opts.epochs = 30;
  opts.learning_rate = 0.5;
  const LinearModel model = train(transform_batch(vocab, docs), labels, vocab.size(), opts);
  const EvalReport report = evaluate(model, vocab, test, {});
  CHECK(report.macro_f1 == 1.0);
}

TEST_CASE("comparison markers reproduce the published English column") {
  // (model A, model B) pairs with their expected direction markers.
  const std::vector<std::pair<std::pair<double, double>, std::string>> fixture{
      {{0.79, 0.76}, "↓"}, {{0.47, 0.62}, "↑"}, {{0.77, 0.77}, "="}, {{0.78, 0.74}, "↓"},
      {{0.76, 0.81}, "↑"}, {{0.80, 0.77}, "↓"}, {{0.81, 0.74}, "↓"}, {{0.80, 0.76}, "↓"},
  };
  for (const auto& [values, marker] : fixture) {
    CHECK(comparison_marker(values.first, values.second) == marker);
  }
}

TEST_CASE("compare_generators pairs cells and flags direction") {
  const std::vector<double> a_f1{0.79, 0.47, 0.77, 0.78, 0.76, 0.80, 0.81, 0.80};
  const std::vector<double> b_f1{0.76, 0.62, 0.77, 0.74, 0.81, 0.77, 0.74, 0.76};
  const ReportGrid grid_a = tiny_grid(a_f1, "model-a");
  const ReportGrid grid_b = tiny_grid(b_f1, "model-b");
  const ModelComparison cmp = compare_generators(grid_a, grid_b);
  CHECK(cmp.model_a == "model-a");
  CHECK(cmp.model_b == "model-b");
  const std::vector<std::string> expected{"↓", "↑", "=", "↓", "↑", "↓", "↓", "↓"};
  std::size_t style_index = 0;
  for (const auto& cell : cmp.cells) {
    if (cell.row_label == "no_style") continue;
    if (cell.mode_label == "under") continue;  // both columns carry the same fixture
    CHECK(cell.marker == expected[style_index]);
    ++style_index;
  }
  CHECK(style_index == 8);

  ReportGrid mismatched = grid_a;
  mismatched.rows.pop_back();
  CHECK_THROWS_AS(compare_generators(mismatched, grid_b), ValidationError);
}

TEST_CASE("run_grid: full sweep on a small corpus, deterministic, no-style shared") {
  const Dataset train = testutil::make_dataset(40, 24);
  const Dataset dev = testutil::make_dataset(10, 10, Language::kEn, Split::kDev);
  const Dataset test = testutil::make_dataset(12, 12, Language::kEn, Split::kTest);

  GridOptions options;
  options.seed = 42;
  options.workers = 2;
  MockBackend backend;
  GenerationCache cache;
  const ReportGrid grid =
      run_grid(train, dev, test, StyleCatalog::builtin(), backend, cache, options);

  CHECK(grid.rows.size() == 10);  // no_style + 8 styles + all_styles
  CHECK(grid.cells.size() == 19);
  for (const auto& cell : grid.cells) CHECK(cell.ok);

  // The no-style baseline fills both mode columns with one training run.
  const GridCell* ns_us = grid.cell(StyleScope::no_style(), SamplingMode::kUnder);
  const GridCell* ns_os = grid.cell(StyleScope::no_style(), SamplingMode::kOver);
  REQUIRE(ns_us != nullptr);
  CHECK(ns_us == ns_os);

  MockBackend backend2;
  GenerationCache cache2;
  const ReportGrid again =
      run_grid(train, dev, test, StyleCatalog::builtin(), backend2, cache2, options);
  CHECK(render_grid_tsv(again) == render_grid_tsv(grid));
  CHECK(render_grid_text(again) == render_grid_text(grid));
}

TEST_CASE("run_grid: a dead backend fails styled cells but not the baseline") {
  class DeadBackend : public GeneratorBackend {
   public:
    CompletionResult complete(const GenerationRequest&) override {
      return CompletionResult::failure(FailureKind::kTransient, "no backend", 1);
    }
  };
  const Dataset train = testutil::make_dataset(30, 18);
  const Dataset dev = testutil::make_dataset(8, 8, Language::kEn, Split::kDev);
  const Dataset test = testutil::make_dataset(8, 8, Language::kEn, Split::kTest);
  DeadBackend backend;
  GenerationCache cache;
  GridOptions options;
  options.seed = 1;
  const ReportGrid grid =
      run_grid(train, dev, test, StyleCatalog::builtin(), backend, cache, options);
  for (const auto& cell : grid.cells) {
    // Strict NORMAL under-sampling needs no generations, so it survives a
    // dead backend along with the baseline; everything else fails.
    const bool backend_free =
        cell.scope.kind == StyleScopeKind::kNoStyle ||
        (cell.scope == StyleScope::single(Style::kNormal) && cell.mode == SamplingMode::kUnder);
    if (backend_free) {
      CHECK(cell.ok);
    } else {
      CHECK_FALSE(cell.ok);
      CHECK_FALSE(cell.error.empty());
    }
  }
  const std::string tsv = render_grid_tsv(grid);
  CHECK(tsv.find("no_style\tnone\tok") != std::string::npos);
  CHECK(tsv.find("failed") != std::string::npos);
}

TEST_CASE("grid TSV output parses back and re-renders identically") {
  const Dataset train = testutil::make_dataset(24, 14);
  const Dataset dev = testutil::make_dataset(6, 6, Language::kEn, Split::kDev);
  const Dataset test = testutil::make_dataset(6, 6, Language::kEn, Split::kTest);
  MockBackend backend;
  GenerationCache cache;
  GridOptions options;
  options.seed = 77;
  options.model_id = "mock-a";
  options.config_digest = "abc123";
  const ReportGrid grid =
      run_grid(train, dev, test, StyleCatalog::builtin(), backend, cache, options);
  const std::string tsv = render_grid_tsv(grid);
  const ReportGrid parsed = parse_grid_tsv(tsv);
  CHECK(parsed.language == grid.language);
  CHECK(parsed.seed == grid.seed);
  CHECK(parsed.config_digest == grid.config_digest);
  CHECK(parsed.model_id == "mock-a");
  CHECK(parsed.rows.size() == grid.rows.size());
  CHECK(render_grid_tsv(parsed) == tsv);

  // A parsed grid compares against another parsed grid.
  const ModelComparison cmp = compare_generators(parsed, parsed);
  CHECK(cmp.model_a == "mock-a");
  for (const auto& cell : cmp.cells) {
    if (cell.ok) CHECK(cell.marker == "=");
  }
  CHECK_THROWS_AS(parse_grid_tsv("scope\tmode\n"), ValidationError);
}

TEST_CASE("grid renderings embed provenance and the quota footer") {
  const Dataset train = testutil::make_dataset(12, 8);
  const Dataset dev = testutil::make_dataset(4, 4, Language::kEn, Split::kDev);
  const Dataset test = testutil::make_dataset(4, 4, Language::kEn, Split::kTest);
  MockBackend backend;
  GenerationCache cache;
  GridOptions options;
  options.seed = 5;
  options.config_digest = "cafe0123cafe0123";
  const ReportGrid grid =
      run_grid(train, dev, test, StyleCatalog::builtin(), backend, cache, options);
  const std::string text = render_grid_text(grid);
  CHECK(text.find("seed 5") != std::string::npos);
  CHECK(text.find("cafe0123cafe") != std::string::npos);
  CHECK(text.find("all-styles quota") != std::string::npos);
  const std::string tsv = render_grid_tsv(grid);
  CHECK(tsv.find("# seed\t5") != std::string::npos);
  CHECK(tsv.find("# config_digest\tcafe0123cafe0123") != std::string::npos);
}
