#include "styleaug/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>

#include <json.hpp>

#include "styleaug/annotator.hpp"
#include "styleaug/config.hpp"
#include "styleaug/digest.hpp"
#include "styleaug/errors.hpp"
#include "styleaug/evaluator.hpp"
#include "styleaug/text.hpp"

namespace styleaug {

namespace {

using nlohmann::json;

struct GlobalArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::optional<std::string> style;
  std::optional<std::string> backend;
  std::optional<std::string> out;
  std::optional<std::string> catalog;
  bool allow_partial = false;
  bool explain = false;
};

PipelineConfig resolve_config(const GlobalArgs& g) {
  if (g.config_path.empty()) throw ConfigError("--config FILE is required");
  PipelineConfig c = PipelineConfig::load(g.config_path);
  if (g.seed) {
    c.seed = *g.seed;
    c.seed_set = true;
    c.classifier.train.seed = *g.seed;
  }
  if (g.mode) c.mode = mode_from_string(*g.mode);
  if (g.backend) {
    if (*g.backend != "mock" && *g.backend != "remote") {
      throw ConfigError("--backend must be 'mock' or 'remote'");
    }
    c.backend.kind = *g.backend;
  }
  if (g.out) c.out_dir = *g.out;
  if (g.catalog) c.catalog_path = *g.catalog;
  if (g.allow_partial) c.allow_partial = true;
  c.validate();
  return c;
}

std::unique_ptr<GeneratorBackend> make_backend(const PipelineConfig& c) {
  if (c.backend.kind == "mock") return std::make_unique<MockBackend>();
  const char* key = std::getenv(c.backend.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw ConfigError("remote backend: credential environment variable '" + c.backend.api_key_env +
                      "' is not set");
  }
  RemoteOptions opt;
  opt.base_url = c.backend.endpoint;
  opt.path = c.backend.path;
  opt.api_key = key;
  opt.timeout = std::chrono::milliseconds(c.backend.timeout_ms);
  opt.retry.max_attempts = c.backend.retry_max_attempts;
  opt.retry.base_delay = std::chrono::milliseconds(c.backend.retry_base_delay_ms);
  return std::make_unique<RemoteChatBackend>(std::move(opt));
}

ExecuteOptions make_execute_options(const PipelineConfig& c) {
  ExecuteOptions opts;
  opts.model_id = c.backend.model_id;
  opts.decoding = c.backend.decoding;
  opts.concurrency = c.backend.concurrency;
  opts.rate_limit_rpm = c.backend.rate_limit_rpm;
  return opts;
}

Dataset load_required(const std::filesystem::path& path, Language lang, Split split,
                      const char* what) {
  if (path.empty()) {
    throw ConfigError(std::string("config does not provide a ") + what + " dataset path");
  }
  return load_tsv(path, lang, split);
}

std::string plan_stem(const SamplingPlan& plan) {
  std::string scope = plan.all_styles
                          ? "all_styles"
                          : std::string(style_name(plan.entries.front().style));
  return "plan_" + std::string(mode_name(plan.mode)) + "_" + scope;
}

void check_plan_freshness(const SamplingPlan& plan, const std::filesystem::path& train_path) {
  if (plan.dataset_digest.empty()) return;
  const std::string actual = sha256_file_hex(train_path);
  if (actual != plan.dataset_digest) {
    throw ValidationError("stale upstream: the plan was built against a different training file "
                          "(digest mismatch); re-run the plan step");
  }
}

int do_analyze(const PipelineConfig& c, std::ostream& out) {
  struct Row {
    Split split;
    const std::filesystem::path* path;
    const char* title;
  };
  const Row rows[] = {{Split::kTrain, &c.train_path, "Train"},
                      {Split::kDev, &c.dev_path, "Dev"},
                      {Split::kTest, &c.test_path, "Test"}};
  bool any = false;
  for (const auto& row : rows) {
    if (row.path->empty()) continue;
    any = true;
    const Dataset ds = load_tsv(*row.path, c.language, row.split);
    const ClassStats st = stats(ds);
    out << row.title << ": " << st.objective_count << " OBJ / " << st.subjective_count
        << " SUBJ, delta " << st.delta();
    if (st.delta() == 0) {
      out << ", no augmentation needed";
    } else {
      out << ", majority " << label_to_string(*st.majority());
    }
    out << "\n";
    const std::string split_key{split_name(row.split)};
    auto expected = c.expected_deltas.find(split_key);
    if (expected != c.expected_deltas.end() &&
        expected->second != static_cast<std::int64_t>(st.delta())) {
      out << "warning: " << row.title << " delta " << st.delta() << " does not match expected "
          << expected->second << "; computed values always win\n";
    }
  }
  if (!any) throw ConfigError("config provides no dataset paths to analyze");
  return 0;
}

int do_plan(const PipelineConfig& c, const GlobalArgs& g, std::ostream& out) {
  const Dataset train = load_required(c.train_path, c.language, Split::kTrain, "train");
  SamplingPlan plan;
  if (g.style) {
    plan = build_plan(train, {style_from_string(*g.style)}, c.mode, c.seed);
  } else {
    plan = build_all_styles_plan(train, c.mode, c.seed);
  }
  plan.dataset_digest = sha256_file_hex(c.train_path);
  plan.config_digest = c.digest();
  const auto path = c.out_dir / (plan_stem(plan) + ".txt");
  save_plan(plan, path);
  out << "plan written: " << path.string() << " (" << plan.total_selected() << " selections, mode "
      << mode_name(plan.mode) << ")\n";
  return 0;
}

int do_generate(const PipelineConfig& c, const std::filesystem::path& plan_path,
                std::ostream& out) {
  const SamplingPlan plan = load_plan(plan_path);
  const Dataset train = load_required(c.train_path, c.language, Split::kTrain, "train");
  check_plan_freshness(plan, c.train_path);

  auto backend = make_backend(c);
  GenerationCache cache(c.resolved_cache_path());
  const RunReport report = execute_plan(plan, train, c.catalog(), *backend, cache,
                                        make_execute_options(c));

  json failures = json::array();
  for (const auto& f : report.failures) {
    failures.push_back({{"style", style_name(f.style)},
                        {"source_id", f.source_id},
                        {"kind", f.kind == FailureKind::kTransient ? "transient" : "permanent"},
                        {"message", f.message},
                        {"attempts", f.attempts}});
  }
  const json report_json{{"plan_digest", plan_digest(plan)},
                         {"config_digest", c.digest()},
                         {"requested", plan.total_selected()},
                         {"generated", report.records.size()},
                         {"failed", report.failures.size()},
                         {"backend_calls", report.backend_calls},
                         {"cache_hits", report.cache_hits},
                         {"failures", failures}};
  const auto report_path =
      c.out_dir / (plan_path.stem().string() + ".report.json");
  write_file(report_path, report_json.dump(2) + "\n");

  out << "generated " << report.records.size() << "/" << plan.total_selected() << " ("
      << report.cache_hits << " cache hits, " << report.backend_calls << " backend calls); report: "
      << report_path.string() << "\n";
  if (!report.failures.empty()) {
    if (!c.allow_partial) {
      throw ValidationError(std::to_string(report.failures.size()) +
                            " generation(s) failed; see " + report_path.string() +
                            " (or pass --allow-partial)");
    }
    out << "warning: " << report.failures.size() << " generation(s) failed; continuing because "
        << "--allow-partial is set\n";
  }
  return 0;
}

int do_assemble(const PipelineConfig& c, const std::filesystem::path& plan_path, bool no_style,
                std::ostream& out) {
  const Dataset train = load_required(c.train_path, c.language, Split::kTrain, "train");
  AssembledDataset assembled;
  std::string stem;
  if (no_style) {
    assembled = assemble_no_style(train);
    stem = "train_no_style";
  } else {
    if (plan_path.empty()) throw ConfigError("assemble requires --plan FILE (or --no-style)");
    const SamplingPlan plan = load_plan(plan_path);
    check_plan_freshness(plan, c.train_path);
    GenerationCache cache(c.resolved_cache_path());
    AssemblyOptions opts{c.allow_partial, c.normal_under_paraphrase};
    const auto records = cache.all();
    assembled = plan.mode == SamplingMode::kUnder
                    ? assemble_under(train, plan, records, opts)
                    : assemble_over(train, plan, records, opts);
    stem = "train_" + std::string(mode_name(plan.mode)) + "_" + assembled.scope.label();
  }
  if (c.shuffle) shuffle_for_training(assembled, c.seed);
  assembled.manifest.config_digest = c.digest();

  const auto tsv_path = c.out_dir / (stem + ".tsv");
  save_tsv(assembled.data, tsv_path);
  write_file(c.out_dir / (stem + ".manifest.json"), assembled.manifest.to_json_string());
  out << "assembled " << tsv_path.string() << ": " << assembled.manifest.objective_count
      << " OBJ / " << assembled.manifest.subjective_count << " SUBJ (added "
      << assembled.manifest.generated_added << " generated, removed "
      << assembled.manifest.originals_removed << " originals)\n";
  if (!assembled.manifest.verbatim_duplicates.empty()) {
    out << "note: " << assembled.manifest.verbatim_duplicates.size()
        << " generated row(s) duplicate their source verbatim (flagged in the manifest)\n";
  }
  return 0;
}

int do_train(const PipelineConfig& c, const std::filesystem::path& data_path,
             const std::filesystem::path& dev_override, std::ostream& out) {
  if (data_path.empty()) throw ConfigError("train requires --data FILE (an assembled TSV)");
  const Dataset ds = load_tsv(data_path, c.language, Split::kTrain);
  std::vector<std::string> docs;
  std::vector<ClassLabel> labels;
  for (const auto& s : ds.sentences) {
    docs.push_back(s.text);
    labels.push_back(s.label);
  }
  const Vocabulary vocab = fit_vocabulary(docs, c.classifier.min_df, c.classifier.max_tokens);
  const auto features = transform_batch(vocab, docs);

  const std::filesystem::path dev_path = dev_override.empty() ? c.dev_path : dev_override;
  LinearModel model;
  std::size_t selected_epoch = 0;
  double dev_f1 = -1.0;
  if (!dev_path.empty()) {
    const Dataset dev = load_tsv(dev_path, c.language, Split::kDev);
    if (dev.sentences.empty()) {
      throw ValidationError("dev set " + dev_path.string() + " is empty; checkpoint selection needs data");
    }
    std::vector<std::string> dev_docs;
    std::vector<ClassLabel> dev_labels;
    for (const auto& s : dev.sentences) {
      dev_docs.push_back(s.text);
      dev_labels.push_back(s.label);
    }
    const auto dev_features = transform_batch(vocab, dev_docs);
    const auto checkpoints = train_checkpoints(features, labels, vocab.size(), c.classifier.train);
    const std::size_t best = model_select(checkpoints, dev_features, dev_labels);
    model = checkpoints[best];
    selected_epoch = best + 1;
    std::vector<ClassLabel> predicted;
    for (const auto& p : predict_batch(model, dev_features)) predicted.push_back(p.label);
    dev_f1 = macro_f1(dev_labels, predicted);
    out << "selected checkpoint " << selected_epoch << "/" << checkpoints.size()
        << " (dev macro F1 " << dev_f1 << ")\n";
  } else {
    model = train(features, labels, vocab.size(), c.classifier.train);
    selected_epoch = static_cast<std::size_t>(c.classifier.train.epochs);
  }

  const std::string stem = "model_" + data_path.stem().string();
  const auto model_path = c.out_dir / (stem + ".txt");
  save_model(model_path, vocab, model);
  const json manifest{{"data_digest", sha256_file_hex(data_path)},
                      {"dev_digest", dev_path.empty() ? "-" : sha256_file_hex(dev_path)},
                      {"vocab_size", vocab.size()},
                      {"selected_epoch", selected_epoch},
                      {"config_digest", c.digest()}};
  write_file(c.out_dir / (stem + ".manifest.json"), manifest.dump(2) + "\n");
  out << "model written: " << model_path.string() << " (vocabulary " << vocab.size() << ")\n";
  return 0;
}

int do_evaluate(const PipelineConfig& c, const std::filesystem::path& model_path,
                const std::filesystem::path& data_override,
                const std::filesystem::path& manifest_path, std::ostream& out) {
  if (model_path.empty()) throw ConfigError("evaluate requires --model FILE");
  auto [vocab, model] = load_model(model_path);
  const std::filesystem::path data_path = data_override.empty() ? c.test_path : data_override;
  const Dataset ds = load_required(data_path, c.language, Split::kTest, "test");

  Provenance prov;
  prov.seed = c.seed;
  prov.config_digest = c.digest();
  if (!manifest_path.empty()) {
    const AssemblyManifest m = AssemblyManifest::from_json_string(read_file(manifest_path));
    prov.style_label = m.scope_label;
    prov.mode_label = m.mode_label;
    prov.model_id = m.model_id;
  }
  const EvalReport report = evaluate(model, vocab, ds, prov);
  const std::string rendered = render_eval_report(report);
  out << rendered;
  const auto report_path = c.out_dir / ("eval_" + model_path.stem().string() + ".txt");
  write_file(report_path, rendered);
  out << "report written: " << report_path.string() << "\n";
  return 0;
}

int do_grid(const PipelineConfig& c, std::ostream& out) {
  const Dataset train = load_required(c.train_path, c.language, Split::kTrain, "train");
  const Dataset dev = load_required(c.dev_path, c.language, Split::kDev, "dev");
  const Dataset test = load_required(c.test_path, c.language, Split::kTest, "test");

  auto backend = make_backend(c);
  GenerationCache cache(c.resolved_cache_path());

  GridOptions options;
  options.styles = c.styles;
  options.include_all_styles = true;
  options.seed = c.seed;
  options.model_id = c.backend.model_id;
  options.decoding = c.backend.decoding;
  options.classifier = c.classifier.train;
  options.min_df = c.classifier.min_df;
  options.max_tokens = c.classifier.max_tokens;
  options.workers = c.grid_workers;
  options.exec = make_execute_options(c);
  options.assembly = AssemblyOptions{c.allow_partial, c.normal_under_paraphrase};
  options.config_digest = c.digest();
  options.artifact_dir = c.out_dir / "cells";

  const ReportGrid grid = run_grid(train, dev, test, c.catalog(), *backend, cache, options);

  const std::string lang{language_code(c.language)};
  write_file(c.out_dir / ("grid_" + lang + ".tsv"), render_grid_tsv(grid));
  write_file(c.out_dir / ("grid_" + lang + ".txt"), render_grid_text(grid));
  out << render_grid_text(grid);

  std::size_t failed = 0;
  for (const auto& cell : grid.cells) {
    if (!cell.ok) {
      ++failed;
      out << "warning: cell " << cell.scope.label() << "/"
          << (cell.scope.kind == StyleScopeKind::kNoStyle ? "none" : mode_name(cell.mode))
          << " failed: " << cell.error << "\n";
    }
  }
  out << "grid written: " << (c.out_dir / ("grid_" + lang + ".tsv")).string() << " ("
      << grid.cells.size() - failed << "/" << grid.cells.size() << " cells ok)\n";
  return 0;
}

int do_annotate(const PipelineConfig& c, const std::string& annotator_id,
                const std::filesystem::path& aggregate_only, std::istream& in, std::ostream& out,
                std::ostream& err) {
  if (!aggregate_only.empty()) {
    const auto records = load_annotations(aggregate_only);
    out << render_scores(aggregate(records));
    return 0;
  }
  GenerationCache cache(c.resolved_cache_path());
  std::vector<GenerationRecord> records;
  for (auto& r : cache.all()) {
    if (r.language == c.language) records.push_back(std::move(r));
  }
  if (records.empty()) {
    throw ValidationError("generation cache " + c.resolved_cache_path().string() +
                          " holds no records for language " +
                          std::string(language_code(c.language)) + "; run generate first");
  }
  const Dataset train = load_required(c.train_path, c.language, Split::kTrain, "train");
  const auto items = sample_for_review(records, train, c.per_style_review, c.seed, &err);
  std::string file_tag = annotator_id;
  for (auto& ch : file_tag) {
    if (ch == '/' || ch == '\\' || ch == ' ') ch = '_';
  }
  const auto out_path = c.out_dir / ("annotations_" + file_tag + ".jsonl");
  run_session(items, annotator_id, out_path, in, out);
  const auto all = load_annotations(out_path);
  if (!all.empty()) {
    out << "\n" << render_scores(aggregate(all));
  }
  return 0;
}

int do_compare(const PipelineConfig& c, const std::filesystem::path& grid_a,
               const std::filesystem::path& grid_b, std::ostream& out) {
  if (grid_a.empty() || grid_b.empty()) {
    throw ConfigError("compare requires --grid-a FILE and --grid-b FILE (grid TSV outputs)");
  }
  const ReportGrid a = parse_grid_tsv(read_file(grid_a));
  const ReportGrid b = parse_grid_tsv(read_file(grid_b));
  const ModelComparison cmp = compare_generators(a, b);
  const std::string rendered = render_comparison_text(cmp);
  out << rendered;
  const std::string stem = "compare_" + cmp.model_a + "_vs_" + cmp.model_b;
  write_file(c.out_dir / (stem + ".txt"), rendered);
  write_file(c.out_dir / (stem + ".tsv"), render_comparison_tsv(cmp));
  out << "comparison written: " << (c.out_dir / (stem + ".tsv")).string() << "\n";
  return 0;
}

int do_export(const PipelineConfig& c, const std::filesystem::path& data_path, std::ostream& out) {
  if (data_path.empty()) throw ConfigError("export requires --data FILE (an assembled TSV)");
  AssembledDataset assembled;
  assembled.data = load_tsv(data_path, c.language, Split::kTrain);
  std::filesystem::path manifest_path = data_path;
  manifest_path.replace_extension(".manifest.json");
  if (std::filesystem::exists(manifest_path)) {
    assembled.manifest = AssemblyManifest::from_json_string(read_file(manifest_path));
  } else {
    const ClassStats st = stats(assembled.data);
    assembled.manifest.scope_label = "unspecified";
    assembled.manifest.mode_label = "none";
    assembled.manifest.model_id = "-";
    assembled.manifest.objective_count = st.objective_count;
    assembled.manifest.subjective_count = st.subjective_count;
  }
  const auto dir = c.out_dir / ("export_" + data_path.stem().string());
  export_for_finetuning(assembled, dir);
  out << "export written: " << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"style-conditioned sampling for class-imbalanced subjectivity corpora"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  GlobalArgs g;
  app.add_option("--config", g.config_path, "pipeline config file (JSON)");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--mode", g.mode, "sampling mode: under or over");
  app.add_option("--backend", g.backend, "generation backend: mock or remote");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--catalog", g.catalog, "style catalog file (defaults to the built-in catalog)");
  app.add_flag("--allow-partial", g.allow_partial,
               "tolerate failed generations instead of refusing to assemble");
  app.add_flag("--explain", g.explain, "print the resolved config with all defaults and exit");

  auto* cmd_analyze = app.add_subcommand("analyze", "print class statistics per split");
  auto* cmd_plan = app.add_subcommand("plan", "select generation sources per style");
  cmd_plan->add_option("--style", g.style, "plan a single style instead of all styles");
  std::string plan_file;
  auto* cmd_generate = app.add_subcommand("generate", "run the generation backend over a plan");
  cmd_generate->add_option("--plan", plan_file, "plan file from the plan step")->required();
  std::string assemble_plan;
  bool assemble_no_style = false;
  auto* cmd_assemble = app.add_subcommand("assemble", "build a training set from a plan + cache");
  cmd_assemble->add_option("--plan", assemble_plan, "plan file from the plan step");
  cmd_assemble->add_flag("--no-style", assemble_no_style, "wrap the original training set");
  std::string train_data;
  std::string train_dev;
  auto* cmd_train = app.add_subcommand("train", "train the baseline classifier");
  cmd_train->add_option("--data", train_data, "training TSV (assembled or original)");
  cmd_train->add_option("--dev", train_dev, "dev TSV for checkpoint selection");
  std::string eval_model;
  std::string eval_data;
  std::string eval_manifest;
  auto* cmd_evaluate = app.add_subcommand("evaluate", "evaluate a trained model");
  cmd_evaluate->add_option("--model", eval_model, "model file from the train step");
  cmd_evaluate->add_option("--data", eval_data, "evaluation TSV (defaults to the config test set)");
  cmd_evaluate->add_option("--manifest", eval_manifest,
                           "assembled-dataset manifest supplying provenance labels");
  auto* cmd_grid = app.add_subcommand("grid", "run the full style x mode sweep");
  std::string compare_a;
  std::string compare_b;
  auto* cmd_compare = app.add_subcommand("compare", "diff two grid outputs cell by cell");
  cmd_compare->add_option("--grid-a", compare_a, "grid TSV produced with generator A")->required();
  cmd_compare->add_option("--grid-b", compare_b, "grid TSV produced with generator B")->required();
  std::string annotator_id = "anonymous";
  std::string aggregate_only;
  auto* cmd_annotate = app.add_subcommand("annotate", "review generated samples interactively");
  cmd_annotate->add_option("--annotator", annotator_id, "annotator id recorded in each row");
  cmd_annotate->add_option("--aggregate-only", aggregate_only,
                           "skip the session; aggregate an existing annotation file");
  std::string export_data;
  auto* cmd_export = app.add_subcommand("export", "write fine-tuning files for external training");
  cmd_export->add_option("--data", export_data, "assembled TSV to export")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    const PipelineConfig config = resolve_config(g);
    if (g.explain) {
      out << config.resolved_json();
      return 0;
    }
    if (cmd_analyze->parsed()) return do_analyze(config, out);
    if (cmd_plan->parsed()) return do_plan(config, g, out);
    if (cmd_generate->parsed()) return do_generate(config, plan_file, out);
    if (cmd_assemble->parsed()) return do_assemble(config, assemble_plan, assemble_no_style, out);
    if (cmd_train->parsed()) return do_train(config, train_data, train_dev, out);
    if (cmd_evaluate->parsed()) return do_evaluate(config, eval_model, eval_data, eval_manifest, out);
    if (cmd_grid->parsed()) return do_grid(config, out);
    if (cmd_compare->parsed()) return do_compare(config, compare_a, compare_b, out);
    if (cmd_annotate->parsed()) return do_annotate(config, annotator_id, aggregate_only, in, out, err);
    if (cmd_export->parsed()) return do_export(config, export_data, out);
    err << "no subcommand given; see --help\n";
    return 2;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace styleaug
