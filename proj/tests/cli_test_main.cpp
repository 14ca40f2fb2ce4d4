// Drives the built binary end to end: exit codes, artifact chains, scripted
// annotation sessions. The binary path arrives via STYLEAUG_BIN.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "styleaug/corpus.hpp"
#include "styleaug/digest.hpp"
#include "testutil.hpp"

using namespace styleaug;

namespace {

struct RunResult {
  int code = -1;
  std::string output;
};

RunResult run(const std::string& command) {
  RunResult result;
  const std::string full = command + " 2>&1";
  FILE* pipe = popen(full.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) {
    result.output.append(buf, got);
  }
  const int status = pclose(pipe);
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string binary() {
  const char* bin = std::getenv("STYLEAUG_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "STYLEAUG_BIN must point at the built binary");
  return bin;
}

// German-shaped corpus plus dev/test splits and a config, all absolute paths.
struct Workspace {
  std::filesystem::path dir;
  std::filesystem::path config;

  explicit Workspace(const std::string& tag, std::size_t n_obj = 492, std::size_t n_subj = 308) {
    dir = testutil::fresh_temp_dir(tag);
    save_tsv(testutil::make_dataset(n_obj, n_subj, Language::kDe, Split::kTrain),
             dir / "train.tsv");
    save_tsv(testutil::make_dataset(20, 20, Language::kDe, Split::kDev), dir / "dev.tsv");
    save_tsv(testutil::make_dataset(25, 25, Language::kDe, Split::kTest), dir / "test.tsv");
    config = dir / "config.json";
    write_file(config, std::string("{\n") +
                           "  \"language\": \"DE\",\n" +
                           "  \"train\": \"" + (dir / "train.tsv").string() + "\",\n" +
                           "  \"dev\": \"" + (dir / "dev.tsv").string() + "\",\n" +
                           "  \"test\": \"" + (dir / "test.tsv").string() + "\",\n" +
                           "  \"seed\": 42,\n" +
                           "  \"mode\": \"over\",\n" +
                           "  \"out\": \"" + (dir / "out").string() + "\"\n" +
                           "}\n");
  }
  ~Workspace() {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }

  std::string cmd(const std::string& rest) const {
    return binary() + " " + rest + " --config " + config.string();
  }
  std::filesystem::path out(const std::string& name) const { return dir / "out" / name; }
};

}  // namespace

TEST_CASE("analyze prints per-split statistics") {
  Workspace ws("analyze");
  const auto r = run(ws.cmd("analyze"));
  CHECK(r.code == 0);
  CHECK(r.output.find("Train: 492 OBJ / 308 SUBJ, delta 184") != std::string::npos);
  CHECK(r.output.find("Dev: 20 OBJ / 20 SUBJ, delta 0, no augmentation needed") !=
        std::string::npos);
}

TEST_CASE("analyze flags expected-delta mismatches but keeps computed values") {
  Workspace ws("analyze_expect");
  std::string cfg = read_file(ws.config);
  cfg.replace(cfg.find("\"seed\": 42,"), 12, "\"seed\": 42, \"expected_deltas\": {\"train\": 54},");
  write_file(ws.config, cfg);
  const auto r = run(ws.cmd("analyze"));
  CHECK(r.code == 0);
  CHECK(r.output.find("delta 184") != std::string::npos);
  CHECK(r.output.find("does not match expected 54") != std::string::npos);
}

TEST_CASE("missing input file exits 2 and names the path") {
  Workspace ws("missing");
  std::filesystem::remove(ws.dir / "train.tsv");
  const auto r = run(ws.cmd("analyze"));
  CHECK(r.code == 2);
  CHECK(r.output.find("train.tsv") != std::string::npos);
}

TEST_CASE("a config without a seed exits 2") {
  Workspace ws("noseed");
  write_file(ws.config, "{\"language\": \"DE\", \"train\": \"" +
                            (ws.dir / "train.tsv").string() + "\"}\n");
  const auto r = run(ws.cmd("analyze"));
  CHECK(r.code == 2);
  CHECK(r.output.find("seed") != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run(binary() + " frobnicate").code == 2);
  CHECK(run(binary() + " analyze --config /nonexistent/config.json").code == 2);
  CHECK(run(binary() + " analyze").code == 2);  // no --config
  CHECK(run(binary() + " --help").code == 0);
}

TEST_CASE("--explain prints the resolved config and runs nothing") {
  Workspace ws("explain");
  const auto r = run(ws.cmd("--explain analyze"));
  CHECK(r.code == 0);
  CHECK(r.output.find("\"config_digest\"") != std::string::npos);
  CHECK(r.output.find("\"catalog_version\": \"1\"") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(ws.out("")));
}

TEST_CASE("plan -> generate -> assemble -> train -> evaluate chain") {
  Workspace ws("chain");
  auto r = run(ws.cmd("plan --style partisan"));
  CHECK(r.code == 0);
  REQUIRE(std::filesystem::exists(ws.out("plan_over_partisan.txt")));

  r = run(ws.cmd("generate --plan " + ws.out("plan_over_partisan.txt").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("generated 184/184") != std::string::npos);
  CHECK(std::filesystem::exists(ws.out("generations.jsonl")));
  CHECK(std::filesystem::exists(ws.out("plan_over_partisan.report.json")));

  r = run(ws.cmd("assemble --plan " + ws.out("plan_over_partisan.txt").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("492 OBJ / 492 SUBJ") != std::string::npos);
  REQUIRE(std::filesystem::exists(ws.out("train_over_partisan.tsv")));
  REQUIRE(std::filesystem::exists(ws.out("train_over_partisan.manifest.json")));

  r = run(ws.cmd("train --data " + ws.out("train_over_partisan.tsv").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("selected checkpoint") != std::string::npos);
  REQUIRE(std::filesystem::exists(ws.out("model_train_over_partisan.txt")));

  r = run(ws.cmd("evaluate --model " + ws.out("model_train_over_partisan.txt").string() +
                 " --manifest " + ws.out("train_over_partisan.manifest.json").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("style: partisan") != std::string::npos);
  CHECK(r.output.find("mode: over") != std::string::npos);
  CHECK(r.output.find("f1_macro:") != std::string::npos);

  r = run(ws.cmd("export --data " + ws.out("train_over_partisan.tsv").string()));
  CHECK(r.code == 0);
  const std::string meta =
      read_file(ws.out("export_train_over_partisan") / "finetune_meta.txt");
  CHECK(meta.find("max_length\t128") != std::string::npos);
  CHECK(meta.find("epochs\t3") != std::string::npos);
  CHECK(meta.find("batch_size\t8") != std::string::npos);
}

TEST_CASE("generate with a stale plan exits 1") {
  Workspace ws("stale");
  REQUIRE(run(ws.cmd("plan --style emotional")).code == 0);
  // Touch the training data after planning.
  auto ds = load_tsv(ws.dir / "train.tsv", Language::kDe, Split::kTrain);
  ds.sentences.pop_back();
  save_tsv(ds, ws.dir / "train.tsv");
  const auto r = run(ws.cmd("generate --plan " + ws.out("plan_over_emotional.txt").string()));
  CHECK(r.code == 1);
  CHECK(r.output.find("stale upstream") != std::string::npos);
}

TEST_CASE("plan with an oversized quota exits 1") {
  Workspace ws("quota", 30, 4);  // delta 26 > subjective pool 4
  const auto r = run(ws.cmd("plan --style normal"));
  CHECK(r.code == 1);
  CHECK(r.output.find("pool") != std::string::npos);
}

TEST_CASE("remote backend without its credential exits 2 before any request") {
  Workspace ws("nocred");
  std::string cfg = read_file(ws.config);
  cfg.replace(cfg.find("\"seed\": 42,"), 12,
              "\"seed\": 42, \"backend\": {\"kind\": \"remote\", \"endpoint\": "
              "\"http://127.0.0.1:1\"},");
  write_file(ws.config, cfg);
  REQUIRE(run(ws.cmd("plan --style emotional")).code == 0);
  const auto r = run("env -u GENERATION_API_KEY " +
                     ws.cmd("generate --plan " + ws.out("plan_over_emotional.txt").string()));
  CHECK(r.code == 2);
  CHECK(r.output.find("GENERATION_API_KEY") != std::string::npos);
}

TEST_CASE("assemble --no-style wraps the originals") {
  Workspace ws("nostyle");
  const auto r = run(ws.cmd("assemble --no-style"));
  CHECK(r.code == 0);
  const auto ds = load_tsv(ws.out("train_no_style.tsv"), Language::kDe, Split::kTrain);
  CHECK(ds.sentences.size() == 800);
}

TEST_CASE("scripted annotation session aggregates Q1 = 0.8") {
  Workspace ws("annotate", 40, 10);  // delta 30 -> 30 partisan records
  REQUIRE(run(ws.cmd("plan --style partisan")).code == 0);
  REQUIRE(run(ws.cmd("generate --plan " + ws.out("plan_over_partisan.txt").string())).code == 0);

  // Ten items; Q1 yes on the first eight, Q2 always yes.
  std::string answers;
  for (int i = 0; i < 10; ++i) answers += (i < 8 ? "y\\ny\\n" : "n\\ny\\n");
  const auto r = run("printf '" + answers + "' | " + ws.cmd("annotate --annotator tester"));
  CHECK(r.code == 0);
  CHECK(r.output.find("10 annotated") != std::string::npos);
  CHECK(r.output.find("0.8") != std::string::npos);
  CHECK(r.output.find("1.0") != std::string::npos);
  CHECK(std::filesystem::exists(ws.out("annotations_tester.jsonl")));

  const auto agg = run(ws.cmd("annotate --aggregate-only " +
                              ws.out("annotations_tester.jsonl").string()));
  CHECK(agg.code == 0);
  CHECK(agg.output.find("0.8") != std::string::npos);
}

TEST_CASE("grid command writes deterministic artifacts") {
  Workspace ws("grid", 60, 36);
  auto r = run(ws.cmd("grid --out " + (ws.dir / "g1").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("cells ok") != std::string::npos);
  REQUIRE(std::filesystem::exists(ws.dir / "g1" / "grid_DE.tsv"));
  REQUIRE(std::filesystem::exists(ws.dir / "g1" / "cells" / "over_partisan.manifest.json"));

  r = run(ws.cmd("grid --out " + (ws.dir / "g2").string()));
  CHECK(r.code == 0);
  CHECK(read_file(ws.dir / "g1" / "grid_DE.tsv") == read_file(ws.dir / "g2" / "grid_DE.tsv"));
  CHECK(read_file(ws.dir / "g1" / "cells" / "over_partisan.plan.txt") ==
        read_file(ws.dir / "g2" / "cells" / "over_partisan.plan.txt"));

  // Re-running into the same directory hits the warm cache and rewrites the
  // same bytes.
  const std::string before = read_file(ws.dir / "g1" / "grid_DE.tsv");
  r = run(ws.cmd("grid --out " + (ws.dir / "g1").string()));
  CHECK(r.code == 0);
  CHECK(read_file(ws.dir / "g1" / "grid_DE.tsv") == before);
}

TEST_CASE("compare diffs two grid files cell by cell") {
  Workspace ws("compare", 40, 24);
  std::string cfg = read_file(ws.config);
  cfg.replace(cfg.find("\"seed\": 42,"), 12,
              "\"seed\": 42, \"backend\": {\"kind\": \"mock\", \"model_id\": \"gen-a\"},");
  write_file(ws.config, cfg);
  REQUIRE(run(ws.cmd("grid --out " + (ws.dir / "ga").string())).code == 0);

  cfg = read_file(ws.config);
  cfg.replace(cfg.find("gen-a"), 5, "gen-b");
  write_file(ws.config, cfg);
  REQUIRE(run(ws.cmd("grid --out " + (ws.dir / "gb").string())).code == 0);

  const auto r = run(ws.cmd("compare --grid-a " + (ws.dir / "ga" / "grid_DE.tsv").string() +
                            " --grid-b " + (ws.dir / "gb" / "grid_DE.tsv").string()));
  CHECK(r.code == 0);
  CHECK(r.output.find("A = gen-a") != std::string::npos);
  CHECK(r.output.find("B = gen-b") != std::string::npos);
  // The mock rewrite is model-independent, so every paired cell ties.
  CHECK(r.output.find("=") != std::string::npos);
  CHECK(std::filesystem::exists(ws.out("compare_gen-a_vs_gen-b.tsv")));
}
