#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "rhetprobe/record.hpp"
#include "synthetic_corpus.hpp"

using namespace rhetprobe;
using namespace testsupport;

namespace {

int run_cli(const std::string& args, const TempDir& dir) {
  const std::string cmd = std::string(RHETPROBE_CLI_PATH) + " " + args + " >" + dir.file("stdout.txt") + " 2>" +
                          dir.file("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t line_count(const std::string& path) {
  const std::string text = read_text_file(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::string write_plan(const TempDir& dir, const std::string& manifest, const std::string& layers,
                       const std::string& groups, int epochs = 3) {
  const std::string path = dir.file("plan.json");
  write_text_file(path, R"({"manifest": ")" + manifest + R"(", "models": ["sig"], "layers": )" + layers +
                            R"(, "groups": )" + groups + R"(, "train": {"max_epochs": )" + std::to_string(epochs) +
                            R"(, "probe_dim": 8, "learning_rate": 0.01}})");
  return path;
}

}  // namespace

TEST_CASE("cli: features with one malformed document") {
  TempDir dir;
  write_text_file(dir.file("a.rsts"), std::string(kSampleTree) + "\n");
  write_text_file(dir.file("b.rsts"), "(Joint[NN] [one two] [three])\n");
  write_text_file(dir.file("c.rsts"), "[just one unit]\n");
  write_text_file(dir.file("bad.rsts"), "(Joint[NN] [one two]\n");
  write_text_file(dir.file("manifest.tsv"),
                  "doc_id\trsts_path\temb_path\tsplit\n"
                  "a\ta.rsts\t-\ttrain\nb\tb.rsts\t-\ttrain\nc\tc.rsts\t-\ttest\nbad\tbad.rsts\t-\ttrain\n");
  CHECK(run_cli("features --manifest " + dir.file("manifest.tsv") + " --out " + dir.file("out"), dir) == 0);
  CHECK(line_count(dir.file("out/features_raw.tsv")) == 4);
  CHECK(line_count(dir.file("out/features_norm.tsv")) == 4);
  CHECK(line_count(dir.file("out/norm_stats.tsv")) == 26);
  CHECK(line_count(dir.file("out/rejects.tsv")) == 2);
  CHECK(read_text_file(dir.file("out/rejects.tsv")).find("bad\t") != std::string::npos);
  const auto raw = read_feature_file(dir.file("out/features_raw.tsv"));
  REQUIRE(raw.size() == 3);
  CHECK(raw[0].doc_id == "a");
  CHECK(raw[0].values[static_cast<std::size_t>(Relation::Contrast)] == 1.0);
  CHECK(read_norm_stats(dir.file("out/norm_stats.tsv")).source_split == "train");

  CHECK(run_cli("features --manifest " + dir.file("manifest.tsv") + " --out " + dir.file("out2") +
                    " --reject-threshold 0.1",
                dir) == 2);
  CHECK(read_text_file(dir.file("stderr.txt")).find("threshold") != std::string::npos);
}

TEST_CASE("cli: relation mapping modes") {
  TempDir dir;
  write_text_file(dir.file("a.rsts"), "(Mystery[NS] [one] (Joint[NN] [two] [three]))\n");
  write_text_file(dir.file("b.rsts"), "(Joint[NN] [one] [two])\n");
  write_text_file(dir.file("m.tsv"), "a\ta.rsts\t-\ttrain\nb\tb.rsts\t-\ttrain\n");
  CHECK(run_cli("features --manifest " + dir.file("m.tsv") + " --out " + dir.file("strict"), dir) == 0);
  CHECK(line_count(dir.file("strict/rejects.tsv")) == 2);
  CHECK(run_cli("features --lenient --manifest " + dir.file("m.tsv") + " --out " + dir.file("lenient"), dir) == 0);
  CHECK(line_count(dir.file("lenient/rejects.tsv")) == 1);
  CHECK(read_text_file(dir.file("stderr.txt")).find("dropped 1") != std::string::npos);

  write_text_file(dir.file("map.tsv"), "# aliases\nmystery\tCause\n");
  CHECK(run_cli("features --relation-map " + dir.file("map.tsv") + " --manifest " + dir.file("m.tsv") + " --out " +
                    dir.file("mapped"),
                dir) == 0);
  const auto raw = read_feature_file(dir.file("mapped/features_raw.tsv"));
  REQUIRE(raw.size() == 2);
  CHECK(raw[0].values[static_cast<std::size_t>(Relation::Cause)] == 1.0);
}

TEST_CASE("cli: usage and plan errors exit 1") {
  TempDir dir;
  CHECK(run_cli("", dir) == 1);
  CHECK(run_cli("features --out " + dir.file("o"), dir) == 1);
  CHECK(run_cli("frobnicate", dir) == 1);
  write_text_file(dir.file("plan.json"), "{not json");
  CHECK(run_cli("probe --plan " + dir.file("plan.json") + " --out " + dir.file("o"), dir) == 1);
  write_text_file(dir.file("plan.json"), R"({"manifest": "m.tsv", "models": ["x"], "layers": [1], "groups": ["Bogus"]})");
  CHECK(run_cli("probe --plan " + dir.file("plan.json") + " --out " + dir.file("o"), dir) == 1);
  CHECK(run_cli("baseline --out " + dir.file("o"), dir) == 1);
  CHECK(run_cli("features --manifest " + dir.file("missing.tsv") + " --out " + dir.file("o"), dir) == 1);
}

TEST_CASE("cli: probe sweeps, averages and determinism") {
  TempDir dir;
  const SyntheticCorpus sc = write_synthetic_corpus(dir.path() / "corpus", 30, 10, 11);
  const std::string plan = write_plan(dir, sc.manifest, R"([1, 2])", R"(["Tree", "EDU"])");
  REQUIRE(run_cli("probe --plan " + plan + " --out " + dir.file("p1"), dir) == 0);
  const auto records = records_from_jsonl(read_text_file(dir.file("p1/records.jsonl")));
  REQUIRE(records.size() == 4);
  for (const auto& r : records) {
    CHECK_FALSE(r.failed());
    CHECK(r.epochs_run <= 3);
    CHECK(r.eval_split == "test");
  }
  CHECK(line_count(dir.file("p1/report.tsv")) == 5);
  CHECK(line_count(dir.file("p1/plot_sig_Tree.tsv")) == 3);
  CHECK(read_text_file(dir.file("p1/config.json")).find("\"stall_rule\": \"absolute\"") != std::string::npos);

  REQUIRE(run_cli("probe --plan " + plan + " --out " + dir.file("p2"), dir) == 0);
  CHECK(read_text_file(dir.file("p1/records.jsonl")) == read_text_file(dir.file("p2/records.jsonl")));
  CHECK(read_text_file(dir.file("p1/report.tsv")) == read_text_file(dir.file("p2/report.tsv")));

  REQUIRE(run_cli("probe --seed 5 --plan " + plan + " --out " + dir.file("p3"), dir) == 0);
  CHECK(read_text_file(dir.file("p1/records.jsonl")) != read_text_file(dir.file("p3/records.jsonl")));

  REQUIRE(run_cli("probe --plan " + plan + " --layers avg[1..2] --groups Tree --out " + dir.file("avg"), dir) == 0);
  const auto avg = records_from_jsonl(read_text_file(dir.file("avg/records.jsonl")));
  REQUIRE(avg.size() == 1);
  CHECK(avg[0].layer_selection == "avg[1..2]");
  CHECK(avg[0].feature_group == "Tree");
}

TEST_CASE("cli: baselines and report re-emission") {
  TempDir dir;
  const SyntheticCorpus sc = write_synthetic_corpus(dir.path() / "corpus", 30, 10, 12, true);
  REQUIRE(run_cli("baseline --randguess-only --groups Tree --manifest " + sc.manifest + " --out " + dir.file("rg"),
                  dir) == 0);
  CHECK(line_count(dir.file("rg/records.jsonl")) == 1);
  CHECK(line_count(dir.file("rg/summary.tsv")) == 2);
  CHECK(read_text_file(dir.file("rg/summary.tsv")).find("RandGuess\t-\t-\t-\t") != std::string::npos);

  std::string a, b;
  for (std::size_t k = 0; k < kNumRelations; ++k) {
    a += "mk" + std::to_string(k);
    b += "mk" + std::to_string(k);
    for (std::size_t c = 0; c < 20; ++c) {
      a += c == k ? " 1" : " 0";
      b += c == (k + 1) % 20 ? " 2" : " 0";
    }
    a += "\n";
    b += "\n";
  }
  write_text_file(dir.file("a.vec"), a);
  write_text_file(dir.file("b.vec"), "18 20\n" + b);
  const std::string plan = write_plan(dir, sc.manifest, "[]", R"(["All", "EDU", "Sig", "Tree"])");
  REQUIRE(run_cli("baseline --plan " + plan + " --vectors A=" + dir.file("a.vec") + " --vectors B=" +
                      dir.file("b.vec") + " --rand-embed-dim 32 --out " + dir.file("full"),
                  dir) == 0);
  const std::string summary = read_text_file(dir.file("full/summary.tsv"));
  CHECK(line_count(dir.file("full/summary.tsv")) == 5);
  CHECK(summary.find("\nA\t") != std::string::npos);
  CHECK(summary.find("\nB\t") != std::string::npos);
  CHECK(summary.find("\nRandEmbed\t") != std::string::npos);
  CHECK(summary.find("\nRandGuess\t") != std::string::npos);
  CHECK(line_count(dir.file("full/sigma_breakdown.tsv")) >= 5);

  REQUIRE(run_cli("report --records " + dir.file("full/records.jsonl") + " --out " + dir.file("rep"), dir) == 0);
  CHECK(read_text_file(dir.file("rep/summary.tsv")) == summary);
  CHECK(read_text_file(dir.file("rep/sigma_breakdown.tsv")) == read_text_file(dir.file("full/sigma_breakdown.tsv")));
  CHECK(line_count(dir.file("rep/report.tsv")) == 1 + 16);

  REQUIRE(run_cli("baseline --plan " + plan + " --vectors A=" + dir.file("a.vec") + " --vectors B=" +
                      dir.file("b.vec") + " --rand-embed-dim 32 --out " + dir.file("full2"),
                  dir) == 0);
  CHECK(read_text_file(dir.file("full2/records.jsonl")) == read_text_file(dir.file("full/records.jsonl")));

  CHECK(run_cli("baseline --vectors nopath --manifest " + sc.manifest + " --out " + dir.file("x"), dir) == 1);
  CHECK(run_cli("report --records " + dir.file("missing.jsonl") + " --out " + dir.file("x"), dir) == 2);
}
