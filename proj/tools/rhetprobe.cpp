// rhetprobe: feature extraction, probing sweeps, baselines and reports.
#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "rhetprobe/corpus.hpp"
#include "rhetprobe/error.hpp"
#include "rhetprobe/harness.hpp"
#include "rhetprobe/report.hpp"
#include "rhetprobe/rng.hpp"
#include "rhetprobe/text_io.hpp"

namespace fs = std::filesystem;
using namespace rhetprobe;
using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20201;
constexpr int kExitPlanError = 1;
constexpr int kExitDataError = 2;

struct CommonFlags {
  std::uint64_t seed = kDefaultSeed;
  bool seed_set = false;
  bool lenient = false;
  bool strict = false;
  std::string relation_map;
  std::string out;
  int verbosity = 0;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--out", f.out, "Output directory")->required();
  cmd->add_option("--seed", f.seed, "Master seed")->each([&f](const std::string&) { f.seed_set = true; });
  cmd->add_option("--relation-map", f.relation_map, "Relation alias file (raw<TAB>canonical)");
  auto* strict = cmd->add_flag("--strict", f.strict, "Unknown relation labels reject the document (default)");
  cmd->add_flag("--lenient", f.lenient, "Unknown relation labels map to the fallback or are dropped")->excludes(strict);
  cmd->add_flag("-v,--verbose", f.verbosity, "More logging");
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw PlanError("cannot create output directory " + dir);
}

std::string out_path(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

RelationMap load_map(const std::string& path) {
  return path.empty() ? RelationMap::defaults() : RelationMap::from_file(path);
}

std::vector<GroupId> parse_groups(const std::vector<std::string>& names) {
  std::vector<GroupId> out;
  for (const auto& n : names)
    for (auto part : split(n, ','))
      if (!trim(part).empty()) out.push_back(feature_group(trim(part)).id);
  return out;
}

int cmd_features(const std::string& manifest, double threshold, const CommonFlags& f) {
  ensure_out_dir(f.out);
  const auto rows = read_manifest(manifest);
  if (rows.empty()) throw PlanError("manifest " + manifest + " lists no documents");
  const MappingMode mode = f.lenient ? MappingMode::Lenient : MappingMode::Strict;
  Corpus corpus = load_corpus(rows, load_map(f.relation_map), mode);
  if (corpus.dropped_relations > 0)
    std::cerr << "warning: dropped " << corpus.dropped_relations << " unmapped relation instances\n";

  std::vector<FeatureVector> raw, norm;
  for (const auto& d : corpus.docs) raw.push_back(d.raw);
  write_feature_file(out_path(f.out, "features_raw.tsv"), raw);

  std::string rejects = "doc_id\tpath\treason\n";
  for (const auto& r : corpus.rejects) rejects += r.doc_id + '\t' + r.path + '\t' + r.reason + '\n';
  write_text_file(out_path(f.out, "rejects.tsv"), rejects);

  json config = {{"command", "features"},
                 {"manifest", manifest},
                 {"relation_map", f.relation_map.empty() ? "<built-in>" : f.relation_map},
                 {"mapping", f.lenient ? "lenient" : "strict"},
                 {"reject_threshold", threshold},
                 {"seed", f.seed},
                 {"documents", rows.size()},
                 {"accepted", corpus.docs.size()},
                 {"rejected", corpus.rejects.size()},
                 {"normalization", "fit on train split"}};
  write_text_file(out_path(f.out, "config.json"), config.dump(2) + "\n");

  if (corpus.count(Split::Train) > 0) {
    const NormStats stats = fit_train_norm(corpus);
    write_norm_stats(out_path(f.out, "norm_stats.tsv"), stats);
    for (const auto& v : raw) norm.push_back(apply_norm(v, stats));
    write_feature_file(out_path(f.out, "features_norm.tsv"), norm);
  } else {
    std::cerr << "error: no parseable train documents; normalization not fitted\n";
    return kExitDataError;
  }

  const double fraction = static_cast<double>(corpus.rejects.size()) / static_cast<double>(rows.size());
  if (f.verbosity > 0 || !corpus.rejects.empty())
    std::cerr << corpus.docs.size() << " documents accepted, " << corpus.rejects.size() << " rejected\n";
  if (fraction > threshold) {
    std::cerr << "error: reject fraction " << fraction << " exceeds threshold " << threshold << "\n";
    return kExitDataError;
  }
  return 0;
}

struct ProbeOverrides {
  std::string manifest;
  std::vector<std::string> groups;
  std::vector<std::string> layers;
};

void apply_common(ExperimentPlan& plan, const CommonFlags& f) {
  if (f.seed_set) {
    plan.seed = f.seed;
    plan.train.seed = f.seed;
    plan.rand_guess.seed = f.seed;
  }
  if (!f.relation_map.empty()) plan.relation_map = f.relation_map;
  if (f.lenient) plan.mapping = MappingMode::Lenient;
  if (f.strict) plan.mapping = MappingMode::Strict;
}

int cmd_probe(const std::string& plan_path, const ProbeOverrides& o, const CommonFlags& f) {
  ExperimentPlan plan = load_plan(plan_path);
  apply_common(plan, f);
  if (!o.manifest.empty()) plan.manifest = o.manifest;
  if (!o.groups.empty()) plan.groups = parse_groups(o.groups);
  if (!o.layers.empty()) {
    plan.layers.clear();
    for (const auto& l : o.layers) plan.layers.push_back(parse_layer_selection(l));
  }
  plan.validate();
  if (plan.models.empty() || plan.layers.empty()) throw PlanError("plan needs at least one model and one layer");
  ensure_out_dir(f.out);
  write_text_file(out_path(f.out, "config.json"), plan_to_json(plan));

  const PreparedCorpus data = prepare_corpus(plan);
  if (!data.corpus.rejects.empty())
    std::cerr << "warning: " << data.corpus.rejects.size() << " documents rejected while loading trees\n";
  const auto records = run_plan(plan, data);
  write_text_file(out_path(f.out, "records.jsonl"), records_to_jsonl(records));
  emit_report(records, f.out);
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed();
  if (failed) std::cerr << "warning: " << failed << " of " << records.size() << " runs failed\n";
  return 0;
}

struct BaselineFlags {
  std::string manifest;
  std::string plan;
  std::vector<std::string> vectors;
  std::size_t rand_embed_dim = 300;
  bool no_rand_embed = false;
  bool randguess_only = false;
  std::vector<double> sigmas;
  std::string space = "raw";
  std::vector<std::string> groups;
};

int cmd_baseline(const BaselineFlags& b, const CommonFlags& f) {
  ExperimentPlan plan;
  if (!b.plan.empty()) plan = load_plan(b.plan);
  if (!b.manifest.empty()) plan.manifest = b.manifest;
  apply_common(plan, f);
  if (!f.seed_set && b.plan.empty()) plan.seed = plan.train.seed = plan.rand_guess.seed = kDefaultSeed;
  if (!b.groups.empty()) plan.groups = parse_groups(b.groups);
  if (!b.sigmas.empty()) plan.rand_guess.sigmas = b.sigmas;
  if (b.space != "raw" && b.space != "normalized") throw PlanError("--space must be raw or normalized");
  plan.rand_guess.space = b.space == "raw" ? TargetSpace::Raw : TargetSpace::Normalized;
  plan.validate();
  ensure_out_dir(f.out);

  std::vector<std::pair<std::string, std::string>> vector_files;
  for (const auto& spec : b.vectors) {
    auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size())
      throw PlanError("--vectors expects NAME=PATH, got '" + spec + "'");
    vector_files.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
  }

  json config = json::parse(plan_to_json(plan));
  config["command"] = "baseline";
  config["vectors"] = b.vectors;
  config["rand_embed"] = {{"enabled", !b.no_rand_embed && !b.randguess_only}, {"width", b.rand_embed_dim}};
  config["randguess_only"] = b.randguess_only;
  write_text_file(out_path(f.out, "config.json"), config.dump(2) + "\n");

  const PreparedCorpus data = prepare_corpus(plan);
  std::vector<RunRecord> records;
  if (!b.randguess_only) {
    std::vector<WordVectorTable> tables;
    tables.reserve(vector_files.size());
    for (const auto& [name, path] : vector_files) {
      tables.push_back(read_word_vectors(path));
      if (tables.back().duplicates_skipped())
        std::cerr << "warning: " << path << ": skipped " << tables.back().duplicates_skipped()
                  << " duplicate tokens\n";
    }
    std::vector<NamedTable> named;
    for (std::size_t i = 0; i < tables.size(); ++i) named.push_back({vector_files[i].first, &tables[i]});
    RandEmbedConfig re{!b.no_rand_embed, b.rand_embed_dim, derive_seed(plan.seed, "RandEmbed")};
    records = run_non_contextual_baselines(plan, data, named, re);
  }
  for (auto& r : rand_guess_records(plan, data)) records.push_back(std::move(r));

  write_text_file(out_path(f.out, "records.jsonl"), records_to_jsonl(records));
  write_text_file(out_path(f.out, "summary.tsv"), render_baseline_summary(records));
  write_text_file(out_path(f.out, "sigma_breakdown.tsv"), render_sigma_breakdown(records));
  return 0;
}

int cmd_report(const std::string& records_path, const std::string& out) {
  ensure_out_dir(out);
  const auto records = records_from_jsonl(read_text_file(records_path));
  if (records.empty()) throw PlanError(records_path + " holds no records");
  emit_report(records, out);
  write_text_file(out_path(out, "summary.tsv"), render_baseline_summary(records));
  write_text_file(out_path(out, "sigma_breakdown.tsv"), render_sigma_breakdown(records));
  json config = {{"command", "report"}, {"records", records_path}};
  write_text_file(out_path(out, "config.json"), config.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rhetorical feature extraction and representation probing"};
  app.require_subcommand(1);

  CommonFlags features_flags, probe_flags, baseline_flags;

  auto* features = app.add_subcommand("features", "Extract raw and normalized RST features");
  std::string features_manifest;
  double reject_threshold = 0.5;
  features->add_option("--manifest", features_manifest, "Manifest TSV")->required();
  features->add_option("--reject-threshold", reject_threshold, "Maximum tolerated reject fraction")
      ->check(CLI::Range(0.0, 1.0));
  add_common(features, features_flags);

  auto* probe = app.add_subcommand("probe", "Run the probing sweep described by a plan");
  std::string plan_path;
  ProbeOverrides overrides;
  probe->add_option("--plan", plan_path, "Plan file (JSON)")->required();
  probe->add_option("--manifest", overrides.manifest, "Override the plan's manifest");
  probe->add_option("--groups", overrides.groups, "Feature groups (All,EDU,Sig,Tree)");
  probe->add_option("--layers", overrides.layers, "Layer selections, e.g. 1 2 avg[1..12]");
  add_common(probe, probe_flags);

  auto* baseline = app.add_subcommand("baseline", "Word-vector, RandEmbed and RandGuess baselines");
  BaselineFlags bflags;
  baseline->add_option("--manifest", bflags.manifest, "Manifest TSV");
  baseline->add_option("--plan", bflags.plan, "Plan supplying training config and groups");
  baseline->add_option("--vectors", bflags.vectors, "Word-vector table as NAME=PATH (repeatable)");
  baseline->add_option("--rand-embed-dim", bflags.rand_embed_dim, "RandEmbed width")->check(CLI::PositiveNumber);
  baseline->add_flag("--no-rand-embed", bflags.no_rand_embed, "Skip the RandEmbed baseline");
  baseline->add_flag("--randguess-only", bflags.randguess_only, "Only score RandGuess");
  baseline->add_option("--sigmas", bflags.sigmas, "RandGuess noise levels")->delimiter(',');
  baseline->add_option("--space", bflags.space, "RandGuess target space: raw or normalized");
  baseline->add_option("--groups", bflags.groups, "Feature groups (All,EDU,Sig,Tree)");
  add_common(baseline, baseline_flags);

  auto* report = app.add_subcommand("report", "Re-emit tables and plot data from stored records");
  std::string records_path, report_out;
  report->add_option("--records", records_path, "records.jsonl")->required();
  report->add_option("--out", report_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitPlanError;
  }

  try {
    if (*features) return cmd_features(features_manifest, reject_threshold, features_flags);
    if (*probe) return cmd_probe(plan_path, overrides, probe_flags);
    if (*baseline) {
      if (bflags.manifest.empty() && bflags.plan.empty()) throw PlanError("baseline needs --manifest or --plan");
      return cmd_baseline(bflags, baseline_flags);
    }
    if (*report) return cmd_report(records_path, report_out);
  } catch (const PlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPlanError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitPlanError;
}
