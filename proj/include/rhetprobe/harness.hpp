#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rhetprobe/corpus.hpp"
#include "rhetprobe/embedding.hpp"
#include "rhetprobe/probe.hpp"
#include "rhetprobe/record.hpp"

namespace rhetprobe {

// A single layer, or the elementwise mean of several.
struct LayerSelection {
  std::vector<int> layers;
  bool average = false;

  static LayerSelection single(int layer) { return {{layer}, false}; }
  static LayerSelection mean_of(std::vector<int> layers) { return {std::move(layers), true}; }

  // "3", "avg[1..12]" for a contiguous ascending run, "avg[1,3,5]" otherwise.
  std::string label() const;
  EmbeddingDoc apply(const EmbeddingDoc& doc) const;
};

// Parses "3", "avg", "avg[1..12]", "avg[1,3,5]". Bare "avg" means 1..12.
LayerSelection parse_layer_selection(std::string_view text);

enum class TargetSpace { Raw, Normalized };

struct RandGuessConfig {
  std::vector<double> sigmas = {0.0, 0.01, 0.1, 1.0};
  TargetSpace space = TargetSpace::Raw;
  std::uint64_t seed = 20201;
};

struct RandGuessResult {
  std::vector<std::pair<double, double>> per_sigma;  // (sigma, difficulty)
  double best = 0.0;
};

// Predicts the train mean plus N(0, sigma^2) noise drawn per eval document.
// Targets are taken as given; the caller picks raw or normalized space.
RandGuessResult rand_guess_difficulty(const std::vector<std::vector<double>>& train_targets,
                                      const std::vector<std::vector<double>>& eval_targets,
                                      const RandGuessConfig& config);

struct ExperimentPlan {
  std::string manifest;
  std::vector<std::string> models;
  std::vector<LayerSelection> layers;
  std::vector<GroupId> groups = {GroupId::All, GroupId::EDU, GroupId::Sig, GroupId::Tree};
  TrainConfig train;
  std::uint64_t seed = 20201;
  std::string relation_map;  // empty = built-in defaults
  MappingMode mapping = MappingMode::Strict;
  RandGuessConfig rand_guess;

  void validate() const;
};

ExperimentPlan load_plan(const std::string& path);
ExperimentPlan plan_from_json(std::string_view text, const std::string& base_dir = {});
// Every field with defaults resolved, for provenance.
std::string plan_to_json(const ExperimentPlan& plan);

// Per-run seed from (master seed, model, selection, group).
std::uint64_t run_seed(std::uint64_t master, std::string_view model, std::string_view selection,
                       std::string_view group);

// Feature corpus plus normalization fitted on its train split.
struct PreparedCorpus {
  Corpus corpus;
  NormStats norm;

  std::vector<std::size_t> train_indices() const;
  // Test documents, or the train documents when the corpus has no test rows.
  std::vector<std::size_t> eval_indices() const;
  std::string eval_split() const;
};

PreparedCorpus prepare_corpus(const ExperimentPlan& plan);
PreparedCorpus prepare_corpus(Corpus corpus);

std::vector<double> group_targets(const CorpusDoc& doc, const NormStats& norm, const FeatureGroup& group,
                                  TargetSpace space);

// Records for every (model, selection, group) in the plan, in plan order.
std::vector<RunRecord> run_plan(const ExperimentPlan& plan, const PreparedCorpus& data);
// Only the single-layer selections of the plan.
std::vector<RunRecord> run_layer_sweep(const ExperimentPlan& plan, const PreparedCorpus& data);
// Only the averaged selections of the plan.
std::vector<RunRecord> run_layer_average(const ExperimentPlan& plan, const PreparedCorpus& data);

struct NamedTable {
  std::string name;
  const WordVectorTable* table;
};

struct RandEmbedConfig {
  bool enabled = true;
  std::size_t width = 300;
  std::uint64_t seed = 20201;
};

// One record per (baseline, group): each word-vector table in order, then RandEmbed.
std::vector<RunRecord> run_non_contextual_baselines(const ExperimentPlan& plan, const PreparedCorpus& data,
                                                    const std::vector<NamedTable>& tables,
                                                    const RandEmbedConfig& rand_embed);

// One RandGuess record per plan group; eval_difficulty is the best sigma.
std::vector<RunRecord> rand_guess_records(const ExperimentPlan& plan, const PreparedCorpus& data);

// Trains and evaluates one probe; failures come back as a record with error set.
RunRecord run_probe(const std::string& model_tag, const std::string& selection, const FeatureGroup& group,
                    const ProbeSet& train, const ProbeSet& eval, TrainConfig config, std::string eval_split);

}  // namespace rhetprobe
