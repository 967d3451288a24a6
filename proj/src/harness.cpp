#include "rhetprobe/harness.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <json.hpp>

#include "rhetprobe/error.hpp"
#include "rhetprobe/rng.hpp"
#include "rhetprobe/text_io.hpp"

namespace rhetprobe {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

int parse_int(std::string_view s) {
  s = trim(s);
  int v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw PlanError("bad layer number '" + std::string(s) + "'");
  return v;
}

std::string_view space_name(TargetSpace s) { return s == TargetSpace::Raw ? "raw" : "normalized"; }

TargetSpace parse_space(std::string_view s) {
  if (s == "raw") return TargetSpace::Raw;
  if (s == "normalized") return TargetSpace::Normalized;
  throw PlanError("target space must be raw or normalized");
}

}  // namespace

std::string LayerSelection::label() const {
  if (!average) return std::to_string(layers.front());
  bool contiguous = layers.size() >= 2;
  for (std::size_t i = 1; i < layers.size(); ++i) contiguous = contiguous && layers[i] == layers[i - 1] + 1;
  if (contiguous) return "avg[" + std::to_string(layers.front()) + ".." + std::to_string(layers.back()) + "]";
  std::string out = "avg[";
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(layers[i]);
  }
  return out + "]";
}

EmbeddingDoc LayerSelection::apply(const EmbeddingDoc& doc) const {
  return average ? average_layers(doc, layers) : select_layer(doc, layers.front());
}

LayerSelection parse_layer_selection(std::string_view text) {
  text = trim(text);
  if (text == "avg") {
    std::vector<int> all(12);
    for (int i = 0; i < 12; ++i) all[i] = i + 1;
    return LayerSelection::mean_of(std::move(all));
  }
  if (text.starts_with("avg[") && text.ends_with("]")) {
    std::string_view body = text.substr(4, text.size() - 5);
    std::vector<int> layers;
    if (auto dots = body.find(".."); dots != std::string_view::npos) {
      const int lo = parse_int(body.substr(0, dots)), hi = parse_int(body.substr(dots + 2));
      if (hi < lo) throw PlanError("empty layer range '" + std::string(text) + "'");
      for (int l = lo; l <= hi; ++l) layers.push_back(l);
    } else {
      for (auto part : split(body, ',')) layers.push_back(parse_int(part));
    }
    if (layers.empty()) throw PlanError("empty layer average");
    return LayerSelection::mean_of(std::move(layers));
  }
  return LayerSelection::single(parse_int(text));
}

RandGuessResult rand_guess_difficulty(const std::vector<std::vector<double>>& train_targets,
                                      const std::vector<std::vector<double>>& eval_targets,
                                      const RandGuessConfig& config) {
  if (train_targets.empty() || eval_targets.empty()) throw EmptyBatch("RandGuess needs train and eval targets");
  if (config.sigmas.empty()) throw PlanError("RandGuess needs at least one sigma");
  const std::size_t m = train_targets.front().size();
  std::vector<double> mu(m, 0.0);
  for (const auto& t : train_targets) {
    if (t.size() != m) throw ShapeError("train targets differ in width");
    for (std::size_t j = 0; j < m; ++j) mu[j] += t[j];
  }
  for (double& x : mu) x /= static_cast<double>(train_targets.size());

  RandGuessResult result;
  for (double sigma : config.sigmas) {
    if (!(sigma >= 0.0)) throw PlanError("RandGuess sigma must be >= 0");
    Rng rng(derive_seed(config.seed, "randguess:" + format_exact(sigma)));
    std::vector<std::vector<double>> guesses;
    guesses.reserve(eval_targets.size());
    for (std::size_t k = 0; k < eval_targets.size(); ++k) {
      std::vector<double> g = mu;
      if (sigma > 0.0)
        for (double& x : g) x += sigma * rng.normal();
      guesses.push_back(std::move(g));
    }
    result.per_sigma.emplace_back(sigma, difficulty(guesses, eval_targets, m));
  }
  result.best = result.per_sigma.front().second;
  for (auto [s, dif] : result.per_sigma) result.best = std::min(result.best, dif);
  return result;
}

void ExperimentPlan::validate() const {
  if (manifest.empty()) throw PlanError("plan names no manifest");
  if (groups.empty()) throw PlanError("plan names no feature groups");
  for (const auto& sel : layers) {
    if (sel.layers.empty()) throw PlanError("empty layer selection");
    for (int l : sel.layers)
      if (l < 0) throw PlanError("layer indices must be >= 0");
  }
  train.validate();
  for (double s : rand_guess.sigmas)
    if (!(s >= 0.0)) throw PlanError("RandGuess sigmas must be >= 0");
  if (rand_guess.sigmas.empty()) throw PlanError("RandGuess sigma list is empty");
}

ExperimentPlan plan_from_json(std::string_view text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw PlanError(std::string("plan is not valid JSON: ") + e.what());
  }
  auto resolve = [&](const std::string& p) {
    if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
    return (fs::path(base_dir) / p).string();
  };
  ExperimentPlan plan;
  try {
    plan.manifest = resolve(j.at("manifest").get<std::string>());
    for (const auto& m : j.value("models", json::array())) plan.models.push_back(m.get<std::string>());
    for (const auto& l : j.value("layers", json::array()))
      plan.layers.push_back(l.is_number_integer() ? LayerSelection::single(l.get<int>())
                                                  : parse_layer_selection(l.get<std::string>()));
    if (j.contains("groups")) {
      plan.groups.clear();
      for (const auto& g : j["groups"]) plan.groups.push_back(feature_group(g.get<std::string>()).id);
    }
    plan.seed = j.value("seed", plan.seed);
    plan.relation_map = resolve(j.value("relation_map", std::string{}));
    const std::string mapping = j.value("mapping", std::string("strict"));
    if (mapping != "strict" && mapping != "lenient") throw PlanError("mapping must be strict or lenient");
    plan.mapping = mapping == "strict" ? MappingMode::Strict : MappingMode::Lenient;
    if (j.contains("train")) {
      const auto& t = j["train"];
      TrainConfig& c = plan.train;
      c.max_epochs = t.value("max_epochs", c.max_epochs);
      c.stall_tol = t.value("stall_tol", c.stall_tol);
      c.rise_factor = t.value("rise_factor", c.rise_factor);
      c.learning_rate = t.value("learning_rate", c.learning_rate);
      c.batch_size = t.value("batch_size", c.batch_size);
      c.probe_dim = t.value("probe_dim", c.probe_dim);
      c.adam_beta1 = t.value("adam_beta1", c.adam_beta1);
      c.adam_beta2 = t.value("adam_beta2", c.adam_beta2);
      c.adam_eps = t.value("adam_eps", c.adam_eps);
    }
    if (j.contains("rand_guess")) {
      const auto& r = j["rand_guess"];
      if (r.contains("sigmas")) plan.rand_guess.sigmas = r["sigmas"].get<std::vector<double>>();
      plan.rand_guess.space = parse_space(r.value("space", std::string("raw")));
    }
  } catch (const json::exception& e) {
    throw PlanError(std::string("bad plan field: ") + e.what());
  }
  plan.train.seed = plan.seed;
  plan.rand_guess.seed = plan.seed;
  plan.validate();
  return plan;
}

ExperimentPlan load_plan(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError& e) {
    throw PlanError(e.what());
  }
  return plan_from_json(text, fs::path(path).parent_path().string());
}

std::string plan_to_json(const ExperimentPlan& plan) {
  json j;
  j["manifest"] = plan.manifest;
  j["models"] = plan.models;
  json layers = json::array();
  for (const auto& l : plan.layers) layers.push_back(l.label());
  j["layers"] = std::move(layers);
  json groups = json::array();
  for (auto g : plan.groups) groups.push_back(std::string(feature_group(g).name));
  j["groups"] = std::move(groups);
  j["seed"] = plan.seed;
  j["relation_map"] = plan.relation_map.empty() ? std::string("<built-in>") : plan.relation_map;
  j["mapping"] = plan.mapping == MappingMode::Strict ? "strict" : "lenient";
  const TrainConfig& c = plan.train;
  j["train"] = {{"max_epochs", c.max_epochs},   {"stall_tol", c.stall_tol},     {"stall_rule", "absolute"},
                {"rise_factor", c.rise_factor}, {"learning_rate", c.learning_rate}, {"batch_size", c.batch_size},
                {"probe_dim", c.probe_dim},     {"adam_beta1", c.adam_beta1},   {"adam_beta2", c.adam_beta2},
                {"adam_eps", c.adam_eps}};
  j["rand_guess"] = {{"sigmas", plan.rand_guess.sigmas}, {"space", std::string(space_name(plan.rand_guess.space))}};
  j["normalization"] = "fit on train split";
  return j.dump(2) + "\n";
}

std::uint64_t run_seed(std::uint64_t master, std::string_view model, std::string_view selection,
                       std::string_view group) {
  std::string key;
  key.append(model).append("|").append(selection).append("|").append(group);
  return derive_seed(master, key);
}

std::vector<std::size_t> PreparedCorpus::train_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i)
    if (corpus.docs[i].row.split == Split::Train) out.push_back(i);
  return out;
}

std::vector<std::size_t> PreparedCorpus::eval_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < corpus.docs.size(); ++i)
    if (corpus.docs[i].row.split == Split::Test) out.push_back(i);
  return out.empty() ? train_indices() : out;
}

std::string PreparedCorpus::eval_split() const { return corpus.count(Split::Test) > 0 ? "test" : "train"; }

PreparedCorpus prepare_corpus(Corpus corpus) {
  if (corpus.count(Split::Train) == 0) throw EmptyCorpus("corpus has no parseable train documents");
  NormStats norm = fit_train_norm(corpus);
  return {std::move(corpus), std::move(norm)};
}

PreparedCorpus prepare_corpus(const ExperimentPlan& plan) {
  const RelationMap map = plan.relation_map.empty() ? RelationMap::defaults() : RelationMap::from_file(plan.relation_map);
  return prepare_corpus(load_corpus(read_manifest(plan.manifest), map, plan.mapping));
}

std::vector<double> group_targets(const CorpusDoc& doc, const NormStats& norm, const FeatureGroup& group,
                                  TargetSpace space) {
  return select_group(space == TargetSpace::Raw ? doc.raw : apply_norm(doc.raw, norm), group);
}

RunRecord run_probe(const std::string& model_tag, const std::string& selection, const FeatureGroup& group,
                    const ProbeSet& train, const ProbeSet& eval, TrainConfig config, std::string eval_split) {
  RunRecord record;
  try {
    if (train.empty()) throw EmptyBatch("no training documents");
    const std::size_t D = train.inputs.front().cols();
    check_probe_dims(D, config.probe_dim, group.m());
    TrainResult result = train_probe(train, config, D, config.probe_dim, group.m());
    record = std::move(result.record);
    record.eval_difficulty = eval_probe(result.model, eval);
  } catch (const std::exception& e) {
    record.error = e.what();
  }
  record.model_tag = model_tag;
  record.layer_selection = selection;
  record.feature_group = std::string(group.name);
  record.eval_split = std::move(eval_split);
  record.target_space = "normalized";
  record.train_docs = train.size();
  record.eval_docs = eval.size();
  return record;
}

namespace {

// Probes every plan group on fixed inputs; eval may alias train.
void probe_groups(const ExperimentPlan& plan, const PreparedCorpus& data, const std::string& model_tag,
                  const std::string& selection, ProbeSet& train, const std::vector<std::size_t>& train_docs,
                  ProbeSet* eval, const std::vector<std::size_t>& eval_docs, std::vector<RunRecord>& out) {
  for (GroupId gid : plan.groups) {
    const FeatureGroup& group = feature_group(gid);
    train.targets.clear();
    for (std::size_t i : train_docs)
      train.targets.push_back(group_targets(data.corpus.docs[i], data.norm, group, TargetSpace::Normalized));
    if (eval) {
      eval->targets.clear();
      for (std::size_t i : eval_docs)
        eval->targets.push_back(group_targets(data.corpus.docs[i], data.norm, group, TargetSpace::Normalized));
    }
    TrainConfig config = plan.train;
    config.seed = run_seed(plan.seed, model_tag, selection, group.name);
    out.push_back(run_probe(model_tag, selection, group, train, eval ? *eval : train, config,
                            eval ? "test" : data.eval_split()));
  }
}

void failed_runs(const ExperimentPlan& plan, const std::string& model_tag, const std::string& selection,
                 const std::string& error, std::vector<RunRecord>& out) {
  for (GroupId gid : plan.groups) {
    RunRecord r;
    r.model_tag = model_tag;
    r.layer_selection = selection;
    r.feature_group = std::string(feature_group(gid).name);
    r.error = error;
    out.push_back(std::move(r));
  }
}

MatrixF load_input(const CorpusDoc& doc, const std::string& model, const LayerSelection& sel) {
  const std::string path = embedding_path(doc.row, model);
  if (!fs::exists(path)) throw MissingEmbedding(doc.row.doc_id, model, path);
  EmbeddingDoc emb = sel.apply(read_embedding_doc(path));
  return std::move(emb.layers.front());
}

std::vector<RunRecord> run_selections(const ExperimentPlan& plan, const PreparedCorpus& data, bool singles,
                                      bool averages) {
  const auto train_docs = data.train_indices();
  const auto test_docs = data.corpus.count(Split::Test) > 0 ? data.eval_indices() : std::vector<std::size_t>{};
  std::vector<RunRecord> out;
  for (const auto& model : plan.models) {
    for (const auto& sel : plan.layers) {
      if ((sel.average && !averages) || (!sel.average && !singles)) continue;
      const std::string label = sel.label();
      ProbeSet train, eval;
      try {
        for (std::size_t i : train_docs) train.inputs.push_back(load_input(data.corpus.docs[i], model, sel));
        for (std::size_t i : test_docs) eval.inputs.push_back(load_input(data.corpus.docs[i], model, sel));
      } catch (const std::exception& e) {
        failed_runs(plan, model, label, e.what(), out);
        continue;
      }
      probe_groups(plan, data, model, label, train, train_docs, test_docs.empty() ? nullptr : &eval, test_docs,
                   out);
    }
  }
  return out;
}

}  // namespace

std::vector<RunRecord> run_plan(const ExperimentPlan& plan, const PreparedCorpus& data) {
  return run_selections(plan, data, true, true);
}

std::vector<RunRecord> run_layer_sweep(const ExperimentPlan& plan, const PreparedCorpus& data) {
  return run_selections(plan, data, true, false);
}

std::vector<RunRecord> run_layer_average(const ExperimentPlan& plan, const PreparedCorpus& data) {
  return run_selections(plan, data, false, true);
}

std::vector<RunRecord> run_non_contextual_baselines(const ExperimentPlan& plan, const PreparedCorpus& data,
                                                    const std::vector<NamedTable>& tables,
                                                    const RandEmbedConfig& random_cfg) {
  // Documents the baselines can embed: 1..512 whitespace tokens.
  std::vector<std::size_t> train_docs, test_docs;
  for (std::size_t i = 0; i < data.corpus.docs.size(); ++i) {
    const auto& doc = data.corpus.docs[i];
    if (doc.tokens.empty() || doc.tokens.size() > kMaxTokens) continue;
    (doc.row.split == Split::Train ? train_docs : test_docs).push_back(i);
  }

  std::vector<RunRecord> out;
  auto run_baseline = [&](const std::string& name, auto&& embed) {
    ProbeSet train, eval;
    for (std::size_t i : train_docs) train.inputs.push_back(embed(data.corpus.docs[i]));
    for (std::size_t i : test_docs) eval.inputs.push_back(embed(data.corpus.docs[i]));
    if (train_docs.empty()) {
      failed_runs(plan, name, "1", "no embeddable training documents", out);
      return;
    }
    probe_groups(plan, data, name, "1", train, train_docs, test_docs.empty() ? nullptr : &eval, test_docs, out);
  };
  for (const auto& t : tables)
    run_baseline(t.name, [&](const CorpusDoc& doc) {
      return std::move(embed_non_contextual(doc.tokens, *t.table, doc.row.doc_id).layers.front());
    });
  if (random_cfg.enabled)
    run_baseline("RandEmbed", [&](const CorpusDoc& doc) {
      return std::move(rand_embed(doc.tokens, random_cfg.width, random_cfg.seed, doc.row.doc_id).layers.front());
    });
  return out;
}

std::vector<RunRecord> rand_guess_records(const ExperimentPlan& plan, const PreparedCorpus& data) {
  const auto train_docs = data.train_indices();
  const auto eval_docs = data.eval_indices();
  std::vector<RunRecord> out;
  for (GroupId gid : plan.groups) {
    const FeatureGroup& group = feature_group(gid);
    std::vector<std::vector<double>> train, eval;
    for (std::size_t i : train_docs)
      train.push_back(group_targets(data.corpus.docs[i], data.norm, group, plan.rand_guess.space));
    for (std::size_t i : eval_docs)
      eval.push_back(group_targets(data.corpus.docs[i], data.norm, group, plan.rand_guess.space));
    RandGuessConfig config = plan.rand_guess;
    config.seed = run_seed(plan.seed, "RandGuess", "-", group.name);
    RunRecord r;
    r.model_tag = "RandGuess";
    r.layer_selection = "-";
    r.feature_group = std::string(group.name);
    r.eval_split = data.eval_split();
    r.target_space = std::string(space_name(plan.rand_guess.space));
    r.train_docs = train.size();
    r.eval_docs = eval.size();
    try {
      const auto res = rand_guess_difficulty(train, eval, config);
      r.sigma_difficulties = res.per_sigma;
      r.eval_difficulty = res.best;
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rhetprobe
