// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <sstream>

#include "rhetprobe/harness.hpp"
#include "rhetprobe/report.hpp"
#include "synthetic_corpus.hpp"

using namespace rhetprobe;
using namespace testsupport;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Two-point samples at mean +- sd have population stdev exactly sd.
Outcome table_consistency() {
  const auto t0 = Clock::now();
  // Corpus-level (mean, stdev) of the six structural features, in feature order.
  const std::array<std::pair<double, double>, 6> stats = {
      {{3.9, 1.4}, {4.6, 4.2}, {9.2, 8.8}, {100.6, 164.6}, {8.6, 1.4}, {21.8, 16.0}}};
  std::vector<std::vector<double>> tree, edu;
  for (int i = 0; i < 1000; ++i) {
    const double sign = i % 2 ? 1.0 : -1.0;
    std::vector<double> row;
    for (auto [mean, sd] : stats) row.push_back(mean + sign * sd);
    tree.push_back({row.begin(), row.begin() + 4});
    edu.push_back({row.begin() + 4, row.end()});
  }
  RandGuessConfig c;
  c.sigmas = {0.0};
  const double e = rand_guess_difficulty(edu, edu, c).best;
  const double t = rand_guess_difficulty(tree, tree, c).best;
  const double secs = seconds_since(t0);
  const bool exact = std::abs(e - 128.98) < 1e-9 * 128.98 && std::abs(t - 6797.55) < 1e-9 * 6797.55;
  const bool near = std::abs(e - 128.9) / 128.9 < 0.005 && std::abs(t - 6799.0) / 6799.0 < 0.005;
  return {exact && near && secs < 1.0,
          fmt("EDU=%.6f (reference 128.9) Tree=%.6f (reference 6799.0) in %.3fs", e, t, secs)};
}

Outcome mean_guesser_identity() {
  TempDir dir;
  const SyntheticCorpus sc = write_synthetic_corpus(dir.path(), 300, 0, 31);
  PreparedCorpus data = prepare_corpus(load_corpus(read_manifest(sc.manifest), RelationMap::defaults(), MappingMode::Strict));
  // With no test rows, eval is the train split, so mu_train is the eval mean.
  double worst_raw = 0, worst_norm = 0;
  for (GroupId gid : all_group_ids()) {
    const FeatureGroup& g = feature_group(gid);
    std::vector<std::vector<double>> raw, norm;
    for (const auto& d : data.corpus.docs) {
      raw.push_back(group_targets(d, data.norm, g, TargetSpace::Raw));
      norm.push_back(group_targets(d, data.norm, g, TargetSpace::Normalized));
    }
    double want = 0;
    for (std::size_t j = 0; j < g.m(); ++j) {
      std::vector<double> col;
      for (const auto& r : raw) col.push_back(r[j]);
      if (std::sqrt(oracle_pop_var(col)) < kConstantFeatureStd)
        return {false, fmt("feature %zu of %s is constant in the synthetic corpus", j, std::string(g.name).c_str())};
      want += oracle_pop_var(col);
    }
    want /= static_cast<double>(g.m());
    RandGuessConfig c;
    c.sigmas = {0.0};
    worst_raw = std::max(worst_raw, std::abs(rand_guess_difficulty(raw, raw, c).best - want));
    worst_norm = std::max(worst_norm, std::abs(rand_guess_difficulty(norm, norm, c).best - 1.0));
  }
  return {worst_raw < 1e-9 && worst_norm < 1e-9,
          fmt("max |raw - pop var| = %.3g, max |normalized - 1| = %.3g over 4 groups", worst_raw, worst_norm)};
}

double loss_only(const MatrixF& x, std::span<const double> v, const ProbeModel& model) {
  const auto pred = probe_forward(x, model);
  double s = 0;
  for (std::size_t j = 0; j < v.size(); ++j) s += (pred[j] - v[j]) * (pred[j] - v[j]);
  return s / static_cast<double>(v.size());
}

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  Rng rng(41);
  const double h = 1e-5;
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t L = 1 + rng.below(8), D = 1 + rng.below(8);
    const std::size_t d = 1 + rng.below(std::min<std::size_t>(D, 4)), m = 1 + rng.below(5);
    const MatrixF x = random_matrix_f(rng, L, D);
    std::vector<double> v(m);
    for (double& t : v) t = rng.normal();
    ProbeModel model = random_model(rng, D, d, m);
    const LossGrads g = loss_and_grads(x, v, model);
    for (auto [params, analytic] : {std::pair{&model.wd, &g.grad_wd}, std::pair{&model.wp, &g.grad_wp}}) {
      double diff = 0, scale = 0;
      auto flat = params->flat();
      for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = flat[i];
        flat[i] = saved + h;
        const double up = loss_only(x, v, model);
        flat[i] = saved - h;
        const double down = loss_only(x, v, model);
        flat[i] = saved;
        const double numeric = (up - down) / (2 * h);
        const double a = analytic->flat()[i];
        diff += (a - numeric) * (a - numeric);
        scale = std::max({scale, a * a, numeric * numeric});
      }
      if (scale > 0) worst = std::max(worst, std::sqrt(diff / scale));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-4 && secs < 10.0, fmt("worst relative error %.3g over 100 instances in %.3fs", worst, secs)};
}

Outcome parameter_count() {
  const std::size_t n = ProbeModel::zeros(768, 10, 24).parameter_count();
  return {n == 10080 && n == 7680 + 100 * 24, fmt("%zu parameters", n)};
}

Outcome planted_recovery() {
  const auto t0 = Clock::now();
  const TrainConfig config;
  const std::size_t n = 200, L = 20, D = 32, d = config.probe_dim, m = 6;
  Rng rng(51);
  ProbeModel hidden = ProbeModel::gaussian(D, d, m, rng.next_u64());
  std::vector<MatrixF> inputs;
  for (std::size_t i = 0; i < 2 * n; ++i) inputs.push_back(random_matrix_f(rng, L, D));
  // Rescale the readout so clean targets have unit RMS, like normalized features.
  double sq = 0;
  for (const auto& x : inputs)
    for (double t : probe_forward(x, hidden)) sq += t * t;
  const double rms = std::sqrt(sq / static_cast<double>(2 * n * m));
  for (double& w : hidden.wp.flat()) w /= rms;
  ProbeSet train, eval;
  std::vector<std::vector<double>> clean;
  for (std::size_t i = 0; i < 2 * n; ++i) {
    MatrixF x = std::move(inputs[i]);
    auto v = probe_forward(x, hidden);
    if (i >= n) clean.push_back(v);
    for (double& t : v) t += 0.01 * rng.normal();
    ProbeSet& s = i < n ? train : eval;
    s.inputs.push_back(std::move(x));
    s.targets.push_back(std::move(v));
  }
  const double floor = difficulty(clean, eval.targets, m);
  const TrainResult r = train_probe(train, config, D, d, m);
  const double got = eval_probe(r.model, eval);
  const double secs = seconds_since(t0);
  return {got <= 1.5 * floor && r.record.epochs_run <= 40 && secs < 60.0,
          fmt("eval %.4g vs noise floor %.4g (%.3gx) after %d epochs (%s) in %.2fs", got, floor, got / floor,
              r.record.epochs_run, std::string(stop_reason_name(r.record.stop_reason)).c_str(), secs)};
}

Outcome stopping_rules() {
  const TrainConfig c;
  auto first_stop = [&](const std::vector<double>& traj) {
    for (std::size_t t = 1; t <= traj.size(); ++t)
      if (auto s = check_stop(std::span(traj.data(), t), c)) return std::pair{static_cast<int>(t), *s};
    return std::pair{0, StopReason::None};
  };
  std::vector<double> falling;
  for (int t = 0; t < 60; ++t) falling.push_back(10.0 - 0.1 * t);
  const auto stall = first_stop({2.0, 1.0, 0.8, 0.7995});
  const auto rise = first_stop({2.0, 1.0, 0.8, 0.89});
  const auto max = first_stop(falling);
  bool ok = stall == std::pair{4, StopReason::Stall} && rise == std::pair{4, StopReason::Rise} &&
            max == std::pair{40, StopReason::MaxEpochs};

  // The same rules through train_probe: a fixed point stalls at epoch 2.
  Rng rng(61);
  ProbeSet set;
  for (int i = 0; i < 8; ++i) {
    set.inputs.push_back(random_matrix_f(rng, 4, 12));
    set.targets.push_back(std::vector<double>(2, 0.0));
  }
  ProbeModel init = ProbeModel::gaussian(12, 10, 2, 1);
  init.wp.fill(0.0);
  const TrainResult fixed = train_probe(set, c, init);
  ok = ok && fixed.record.stop_reason == StopReason::Stall && fixed.record.epochs_run == 2;
  return {ok, fmt("stall at %d, rise at %d, max_epochs at %d, fixed point stops %s at %d", stall.first, rise.first,
                  max.first, std::string(stop_reason_name(fixed.record.stop_reason)).c_str(),
                  fixed.record.epochs_run)};
}

Outcome sample_tree_oracle() {
  const RstTree tree = parse_rst_tree(kSampleTree);
  const FeatureVector f = extract_features(tree, RelationMap::defaults());
  auto close = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  bool ok = true;
  for (std::size_t k = 0; k < kNumRelations; ++k) {
    const auto r = static_cast<Relation>(k);
    const double want = r == Relation::Contrast || r == Relation::Attribution ? 1.0 : 0.0;
    ok = ok && f.values[k] == want;
  }
  ok = ok && close(f.values[kDepthMean], 6.0 / 5) && close(f.values[kDepthVar], 14.0 / 25) &&
       close(f.values[kYngveMean], 4.0 / 5) && close(f.values[kYngveVar], 14.0 / 25) &&
       f.values[kEduLenMean] == 4.0 && close(f.values[kEduLenVar], 2.0 / 3);
  return {ok, fmt("depth (%.17g, %.17g) Yngve (%.17g, %.17g) EDU (%.17g, %.17g)", f.values[kDepthMean],
                  f.values[kDepthVar], f.values[kYngveMean], f.values[kYngveVar], f.values[kEduLenMean],
                  f.values[kEduLenVar])};
}

Outcome order_invariance() {
  Rng rng(71);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t L = 1 + rng.below(16), D = 1 + rng.below(16);
    const std::size_t d = 1 + rng.below(std::min<std::size_t>(D, 10)), m = 1 + rng.below(24);
    const MatrixF x = random_matrix_f(rng, L, D);
    const ProbeModel model = random_model(rng, D, d, m);
    std::vector<std::size_t> perm(L);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    MatrixF px(L, D);
    for (std::size_t i = 0; i < L; ++i) std::copy_n(x.row(perm[i]).begin(), D, px.row(i).begin());
    const auto a = probe_forward(x, model), b = probe_forward(px, model);
    for (std::size_t j = 0; j < m; ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
  }
  return {worst < 1e-12, fmt("max output change %.3g over 100 pairs", worst)};
}

Outcome format_round_trips() {
  Rng rng(81);
  int rst_ok = 0, emb_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const RstTree tree = random_tree(rng, 5, 4, true);
    const std::string text = serialize_rst_tree(tree);
    const RstTree back = parse_rst_tree(text);
    rst_ok += back.root() == tree.root() && serialize_rst_tree(back) == text;
  }
  TempDir dir;
  for (int i = 0; i < 1000; ++i) {
    EmbeddingDoc doc;
    doc.doc_id = "doc-" + std::to_string(i);
    doc.flags = static_cast<std::uint16_t>(rng.below(2));
    const std::size_t L = 1 + rng.below(64), D = 1 + rng.below(32), layers = 1 + rng.below(4);
    for (std::size_t k = 0; k < layers; ++k) doc.layers.push_back(random_matrix_f(rng, L, D, 10.0));
    const std::string path = dir.file("d.emb");
    write_embedding_doc(doc, path);
    const EmbeddingDoc back = read_embedding_doc(path);
    emb_ok += back == doc && encode_embedding_doc(back) == encode_embedding_doc(doc);
  }
  return {rst_ok == 1000 && emb_ok == 1000, fmt("RST-S %d/1000, EMB1 %d/1000", rst_ok, emb_ok)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(RHETPROBE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
  TempDir dir;
  const SyntheticCorpus sc = write_synthetic_corpus(dir.path() / "corpus", 60, 20, 91);
  write_text_file(dir.file("plan.json"), R"({"manifest": ")" + sc.manifest +
                                             R"(", "models": ["sig"], "layers": [1, 2, "avg[1..2]"], "seed": 7,)"
                                             R"( "train": {"probe_dim": 8, "max_epochs": 10}})");
  for (const char* out : {"a", "b"})
    if (run_cli("probe --plan " + dir.file("plan.json") + " --out " + dir.file(out)) != 0)
      return {false, "probe command failed"};
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir.path() / "a")) {
    const std::string name = e.path().filename().string();
    const fs::path twin = dir.path() / "b" / name;
    if (!fs::exists(twin) || read_text_file(e.path().string()) != read_text_file(twin.string()))
      return {false, name + " differs between runs"};
    ++files;
  }
  const auto records = records_from_jsonl(read_text_file(dir.file("a/records.jsonl")));
  return {records.size() == 12 && files >= 4, fmt("%zu files byte-identical, %zu records", files, records.size())};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"stdevs-to-randguess", table_consistency},
      {"mean-guesser-identity", mean_guesser_identity},
      {"gradient-oracle", gradient_oracle},
      {"parameter-count", parameter_count},
      {"planted-recovery", planted_recovery},
      {"stopping-rules", stopping_rules},
      {"sample-tree-oracle", sample_tree_oracle},
      {"gram-pooling-order-invariance", order_invariance},
      {"format-round-trips", format_round_trips},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%s] %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
