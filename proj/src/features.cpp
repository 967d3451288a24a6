#include <cmath>
#include <sstream>

#include "rhetprobe/error.hpp"
#include "rhetprobe/features.hpp"
#include "rhetprobe/text_io.hpp"

namespace rhetprobe {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

FeatureGroup make_group(GroupId id, std::string_view name, std::size_t first, std::size_t last) {
  FeatureGroup g{id, name, {}};
  for (std::size_t i = first; i < last; ++i) g.indices.push_back(i);
  return g;
}

const std::array<FeatureGroup, 4>& groups() {
  static const std::array<FeatureGroup, 4> table = {
      make_group(GroupId::All, "All", 0, kNumFeatures),
      make_group(GroupId::EDU, "EDU", kEduLenMean, kNumFeatures),
      make_group(GroupId::Sig, "Sig", 0, kNumRelations),
      make_group(GroupId::Tree, "Tree", kDepthMean, kEduLenMean),
  };
  return table;
}

template <typename Score>
MeanVar node_stats(const RstTree& tree, Score score) {
  std::vector<double> values;
  for_each_node(tree, [&](const NodeVisit& v) { values.push_back(static_cast<double>(score(v))); });
  return mean_var(values);
}

}  // namespace

const std::array<std::string, kNumFeatures>& feature_names() {
  static const std::array<std::string, kNumFeatures> names = [] {
    std::array<std::string, kNumFeatures> out;
    for (std::size_t i = 0; i < kNumRelations; ++i) out[i] = std::string(relation_name(static_cast<Relation>(i)));
    out[kDepthMean] = "tree_depth_mean";
    out[kDepthVar] = "tree_depth_var";
    out[kYngveMean] = "tree_Yngve_mean";
    out[kYngveVar] = "tree_Yngve_var";
    out[kEduLenMean] = "edu_len_mean";
    out[kEduLenVar] = "edu_len_var";
    return out;
  }();
  return names;
}

const FeatureGroup& feature_group(GroupId id) { return groups()[static_cast<std::size_t>(id)]; }

const FeatureGroup& feature_group(std::string_view name) {
  const std::string lower = to_lower(name);
  for (const auto& g : groups())
    if (to_lower(g.name) == lower) return g;
  throw PlanError("unknown feature group '" + std::string(name) + "' (expected All, EDU, Sig or Tree)");
}

const std::array<GroupId, 4>& all_group_ids() {
  static const std::array<GroupId, 4> ids = {GroupId::All, GroupId::EDU, GroupId::Sig, GroupId::Tree};
  return ids;
}

std::vector<double> select_group(const FeatureVector& v, const FeatureGroup& group) {
  std::vector<double> out;
  out.reserve(group.m());
  for (std::size_t i : group.indices) out.push_back(v.values[i]);
  return out;
}

MeanVar mean_var(std::span<const double> values) {
  if (values.empty()) return {};
  double sum = 0.0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double x : values) sq += (x - mean) * (x - mean);
  return {mean, sq / static_cast<double>(values.size())};
}

std::array<std::size_t, kNumRelations> sig_features(const RstTree& tree, const RelationMap& map, MappingMode mode,
                                                    std::size_t* dropped) {
  std::array<std::size_t, kNumRelations> counts{};
  std::size_t lost = 0;
  for_each_node(tree, [&](const NodeVisit& v) {
    if (v.node.is_leaf()) return;
    if (auto r = canonical_relation(v.node.relation, map, mode))
      ++counts[static_cast<std::size_t>(*r)];
    else
      ++lost;
  });
  if (dropped) *dropped += lost;
  return counts;
}

// Depth and Yngve statistics run over every node, internal and leaf.
MeanVar depth_stats(const RstTree& tree) {
  return node_stats(tree, [](const NodeVisit& v) { return v.depth; });
}

MeanVar yngve_stats(const RstTree& tree) {
  return node_stats(tree, [](const NodeVisit& v) { return v.yngve; });
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  bool in_token = false;
  for (char c : text) {
    const bool space = is_space(c);
    if (!space && !in_token) ++n;
    in_token = !space;
  }
  return n;
}

std::vector<std::string> whitespace_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

MeanVar edu_stats(const RstTree& tree) {
  std::vector<double> lengths;
  for_each_node(tree, [&](const NodeVisit& v) {
    if (v.node.is_leaf()) lengths.push_back(static_cast<double>(count_tokens(v.node.text)));
  });
  return mean_var(lengths);
}

FeatureVector extract_features(const RstTree& tree, const RelationMap& map, MappingMode mode, std::string doc_id,
                               std::size_t* dropped) {
  FeatureVector fv;
  fv.doc_id = std::move(doc_id);
  const auto sig = sig_features(tree, map, mode, dropped);
  for (std::size_t i = 0; i < kNumRelations; ++i) fv.values[i] = static_cast<double>(sig[i]);
  const auto depth = depth_stats(tree);
  const auto yngve = yngve_stats(tree);
  const auto edu = edu_stats(tree);
  fv.values[kDepthMean] = depth.mean;
  fv.values[kDepthVar] = depth.var;
  fv.values[kYngveMean] = yngve.mean;
  fv.values[kYngveVar] = yngve.var;
  fv.values[kEduLenMean] = edu.mean;
  fv.values[kEduLenVar] = edu.var;
  return fv;
}

NormStats fit_norm(std::span<const FeatureVector> vectors, std::string source_split) {
  if (vectors.empty()) throw EmptyCorpus("cannot fit normalization on an empty corpus");
  NormStats stats;
  stats.source_split = std::move(source_split);
  std::vector<double> column(vectors.size());
  for (std::size_t i = 0; i < kNumFeatures; ++i) {
    for (std::size_t k = 0; k < vectors.size(); ++k) column[k] = vectors[k].values[i];
    const auto mv = mean_var(column);
    const double sd = std::sqrt(mv.var);
    stats.mean[i] = mv.mean;
    stats.scale[i] = sd < kConstantFeatureStd ? 1.0 : sd;
  }
  return stats;
}

FeatureVector apply_norm(const FeatureVector& v, const NormStats& stats) {
  FeatureVector out;
  out.doc_id = v.doc_id;
  for (std::size_t i = 0; i < kNumFeatures; ++i) out.values[i] = (v.values[i] - stats.mean[i]) / stats.scale[i];
  return out;
}

void write_feature_file(const std::string& path, std::span<const FeatureVector> vectors) {
  std::string out = "doc_id";
  for (const auto& name : feature_names()) {
    out += '\t';
    out += name;
  }
  out += '\n';
  for (const auto& v : vectors) {
    out += v.doc_id;
    for (double x : v.values) {
      out += '\t';
      out += format_exact(x);
    }
    out += '\n';
  }
  write_text_file(path, out);
}

std::vector<FeatureVector> read_feature_file(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  std::vector<FeatureVector> out;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) continue;
    if (trim(line).empty()) continue;
    auto fields = split(line, '\t');
    if (fields.size() != kNumFeatures + 1)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected doc_id plus 24 values");
    FeatureVector v;
    v.doc_id = std::string(fields[0]);
    for (std::size_t i = 0; i < kNumFeatures; ++i) v.values[i] = parse_double(fields[i + 1]);
    out.push_back(std::move(v));
  }
  return out;
}

void write_norm_stats(const std::string& path, const NormStats& stats) {
  std::string out = "# source_split=" + stats.source_split + "\nfeature\tmean\tscale\n";
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    out += feature_names()[i] + '\t' + format_exact(stats.mean[i]) + '\t' + format_exact(stats.scale[i]) + '\n';
  write_text_file(path, out);
}

NormStats read_norm_stats(const std::string& path) {
  std::istringstream in(read_text_file(path));
  std::string line;
  NormStats stats;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    std::string_view view = trim(line);
    if (view.starts_with("# source_split=")) {
      stats.source_split = std::string(view.substr(15));
      continue;
    }
    if (view.empty() || view.starts_with('#') || view.starts_with("feature\t")) continue;
    auto fields = split(view, '\t');
    if (fields.size() != 3 || row >= kNumFeatures || fields[0] != feature_names()[row])
      throw FormatError(path + ": malformed normalization row");
    stats.mean[row] = parse_double(fields[1]);
    stats.scale[row] = parse_double(fields[2]);
    if (!(stats.scale[row] > 0.0)) throw FormatError(path + ": scale must be positive");
    ++row;
  }
  if (row != kNumFeatures) throw FormatError(path + ": expected 24 normalization rows");
  return stats;
}

}  // namespace rhetprobe
