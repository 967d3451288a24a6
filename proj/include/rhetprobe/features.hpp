#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rhetprobe/rst_tree.hpp"

namespace rhetprobe {

inline constexpr std::size_t kNumRelations = 18;
inline constexpr std::size_t kNumFeatures = 24;

// The grouped relation classes, in feature-vector order.
enum class Relation : std::size_t {
  Attribution,
  Background,
  Cause,
  Comparison,
  Condition,
  Contrast,
  Elaboration,
  Enablement,
  Evaluation,
  Explanation,
  Joint,
  MannerMeans,
  TopicComment,
  Summary,
  Temporal,
  TopicChange,
  TextualOrganization,
  SameUnit,
};

std::string_view relation_name(Relation r);

// Column names of the 24-dimensional feature vector.
const std::array<std::string, kNumFeatures>& feature_names();

inline constexpr std::size_t kDepthMean = 18;
inline constexpr std::size_t kDepthVar = 19;
inline constexpr std::size_t kYngveMean = 20;
inline constexpr std::size_t kYngveVar = 21;
inline constexpr std::size_t kEduLenMean = 22;
inline constexpr std::size_t kEduLenVar = 23;

struct FeatureVector {
  std::string doc_id;
  std::array<double, kNumFeatures> values{};
};

enum class GroupId { All, EDU, Sig, Tree };

struct FeatureGroup {
  GroupId id;
  std::string_view name;
  std::vector<std::size_t> indices;
  std::size_t m() const noexcept { return indices.size(); }
};

const FeatureGroup& feature_group(GroupId id);
// Accepts All / EDU / Sig / Tree (case-insensitive); throws PlanError otherwise.
const FeatureGroup& feature_group(std::string_view name);
const std::array<GroupId, 4>& all_group_ids();

std::vector<double> select_group(const FeatureVector& v, const FeatureGroup& group);

enum class MappingMode { Strict, Lenient };

// Raw parser labels -> grouped relation classes. Lookup is case-insensitive.
class RelationMap {
 public:
  // Canonical names plus the built-in aliases for common parser label sets.
  static RelationMap defaults();
  // Canonical names only, then the aliases listed in the file. A raw label
  // of "*" sets the lenient-mode fallback.
  static RelationMap from_file(const std::string& path);

  void add_alias(std::string_view raw, Relation canonical);
  void set_fallback(std::optional<Relation> fallback) { fallback_ = fallback; }
  std::optional<Relation> fallback() const noexcept { return fallback_; }

  std::optional<Relation> find(std::string_view label) const;
  std::size_t size() const noexcept { return aliases_.size(); }

 private:
  RelationMap();
  std::unordered_map<std::string, Relation> aliases_;
  std::optional<Relation> fallback_;
};

std::optional<Relation> parse_relation_name(std::string_view name);

// Strips a leading nuclearity prefix such as "SN-" and looks the rest up.
// Strict: throws UnknownRelation. Lenient: returns the fallback, or nullopt
// when the map has none (the caller drops the instance).
std::optional<Relation> canonical_relation(std::string_view raw_label, const RelationMap& map,
                                           MappingMode mode = MappingMode::Strict);

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
};

// Population mean and variance; var is 0 for a single value.
MeanVar mean_var(std::span<const double> values);

std::array<std::size_t, kNumRelations> sig_features(const RstTree& tree, const RelationMap& map,
                                                    MappingMode mode = MappingMode::Strict,
                                                    std::size_t* dropped = nullptr);
MeanVar depth_stats(const RstTree& tree);
MeanVar yngve_stats(const RstTree& tree);
MeanVar edu_stats(const RstTree& tree);

std::size_t count_tokens(std::string_view text);
std::vector<std::string> whitespace_tokens(std::string_view text);

FeatureVector extract_features(const RstTree& tree, const RelationMap& map,
                               MappingMode mode = MappingMode::Strict, std::string doc_id = {},
                               std::size_t* dropped = nullptr);

struct NormStats {
  std::array<double, kNumFeatures> mean{};
  std::array<double, kNumFeatures> scale{};
  std::string source_split;
};

inline constexpr double kConstantFeatureStd = 1e-12;

NormStats fit_norm(std::span<const FeatureVector> vectors, std::string source_split = "train");
FeatureVector apply_norm(const FeatureVector& v, const NormStats& stats);

void write_feature_file(const std::string& path, std::span<const FeatureVector> vectors);
std::vector<FeatureVector> read_feature_file(const std::string& path);
void write_norm_stats(const std::string& path, const NormStats& stats);
NormStats read_norm_stats(const std::string& path);

}  // namespace rhetprobe
