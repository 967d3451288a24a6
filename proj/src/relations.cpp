#include <array>
#include <sstream>

#include "rhetprobe/error.hpp"
#include "rhetprobe/features.hpp"
#include "rhetprobe/text_io.hpp"

namespace rhetprobe {

namespace {

constexpr std::array<std::string_view, kNumRelations> kRelationNames = {
    "Attribution", "Background",   "Cause",         "Comparison", "Condition",   "Contrast",
    "Elaboration", "Enablement",   "Evaluation",    "Explanation", "Joint",      "Manner-Means",
    "Topic-Comment", "Summary",    "Temporal",      "Topic-Change", "Textual-organization", "Same-unit",
};

struct Alias {
  std::string_view raw;
  Relation canonical;
};

// RST-DT fine-grained labels and common parser spellings, grouped into the
// 18 classes.
constexpr Alias kBuiltinAliases[] = {
    {"attribution-negative", Relation::Attribution},
    {"circumstance", Relation::Background},
    {"result", Relation::Cause},
    {"consequence", Relation::Cause},
    {"consequence-n", Relation::Cause},
    {"consequence-s", Relation::Cause},
    {"cause-result", Relation::Cause},
    {"preference", Relation::Comparison},
    {"analogy", Relation::Comparison},
    {"proportion", Relation::Comparison},
    {"hypothetical", Relation::Condition},
    {"contingency", Relation::Condition},
    {"otherwise", Relation::Condition},
    {"concession", Relation::Contrast},
    {"antithesis", Relation::Contrast},
    {"elaboration-additional", Relation::Elaboration},
    {"elaboration-general-specific", Relation::Elaboration},
    {"elaboration-part-whole", Relation::Elaboration},
    {"elaboration-process-step", Relation::Elaboration},
    {"elaboration-object-attribute", Relation::Elaboration},
    {"elaboration-set-member", Relation::Elaboration},
    {"example", Relation::Elaboration},
    {"definition", Relation::Elaboration},
    {"purpose", Relation::Enablement},
    {"interpretation", Relation::Evaluation},
    {"conclusion", Relation::Evaluation},
    {"comment", Relation::Evaluation},
    {"evidence", Relation::Explanation},
    {"explanation-argumentative", Relation::Explanation},
    {"reason", Relation::Explanation},
    {"list", Relation::Joint},
    {"disjunction", Relation::Joint},
    {"manner", Relation::MannerMeans},
    {"means", Relation::MannerMeans},
    {"mannermeans", Relation::MannerMeans},
    {"problem-solution", Relation::TopicComment},
    {"question-answer", Relation::TopicComment},
    {"statement-response", Relation::TopicComment},
    {"comment-topic", Relation::TopicComment},
    {"rhetorical-question", Relation::TopicComment},
    {"topiccomment", Relation::TopicComment},
    {"restatement", Relation::Summary},
    {"temporal-before", Relation::Temporal},
    {"temporal-after", Relation::Temporal},
    {"temporal-same-time", Relation::Temporal},
    {"sequence", Relation::Temporal},
    {"inverted-sequence", Relation::Temporal},
    {"topic-shift", Relation::TopicChange},
    {"topic-drift", Relation::TopicChange},
    {"topicchange", Relation::TopicChange},
    {"textualorganization", Relation::TextualOrganization},
    {"textual-organisation", Relation::TextualOrganization},
    {"same_unit", Relation::SameUnit},
    {"sameunit", Relation::SameUnit},
};

// Length of a leading "[NS]+-" prefix, or 0.
std::size_t nuclearity_prefix(std::string_view label) {
  std::size_t i = 0;
  while (i < label.size() && (label[i] == 'N' || label[i] == 'S')) ++i;
  if (i > 0 && i < label.size() - 1 && label[i] == '-') return i + 1;
  return 0;
}

}  // namespace

std::string_view relation_name(Relation r) { return kRelationNames[static_cast<std::size_t>(r)]; }

std::optional<Relation> parse_relation_name(std::string_view name) {
  const std::string lower = to_lower(name);
  for (std::size_t i = 0; i < kNumRelations; ++i)
    if (to_lower(kRelationNames[i]) == lower) return static_cast<Relation>(i);
  return std::nullopt;
}

RelationMap::RelationMap() {
  for (std::size_t i = 0; i < kNumRelations; ++i) aliases_[to_lower(kRelationNames[i])] = static_cast<Relation>(i);
}

RelationMap RelationMap::defaults() {
  RelationMap map;
  for (const auto& a : kBuiltinAliases) map.add_alias(a.raw, a.canonical);
  return map;
}

RelationMap RelationMap::from_file(const std::string& path) {
  RelationMap map;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    auto fields = split(view, '\t');
    if (fields.size() != 2)
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected 'raw_label<TAB>canonical'");
    auto canonical = parse_relation_name(trim(fields[1]));
    if (!canonical)
      throw FormatError(path + ":" + std::to_string(lineno) + ": '" + std::string(trim(fields[1])) +
                        "' is not one of the 18 relation classes");
    const std::string_view raw = trim(fields[0]);
    if (raw == "*")
      map.set_fallback(*canonical);
    else
      map.add_alias(raw, *canonical);
  }
  return map;
}

void RelationMap::add_alias(std::string_view raw, Relation canonical) {
  std::string key = to_lower(raw);
  // Canonical names always map to themselves.
  if (auto self = parse_relation_name(raw); self && *self != canonical) return;
  aliases_[std::move(key)] = canonical;
}

std::optional<Relation> RelationMap::find(std::string_view label) const {
  auto it = aliases_.find(to_lower(label));
  if (it == aliases_.end()) return std::nullopt;
  return it->second;
}

std::optional<Relation> canonical_relation(std::string_view raw_label, const RelationMap& map, MappingMode mode) {
  std::string_view label = raw_label.substr(nuclearity_prefix(raw_label));
  if (auto r = map.find(label)) return r;
  if (mode == MappingMode::Strict) throw UnknownRelation(std::string(raw_label));
  return map.fallback();
}

}  // namespace rhetprobe
