#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rhetprobe/features.hpp"

namespace rhetprobe {

enum class Split { Train, Test };

std::string_view split_name(Split s);

struct ManifestRow {
  std::string doc_id;
  std::string rsts_path;
  std::string emb_path;  // may contain "{model}"
  Split split = Split::Train;

  friend bool operator==(const ManifestRow&, const ManifestRow&) = default;
};

// Tab-separated "doc_id rsts_path emb_path split". Blank lines, "#" comments
// and a leading "doc_id" header row are skipped. Relative paths are resolved
// against the manifest's directory.
std::vector<ManifestRow> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows);

std::string embedding_path(const ManifestRow& row, std::string_view model_tag);

struct CorpusDoc {
  ManifestRow row;
  FeatureVector raw;
  std::vector<std::string> tokens;  // whitespace tokens of the EDUs in leaf order
};

struct Reject {
  std::string doc_id;
  std::string path;
  std::string reason;
};

struct Corpus {
  std::vector<CorpusDoc> docs;
  std::vector<Reject> rejects;
  std::size_t dropped_relations = 0;  // lenient mode only

  std::size_t count(Split s) const;
};

// Parses every tree (in parallel) and extracts raw features. Trees that fail
// to parse or map are listed in rejects; document order follows the manifest.
Corpus load_corpus(const std::vector<ManifestRow>& rows, const RelationMap& map, MappingMode mode);

// Normalization fitted on the train split only.
NormStats fit_train_norm(const Corpus& corpus);

}  // namespace rhetprobe
