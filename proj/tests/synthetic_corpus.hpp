#pragma once

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "rhetprobe/corpus.hpp"
#include "rhetprobe/embedding.hpp"
#include "rhetprobe/features.hpp"
#include "rhetprobe/text_io.hpp"
#include "test_support.hpp"

namespace testsupport {

inline constexpr std::size_t kSignalWidth = 8;

// Prepends a marker token naming the relation of every internal node to the
// leftmost EDU below it.
inline void add_markers(RstNode& node, const RelationMap& map) {
  if (node.is_leaf()) return;
  for (auto& c : node.children) add_markers(c, map);
  RstNode* first = &node;
  while (!first->is_leaf()) first = &first->children.front();
  const auto rel = canonical_relation(node.relation, map);
  first->text = "mk" + std::to_string(static_cast<std::size_t>(*rel)) + " " + first->text;
}

// Layer 1 carries sqrt of the six structural features on the diagonal of
// X^T X plus a constant row; layer 2 is pure noise.
inline EmbeddingDoc signal_embedding(const FeatureVector& f, Rng& rng) {
  EmbeddingDoc doc;
  doc.doc_id = f.doc_id;
  MatrixF signal(kSignalWidth, kSignalWidth);
  for (std::size_t k = 0; k < 6; ++k) signal(k, k) = static_cast<float>(std::sqrt(f.values[kDepthMean + k]));
  signal(6, 6) = 1.0f;
  for (std::size_t c = 0; c < kSignalWidth; ++c) signal(7, c) = static_cast<float>(0.01 * rng.normal());
  doc.layers.push_back(std::move(signal));
  doc.layers.push_back(random_matrix_f(rng, kSignalWidth, kSignalWidth));
  return doc;
}

struct SyntheticCorpus {
  std::string manifest;
  std::vector<ManifestRow> rows;
  std::vector<FeatureVector> features;  // raw, manifest order
};

// Writes trees, a manifest with a {model} placeholder and embeddings for the
// model tag "sig" into dir.
inline SyntheticCorpus write_synthetic_corpus(const fs::path& dir, std::size_t n_train, std::size_t n_test,
                                              std::uint64_t seed, bool markers = false) {
  Rng rng(seed);
  const RelationMap map = RelationMap::defaults();
  fs::create_directories(dir / "trees");
  fs::create_directories(dir / "emb" / "sig");
  SyntheticCorpus out;
  for (std::size_t i = 0; i < n_train + n_test; ++i) {
    const std::string id = "doc" + std::to_string(i);
    RstNode root = random_node(rng, 4, 3, false);
    if (markers) add_markers(root, map);
    const RstTree tree(std::move(root));
    write_text_file((dir / "trees" / (id + ".rsts")).string(), serialize_rst_tree(tree) + "\n");
    FeatureVector f = extract_features(tree, map, MappingMode::Strict, id);
    write_embedding_doc(signal_embedding(f, rng), (dir / "emb" / "sig" / (id + ".emb")).string());
    out.features.push_back(std::move(f));
    out.rows.push_back({id, "trees/" + id + ".rsts", "emb/{model}/" + id + ".emb", i < n_train ? Split::Train : Split::Test});
  }
  out.manifest = (dir / "manifest.tsv").string();
  write_manifest(out.manifest, out.rows);
  return out;
}

}  // namespace testsupport
