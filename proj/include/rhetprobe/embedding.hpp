#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rhetprobe/matrix.hpp"

namespace rhetprobe {

inline constexpr std::size_t kMaxTokens = 512;
inline constexpr std::uint16_t kEmbFormatVersion = 1;
inline constexpr std::uint16_t kFlagInputEmbeddingLayer = 0x1;

// Per-document stack of L x D layer matrices.
struct EmbeddingDoc {
  std::string doc_id;
  std::uint16_t flags = 0;
  std::vector<MatrixF> layers;

  std::size_t tokens() const { return layers.empty() ? 0 : layers.front().rows(); }
  std::size_t width() const { return layers.empty() ? 0 : layers.front().cols(); }
  bool has_input_layer() const { return (flags & kFlagInputEmbeddingLayer) != 0; }

  friend bool operator==(const EmbeddingDoc&, const EmbeddingDoc&) = default;
};

// Throws DimensionError / LengthError when the document violates the EMB1
// invariants (1 <= L <= 512, uniform shapes, at least one layer).
void validate_embedding_doc(const EmbeddingDoc& doc);

std::vector<std::uint8_t> encode_embedding_doc(const EmbeddingDoc& doc);
EmbeddingDoc decode_embedding_doc(std::span<const std::uint8_t> bytes);
void write_embedding_doc(const EmbeddingDoc& doc, const std::string& path);
EmbeddingDoc read_embedding_doc(const std::string& path);

// Maps a layer number to an index into EmbeddingDoc::layers. Layer k is the
// output of block k; layer 0 is the input embedding layer and exists only
// when the file is flagged as carrying it.
std::size_t layer_index(const EmbeddingDoc& doc, int layer);

EmbeddingDoc average_layers(const EmbeddingDoc& doc, std::span<const int> layers);
EmbeddingDoc select_layer(const EmbeddingDoc& doc, int layer);

class WordVectorTable {
 public:
  WordVectorTable() = default;
  explicit WordVectorTable(std::size_t width) : width_(width), oov_(width, 0.0f) {}

  // Returns false (and leaves the table unchanged) if the token exists.
  bool insert(std::string token, std::span<const float> vector);

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return index_.size(); }
  std::size_t duplicates_skipped() const noexcept { return duplicates_; }
  bool contains(std::string_view token) const;

  std::span<const float> lookup(std::string_view token) const;
  void set_oov_vector(std::vector<float> v);
  std::span<const float> oov_vector() const noexcept { return oov_; }

 private:
  friend WordVectorTable read_word_vectors(const std::string&, std::optional<std::size_t>);

  std::size_t width_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> storage_;
  std::vector<float> oov_;
  std::size_t duplicates_ = 0;
};

// Text format: "token v1 ... vD" per line, space separated. A leading
// "<count> <width>" header line (word2vec / fastText .vec) is skipped.
WordVectorTable read_word_vectors(const std::string& path, std::optional<std::size_t> expected_width = std::nullopt);

EmbeddingDoc embed_non_contextual(std::span<const std::string> tokens, const WordVectorTable& table,
                                  std::string doc_id = {});

// Fixed random vector per distinct token, N(0, 1/D) per coordinate; a pure
// function of (token, width, seed).
std::vector<float> random_token_vector(std::string_view token, std::size_t width, std::uint64_t seed);
EmbeddingDoc rand_embed(std::span<const std::string> tokens, std::size_t width, std::uint64_t seed,
                        std::string doc_id = {});

}  // namespace rhetprobe
