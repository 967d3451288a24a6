#include "rhetprobe/embedding.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "rhetprobe/error.hpp"
#include "rhetprobe/rng.hpp"

namespace rhetprobe {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};

class ByteWriter {
 public:
  void bytes(const void* p, std::size_t n) {
    auto b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
  void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  void reserve(std::size_t n) { out_.reserve(n); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}
  void need(std::size_t n, const char* what) {
    if (in_.size() - pos_ < n) throw FormatError(std::string("truncated EMB1 file while reading ") + what);
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    std::uint16_t v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32("payload")); }
  std::span<const std::uint8_t> take(std::size_t n, const char* what) {
    need(n, what);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

void validate_embedding_doc(const EmbeddingDoc& doc) {
  if (doc.layers.empty()) throw DimensionError("embedding document has no layers");
  const std::size_t L = doc.layers.front().rows();
  const std::size_t D = doc.layers.front().cols();
  if (L < 1 || L > kMaxTokens)
    throw LengthError("token count " + std::to_string(L) + " outside [1, " + std::to_string(kMaxTokens) + "]");
  if (D < 1) throw DimensionError("embedding width must be positive");
  for (const auto& layer : doc.layers)
    if (layer.rows() != L || layer.cols() != D) throw DimensionError("layers disagree on L x D");
  if (doc.layers.size() > 0xFFFF) throw DimensionError("too many layers");
  if (doc.doc_id.size() > 0xFFFF) throw DimensionError("doc_id too long");
}

std::vector<std::uint8_t> encode_embedding_doc(const EmbeddingDoc& doc) {
  validate_embedding_doc(doc);
  ByteWriter w;
  const std::size_t L = doc.tokens(), D = doc.width();
  w.reserve(22 + doc.doc_id.size() + doc.layers.size() * L * D * 4);
  w.bytes(kMagic, 4);
  w.u16(kEmbFormatVersion);
  w.u16(static_cast<std::uint16_t>(doc.doc_id.size()));
  w.bytes(doc.doc_id.data(), doc.doc_id.size());
  w.u16(doc.flags);
  w.u16(static_cast<std::uint16_t>(doc.layers.size()));
  w.u32(static_cast<std::uint32_t>(L));
  w.u32(static_cast<std::uint32_t>(D));
  for (const auto& layer : doc.layers)
    for (float f : layer.flat()) w.f32(f);
  return w.take();
}

EmbeddingDoc decode_embedding_doc(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  auto magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad EMB1 magic");
  const auto version = r.u16("version");
  if (version != kEmbFormatVersion) throw FormatError("unsupported EMB1 version " + std::to_string(version));
  const auto id_len = r.u16("doc_id length");
  auto id = r.take(id_len, "doc_id");
  EmbeddingDoc doc;
  doc.doc_id.assign(id.begin(), id.end());
  doc.flags = r.u16("flags");
  const auto n_layers = r.u16("layer count");
  const auto L = r.u32("L");
  const auto D = r.u32("D");
  if (n_layers == 0) throw DimensionError("EMB1 file declares zero layers");
  if (L < 1 || L > kMaxTokens) throw LengthError("EMB1 token count " + std::to_string(L) + " outside [1, 512]");
  if (D < 1) throw DimensionError("EMB1 width must be positive");
  const std::uint64_t payload = std::uint64_t{n_layers} * L * D * 4;
  if (r.remaining() != payload)
    throw FormatError(r.remaining() < payload ? "truncated EMB1 payload" : "trailing bytes after EMB1 payload");
  doc.layers.reserve(n_layers);
  for (std::size_t k = 0; k < n_layers; ++k) {
    MatrixF m(L, D);
    for (float& f : m.flat()) f = r.f32();
    doc.layers.push_back(std::move(m));
  }
  return doc;
}

void write_embedding_doc(const EmbeddingDoc& doc, const std::string& path) {
  const auto bytes = encode_embedding_doc(doc);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("short write to " + path);
}

EmbeddingDoc read_embedding_doc(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_embedding_doc(bytes);
}

std::size_t layer_index(const EmbeddingDoc& doc, int layer) {
  const int offset = doc.has_input_layer() ? 0 : 1;
  const long idx = static_cast<long>(layer) - offset;
  if (layer < 0 || idx < 0 || idx >= static_cast<long>(doc.layers.size()))
    throw IndexError("layer " + std::to_string(layer) + " not present in '" + doc.doc_id + "' (" +
                     std::to_string(doc.layers.size()) + " layers" +
                     (doc.has_input_layer() ? ", including input embeddings)" : ")"));
  return static_cast<std::size_t>(idx);
}

EmbeddingDoc select_layer(const EmbeddingDoc& doc, int layer) {
  EmbeddingDoc out;
  out.doc_id = doc.doc_id;
  out.layers.push_back(doc.layers[layer_index(doc, layer)]);
  return out;
}

EmbeddingDoc average_layers(const EmbeddingDoc& doc, std::span<const int> layers) {
  if (layers.empty()) throw IndexError("no layers selected for averaging");
  std::vector<std::size_t> idx;
  for (int l : layers) idx.push_back(layer_index(doc, l));
  const std::size_t n = doc.layers.front().size();
  std::vector<double> acc(n, 0.0);
  for (std::size_t k : idx) {
    auto src = doc.layers[k].flat();
    for (std::size_t i = 0; i < n; ++i) acc[i] += src[i];
  }
  MatrixF mean(doc.tokens(), doc.width());
  const double inv = 1.0 / static_cast<double>(idx.size());
  auto dst = mean.flat();
  for (std::size_t i = 0; i < n; ++i) dst[i] = static_cast<float>(acc[i] * inv);
  EmbeddingDoc out;
  out.doc_id = doc.doc_id;
  out.layers.push_back(std::move(mean));
  return out;
}

bool WordVectorTable::insert(std::string token, std::span<const float> vector) {
  if (vector.size() != width_) throw DimensionError("word vector width mismatch");
  if (index_.contains(token)) {
    ++duplicates_;
    return false;
  }
  index_.emplace(std::move(token), index_.size());
  storage_.insert(storage_.end(), vector.begin(), vector.end());
  return true;
}

bool WordVectorTable::contains(std::string_view token) const { return index_.contains(std::string(token)); }

std::span<const float> WordVectorTable::lookup(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return oov_;
  return {storage_.data() + it->second * width_, width_};
}

void WordVectorTable::set_oov_vector(std::vector<float> v) {
  if (v.size() != width_) throw DimensionError("OOV vector width mismatch");
  oov_ = std::move(v);
}

namespace {

void check_tokens(std::size_t n) {
  if (n == 0) throw LengthError("document has no tokens");
  if (n > kMaxTokens) throw LengthError("document has " + std::to_string(n) + " tokens, limit is 512");
}

}  // namespace

EmbeddingDoc embed_non_contextual(std::span<const std::string> tokens, const WordVectorTable& table,
                                  std::string doc_id) {
  check_tokens(tokens.size());
  MatrixF x(tokens.size(), table.width());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    auto v = table.lookup(tokens[t]);
    std::copy(v.begin(), v.end(), x.row(t).begin());
  }
  EmbeddingDoc doc;
  doc.doc_id = std::move(doc_id);
  doc.layers.push_back(std::move(x));
  return doc;
}

std::vector<float> random_token_vector(std::string_view token, std::size_t width, std::uint64_t seed) {
  Rng rng(splitmix64(seed) ^ fnv1a64(token));
  const double sd = 1.0 / std::sqrt(static_cast<double>(width));
  std::vector<float> v(width);
  for (float& f : v) f = static_cast<float>(rng.normal() * sd);
  return v;
}

EmbeddingDoc rand_embed(std::span<const std::string> tokens, std::size_t width, std::uint64_t seed,
                        std::string doc_id) {
  check_tokens(tokens.size());
  if (width == 0) throw DimensionError("embedding width must be positive");
  MatrixF x(tokens.size(), width);
  std::unordered_map<std::string_view, std::vector<float>> cache;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    auto [it, fresh] = cache.try_emplace(tokens[t]);
    if (fresh) it->second = random_token_vector(tokens[t], width, seed);
    std::copy(it->second.begin(), it->second.end(), x.row(t).begin());
  }
  EmbeddingDoc doc;
  doc.doc_id = std::move(doc_id);
  doc.layers.push_back(std::move(x));
  return doc;
}

}  // namespace rhetprobe
