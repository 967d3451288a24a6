#include <charconv>
#include <fstream>

#include "rhetprobe/embedding.hpp"
#include "rhetprobe/error.hpp"
#include "rhetprobe/text_io.hpp"

namespace rhetprobe {

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_float(std::string_view s, float& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace

WordVectorTable read_word_vectors(const std::string& path, std::optional<std::size_t> expected_width) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open word-vector file " + path);

  WordVectorTable table;
  bool have_width = false;
  std::optional<std::size_t> header_width;
  std::vector<float> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = fields_of(line);
    if (fields.empty()) continue;
    if (lineno == 1 && fields.size() == 2) {
      std::size_t count = 0, width = 0;
      if (parse_size(fields[0], count) && parse_size(fields[1], width)) {
        header_width = width;
        continue;
      }
    }
    const std::size_t width = fields.size() - 1;
    if (!have_width) {
      if (width == 0) throw FormatError(path + ":" + std::to_string(lineno) + ": token without a vector");
      if (header_width && *header_width != width)
        throw FormatError(path + ":" + std::to_string(lineno) + ": header declares width " +
                          std::to_string(*header_width) + " but line has " + std::to_string(width) + " values");
      if (expected_width && *expected_width != width)
        throw DimensionError(path + ": expected width " + std::to_string(*expected_width) + ", file has " +
                             std::to_string(width));
      table = WordVectorTable(width);
      have_width = true;
    } else if (width != table.width()) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(table.width()) +
                        " values, found " + std::to_string(width));
    }
    values.resize(width);
    for (std::size_t i = 0; i < width; ++i)
      if (!parse_float(fields[i + 1], values[i]))
        throw FormatError(path + ":" + std::to_string(lineno) + ": bad number '" + std::string(fields[i + 1]) + "'");
    table.insert(std::string(fields[0]), values);
  }
  if (!have_width) throw FormatError(path + ": no word vectors found");
  return table;
}

}  // namespace rhetprobe
