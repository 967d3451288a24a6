#include "rhetprobe/corpus.hpp"

#include <exception>
#include <filesystem>
#include <sstream>

#include "rhetprobe/error.hpp"
#include "rhetprobe/text_io.hpp"

namespace rhetprobe {

namespace fs = std::filesystem;

std::string_view split_name(Split s) { return s == Split::Train ? "train" : "test"; }

std::vector<ManifestRow> read_manifest(const std::string& path) {
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&](std::string_view p) {
    fs::path fp{std::string(p)};
    return fp.is_absolute() || base.empty() ? fp.string() : (base / fp).string();
  };
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const FormatError& e) {
    throw PlanError(e.what());
  }
  std::istringstream in(text);
  std::vector<ManifestRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty() || view.starts_with('#')) continue;
    auto f = split(view, '\t');
    if (f.size() != 4) throw PlanError(path + ":" + std::to_string(lineno) + ": expected 4 tab-separated fields");
    if (rows.empty() && f[0] == "doc_id" && f[3] == "split") continue;
    ManifestRow row;
    row.doc_id = std::string(trim(f[0]));
    row.rsts_path = resolve(trim(f[1]));
    row.emb_path = resolve(trim(f[2]));
    const auto split_field = trim(f[3]);
    if (split_field == "train")
      row.split = Split::Train;
    else if (split_field == "test")
      row.split = Split::Test;
    else
      throw PlanError(path + ":" + std::to_string(lineno) + ": split must be train or test");
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_manifest(const std::string& path, const std::vector<ManifestRow>& rows) {
  std::string out;
  for (const auto& r : rows)
    out += r.doc_id + '\t' + r.rsts_path + '\t' + r.emb_path + '\t' + std::string(split_name(r.split)) + '\n';
  write_text_file(path, out);
}

std::string embedding_path(const ManifestRow& row, std::string_view model_tag) {
  std::string out = row.emb_path;
  constexpr std::string_view key = "{model}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + model_tag.size()))
    out.replace(pos, key.size(), model_tag);
  return out;
}

std::size_t Corpus::count(Split s) const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.row.split == s;
  return n;
}

Corpus load_corpus(const std::vector<ManifestRow>& rows, const RelationMap& map, MappingMode mode) {
  struct Slot {
    bool ok = false;
    CorpusDoc doc;
    std::string error;
    std::size_t dropped = 0;
  };
  std::vector<Slot> slots(rows.size());
  const long n = static_cast<long>(rows.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    Slot& slot = slots[static_cast<std::size_t>(k)];
    const ManifestRow& row = rows[static_cast<std::size_t>(k)];
    try {
      const RstTree tree = read_rst_file(row.rsts_path);
      slot.doc.row = row;
      slot.doc.raw = extract_features(tree, map, mode, row.doc_id, &slot.dropped);
      for (const auto& edu : edu_texts(tree))
        for (auto& tok : whitespace_tokens(edu)) slot.doc.tokens.push_back(std::move(tok));
      slot.ok = true;
    } catch (const std::exception& e) {
      slot.error = e.what();
    }
  }
  Corpus corpus;
  for (std::size_t k = 0; k < slots.size(); ++k) {
    corpus.dropped_relations += slots[k].dropped;
    if (slots[k].ok)
      corpus.docs.push_back(std::move(slots[k].doc));
    else
      corpus.rejects.push_back({rows[k].doc_id, rows[k].rsts_path, std::move(slots[k].error)});
  }
  return corpus;
}

NormStats fit_train_norm(const Corpus& corpus) {
  std::vector<FeatureVector> train;
  for (const auto& d : corpus.docs)
    if (d.row.split == Split::Train) train.push_back(d.raw);
  return fit_norm(train, "train");
}

}  // namespace rhetprobe
