#include "rhetprobe/report.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <optional>
#include <tuple>

#include "rhetprobe/text_io.hpp"

namespace rhetprobe {

namespace {

std::optional<int> single_layer(const std::string& selection) {
  int v = 0;
  auto res = std::from_chars(selection.data(), selection.data() + selection.size(), v);
  if (res.ec != std::errc() || res.ptr != selection.data() + selection.size()) return std::nullopt;
  return v;
}

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' ? c : '_');
  return out;
}

std::string difficulty_cell(const RunRecord& r) { return r.failed() ? "nan" : format_sig6(r.eval_difficulty); }

}  // namespace

std::vector<RunRecord> sorted_records(const std::vector<RunRecord>& records) {
  std::vector<RunRecord> out = records;
  std::stable_sort(out.begin(), out.end(), [](const RunRecord& a, const RunRecord& b) {
    auto key = [](const RunRecord& r) {
      auto layer = single_layer(r.layer_selection);
      return std::make_tuple(r.model_tag, r.feature_group, layer ? 0 : 1, layer.value_or(0));
    };
    auto ka = key(a), kb = key(b);
    if (ka != kb) return ka < kb;
    return std::get<2>(ka) == 1 && a.layer_selection < b.layer_selection;
  });
  return out;
}

std::string render_report_table(const std::vector<RunRecord>& records) {
  std::string out = "model\tlayer_selection\tgroup\tdifficulty\tepochs\tstop_reason\n";
  for (const auto& r : sorted_records(records)) {
    out += r.model_tag + '\t' + r.layer_selection + '\t' + r.feature_group + '\t' + difficulty_cell(r) + '\t' +
           std::to_string(r.epochs_run) + '\t' + (r.failed() ? std::string("error") : std::string(stop_reason_name(r.stop_reason))) +
           '\n';
  }
  return out;
}

std::map<std::string, std::string> render_plot_data(const std::vector<RunRecord>& records) {
  std::map<std::string, std::string> files;
  for (const auto& r : sorted_records(records)) {
    auto layer = single_layer(r.layer_selection);
    if (!layer) continue;
    std::string& body = files["plot_" + sanitize(r.model_tag) + "_" + sanitize(r.feature_group) + ".tsv"];
    if (body.empty()) body = "layer\tdifficulty\n";
    body += std::to_string(*layer) + '\t' + difficulty_cell(r) + '\n';
  }
  return files;
}

std::string render_baseline_summary(const std::vector<RunRecord>& records) {
  static const std::array<std::string, 4> groups = {"All", "EDU", "Sig", "Tree"};
  std::vector<std::string> rows;
  std::map<std::pair<std::string, std::string>, std::string> cells;
  for (const auto& r : records) {
    if (std::find(rows.begin(), rows.end(), r.model_tag) == rows.end()) rows.push_back(r.model_tag);
    cells[{r.model_tag, r.feature_group}] = difficulty_cell(r);
  }
  std::string out = "config";
  for (const auto& g : groups) out += '\t' + g;
  out += '\n';
  for (const auto& row : rows) {
    out += row;
    for (const auto& g : groups) {
      auto it = cells.find({row, g});
      out += '\t' + (it == cells.end() ? std::string("-") : it->second);
    }
    out += '\n';
  }
  return out;
}

std::string render_sigma_breakdown(const std::vector<RunRecord>& records) {
  std::string out = "group\tsigma\tdifficulty\n";
  for (const auto& r : records)
    for (auto [sigma, dif] : r.sigma_difficulties)
      out += r.feature_group + '\t' + format_sig6(sigma) + '\t' + format_sig6(dif) + '\n';
  return out;
}

void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  write_text_file((fs::path(out_dir) / "report.tsv").string(), render_report_table(records));
  for (const auto& [name, body] : render_plot_data(records))
    write_text_file((fs::path(out_dir) / name).string(), body);
}

}  // namespace rhetprobe
