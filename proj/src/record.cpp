#include "rhetprobe/record.hpp"

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "rhetprobe/error.hpp"

namespace rhetprobe {

using json = nlohmann::ordered_json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double number_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::MaxEpochs: return "max_epochs";
    case StopReason::Stall: return "stall";
    case StopReason::Rise: return "rise";
    case StopReason::None: return "none";
  }
  return "none";
}

StopReason parse_stop_reason(std::string_view name) {
  if (name == "max_epochs") return StopReason::MaxEpochs;
  if (name == "stall") return StopReason::Stall;
  if (name == "rise") return StopReason::Rise;
  if (name == "none") return StopReason::None;
  throw FormatError("unknown stop_reason '" + std::string(name) + "'");
}

std::string record_to_json(const RunRecord& r) {
  json j;
  j["model_tag"] = r.model_tag;
  j["layer_selection"] = r.layer_selection;
  j["feature_group"] = r.feature_group;
  json epochs = json::array();
  for (double x : r.train_difficulty_per_epoch) epochs.push_back(number_or_null(x));
  j["train_difficulty_per_epoch"] = std::move(epochs);
  j["eval_difficulty"] = number_or_null(r.eval_difficulty);
  j["epochs_run"] = r.epochs_run;
  j["stop_reason"] = std::string(stop_reason_name(r.stop_reason));
  j["eval_split"] = r.eval_split;
  j["target_space"] = r.target_space;
  j["stall_rule"] = r.stall_rule;
  j["train_docs"] = r.train_docs;
  j["eval_docs"] = r.eval_docs;
  if (!r.sigma_difficulties.empty()) {
    json sig = json::array();
    for (auto [s, dif] : r.sigma_difficulties) sig.push_back({{"sigma", s}, {"difficulty", number_or_null(dif)}});
    j["sigma_difficulties"] = std::move(sig);
  }
  j["error"] = r.error.empty() ? json(nullptr) : json(r.error);
  return j.dump();
}

RunRecord record_from_json(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad record JSON: ") + e.what());
  }
  try {
    RunRecord r;
    r.model_tag = j.at("model_tag").get<std::string>();
    r.layer_selection = j.at("layer_selection").get<std::string>();
    r.feature_group = j.at("feature_group").get<std::string>();
    for (const auto& x : j.at("train_difficulty_per_epoch")) r.train_difficulty_per_epoch.push_back(number_from(x));
    r.eval_difficulty = number_from(j.at("eval_difficulty"));
    r.epochs_run = j.at("epochs_run").get<int>();
    r.stop_reason = parse_stop_reason(j.at("stop_reason").get<std::string>());
    r.eval_split = j.value("eval_split", "");
    r.target_space = j.value("target_space", "normalized");
    r.stall_rule = j.value("stall_rule", "absolute");
    r.train_docs = j.value("train_docs", std::size_t{0});
    r.eval_docs = j.value("eval_docs", std::size_t{0});
    if (j.contains("sigma_difficulties"))
      for (const auto& s : j["sigma_difficulties"])
        r.sigma_difficulties.emplace_back(s.at("sigma").get<double>(), number_from(s.at("difficulty")));
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("record JSON missing field: ") + e.what());
  }
}

std::string records_to_jsonl(const std::vector<RunRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r);
    out += '\n';
  }
  return out;
}

std::vector<RunRecord> records_from_jsonl(std::string_view text) {
  std::vector<RunRecord> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.push_back(record_from_json(line));
  return out;
}

}  // namespace rhetprobe
