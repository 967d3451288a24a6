#pragma once

#include <limits>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rhetprobe {

// "none" marks baselines that are scored without training.
enum class StopReason { MaxEpochs, Stall, Rise, None };

std::string_view stop_reason_name(StopReason r);
StopReason parse_stop_reason(std::string_view name);

struct RunRecord {
  std::string model_tag;
  std::string layer_selection;
  std::string feature_group;
  std::vector<double> train_difficulty_per_epoch;
  double eval_difficulty = std::numeric_limits<double>::quiet_NaN();
  int epochs_run = 0;
  StopReason stop_reason = StopReason::None;

  // Self-describing extras.
  std::string eval_split;
  std::string target_space = "normalized";
  std::string stall_rule = "absolute";
  std::size_t train_docs = 0;
  std::size_t eval_docs = 0;
  std::vector<std::pair<double, double>> sigma_difficulties;  // RandGuess only
  std::string error;                                           // nonempty for failed runs

  bool failed() const noexcept { return !error.empty(); }
};

// One JSON object per line, stable key order.
std::string record_to_json(const RunRecord& record);
RunRecord record_from_json(std::string_view line);
std::string records_to_jsonl(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_jsonl(std::string_view text);

}  // namespace rhetprobe
