#pragma once

#include <map>
#include <string>
#include <vector>

#include "rhetprobe/record.hpp"

namespace rhetprobe {

// Records sorted stably by (model, group, layer); single layers order
// numerically and precede averaged selections.
std::vector<RunRecord> sorted_records(const std::vector<RunRecord>& records);

// model, layer_selection, group, difficulty, epochs, stop_reason.
std::string render_report_table(const std::vector<RunRecord>& records);

// File name -> layer/difficulty series, one per (model, group), single-layer
// selections only.
std::map<std::string, std::string> render_plot_data(const std::vector<RunRecord>& records);

// Baseline x {All, EDU, Sig, Tree} grid, rows in first-appearance order.
std::string render_baseline_summary(const std::vector<RunRecord>& records);
// RandGuess difficulty per (group, sigma).
std::string render_sigma_breakdown(const std::vector<RunRecord>& records);

// Writes report.tsv plus the plot-data files into out_dir.
void emit_report(const std::vector<RunRecord>& records, const std::string& out_dir);

}  // namespace rhetprobe
