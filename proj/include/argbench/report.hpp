#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "argbench/metrics.hpp"

namespace argbench {

// File names inside a scored directory.
std::string metrics_file_name();                                   // metrics.csv
std::string breakdown_file_name(BreakdownKey key);                 // breakdown_<key>.csv
std::string split_breakdown_file_name(BreakdownKey key, bool yes); // breakdown_<key>_<yes|no>.csv

// Output of one `score` invocation, read back for reporting.
struct ScoredRun {
  std::string name;
  MetricsReport metrics;
  std::map<BreakdownKey, std::vector<BreakdownRow>> breakdowns;
  // Present when the scored data had answers of both labels per key value
  // (nonlinear datasets); index 0 = "no" rows, 1 = "yes" rows.
  std::map<BreakdownKey, std::array<std::vector<BreakdownRow>, 2>> label_splits;
};

// Throws IoError for a missing metrics file and ParseError for malformed CSV.
ScoredRun load_scored_run(const std::filesystem::path& dir, std::string name);

struct ChartSeries {
  std::string name;
  std::vector<BreakdownRow> rows;
};

// Self-contained SVG: one bar group per key value, one bar per series, with a
// line through each series' bar tops. y axis is percent correct, 0..100.
std::string render_chart_svg(const std::string& title, const std::string& x_label,
                             const std::vector<ChartSeries>& series);

// key,<run 1>,<run 2>,... with percent correct per run; empty cell when a run
// has no row for that key value.
std::string merged_breakdown_csv(const std::vector<ScoredRun>& runs, BreakdownKey key);

// metric,<run 1>,<run 2>,... over accuracy, f1, mcc, recall, precision,
// parsed, unparsed, failed.
std::string merged_metrics_csv(const std::vector<ScoredRun>& runs);

}  // namespace argbench
