#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "argbench/evaluation.hpp"
#include "argbench/puzzle.hpp"

namespace argbench {

// Positive class is "yes". Only parsed records land in the four quadrants;
// unparseable and transport-failed replies are counted on the side.
struct ConfusionMatrix {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  std::size_t unparsed = 0, failed = 0;

  std::size_t parsed() const noexcept { return tp + fp + tn + fn; }
};

ConfusionMatrix tally(const std::vector<EvalRecord>& records);

// Percentages: accuracy, f1, recall, precision in [0, 100], mcc in
// [-100, 100]. A ratio with a zero denominator is reported as 0.
struct MetricsReport {
  double accuracy = 0, f1 = 0, mcc = 0, recall = 0, precision = 0;
  ConfusionMatrix counts;
};

// Throws NoDataError when the matrix holds no parsed records.
MetricsReport metrics_from_matrix(const ConfusionMatrix& m);
MetricsReport compute_metrics(const std::vector<EvalRecord>& records);

// accuracy,f1,mcc,recall,precision,tp,fp,tn,fn,parsed,unparsed,failed
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);
MetricsReport parse_metrics_csv(std::string_view csv);

enum class BreakdownKey { NArgs, NumPaths, Label };

std::string to_string(BreakdownKey key);
BreakdownKey parse_breakdown_key(std::string_view text);

struct BreakdownRow {
  std::string key;
  std::size_t parsed = 0;
  double percent_correct = 0;

  bool operator==(const BreakdownRow&) const = default;
};

// Groups parsed records by the key's value for the matching instance, rows
// ascending (numerically for counts, "no" before "yes" for labels). When
// label_filter is set only instances with that label take part. Throws
// IntegrityError naming any record id absent from the dataset.
std::vector<BreakdownRow> breakdown(const std::vector<EvalRecord>& records, const std::vector<PuzzleInstance>& dataset,
                                    BreakdownKey key, std::optional<bool> label_filter = std::nullopt);

// key,parsed,percent_correct
std::string breakdown_csv(const std::vector<BreakdownRow>& rows);
std::vector<BreakdownRow> parse_breakdown_csv(std::string_view csv);

// Ids missed (wrong, unparseable or failed) by either run. Both runs must
// cover the same ids; otherwise IntegrityError lists the ids missing from
// each side.
std::set<std::string> select_hard_subset(const std::vector<EvalRecord>& results_a,
                                         const std::vector<EvalRecord>& results_b);

// Fixed-point formatting used in every CSV ("%.4f").
std::string format_number(double value);

}  // namespace argbench
