#include "argbench/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include "argbench/error.hpp"

namespace argbench {

ConfusionMatrix tally(const std::vector<EvalRecord>& records) {
  ConfusionMatrix m;
  for (const auto& r : records) {
    if (r.status == TransportStatus::Failed) {
      ++m.failed;
    } else if (r.verdict == Verdict::Unparseable) {
      ++m.unparsed;
    } else if (r.verdict == Verdict::Yes) {
      ++(r.label ? m.tp : m.fp);
    } else {
      ++(r.label ? m.fn : m.tn);
    }
  }
  return m;
}

namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

}  // namespace

MetricsReport metrics_from_matrix(const ConfusionMatrix& m) {
  if (m.parsed() == 0) throw NoDataError("no parsed records to score");
  const double tp = m.tp, fp = m.fp, tn = m.tn, fn = m.fn;
  MetricsReport r;
  r.counts = m;
  r.accuracy = 100.0 * (tp + tn) / static_cast<double>(m.parsed());
  const double precision = ratio(tp, tp + fp);
  const double recall = ratio(tp, tp + fn);
  r.precision = 100.0 * precision;
  r.recall = 100.0 * recall;
  r.f1 = 100.0 * ratio(2 * precision * recall, precision + recall);
  // Split the square root so the product stays well inside double range.
  const double den = std::sqrt((tp + fp) * (tp + fn)) * std::sqrt((tn + fp) * (tn + fn));
  r.mcc = 100.0 * ratio(tp * tn - fp * fn, den);
  return r;
}

MetricsReport compute_metrics(const std::vector<EvalRecord>& records) { return metrics_from_matrix(tally(records)); }

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  if (std::string_view(buf) == "-0.0000") return "0.0000";
  return buf;
}

std::string metrics_csv_header() { return "accuracy,f1,mcc,recall,precision,tp,fp,tn,fn,parsed,unparsed,failed"; }

std::string metrics_csv_row(const MetricsReport& r) {
  const auto& c = r.counts;
  std::string row = format_number(r.accuracy) + "," + format_number(r.f1) + "," + format_number(r.mcc) + "," +
                    format_number(r.recall) + "," + format_number(r.precision);
  for (auto n : {c.tp, c.fp, c.tn, c.fn, c.parsed(), c.unparsed, c.failed}) row += "," + std::to_string(n);
  return row;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

std::vector<std::string_view> csv_lines(std::string_view csv) {
  std::vector<std::string_view> out;
  for (auto line : split(csv, '\n')) {
    if (line.ends_with('\r')) line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
  }
  return out;
}

double to_double(std::string_view s, std::size_t line) {
  // std::from_chars for double is missing from older libstdc++; strtod on a
  // bounded copy behaves the same here.
  std::string copy(s);
  char* end = nullptr;
  const double v = std::strtod(copy.c_str(), &end);
  if (copy.empty() || end != copy.c_str() + copy.size() || !std::isfinite(v)) {
    throw ParseError(line, "not a number: '" + copy + "'");
  }
  return v;
}

std::size_t to_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "not a count: '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

MetricsReport parse_metrics_csv(std::string_view csv) {
  const auto lines = csv_lines(csv);
  if (lines.size() != 2 || lines[0] != metrics_csv_header()) {
    throw ParseError(1, "expected header '" + metrics_csv_header() + "' and one row");
  }
  const auto f = split(lines[1], ',');
  if (f.size() != 12) throw ParseError(2, "expected 12 fields");
  MetricsReport r;
  r.accuracy = to_double(f[0], 2);
  r.f1 = to_double(f[1], 2);
  r.mcc = to_double(f[2], 2);
  r.recall = to_double(f[3], 2);
  r.precision = to_double(f[4], 2);
  r.counts.tp = to_count(f[5], 2);
  r.counts.fp = to_count(f[6], 2);
  r.counts.tn = to_count(f[7], 2);
  r.counts.fn = to_count(f[8], 2);
  if (to_count(f[9], 2) != r.counts.parsed()) throw ParseError(2, "parsed != tp+fp+tn+fn");
  r.counts.unparsed = to_count(f[10], 2);
  r.counts.failed = to_count(f[11], 2);
  return r;
}

std::string to_string(BreakdownKey key) {
  switch (key) {
    case BreakdownKey::NArgs:
      return "n_args";
    case BreakdownKey::NumPaths:
      return "num_paths";
    case BreakdownKey::Label:
      return "label";
  }
  return "?";
}

BreakdownKey parse_breakdown_key(std::string_view text) {
  for (auto k : {BreakdownKey::NArgs, BreakdownKey::NumPaths, BreakdownKey::Label}) {
    if (to_string(k) == text) return k;
  }
  throw ValidationError("unknown breakdown key '" + std::string(text) + "' (expected n_args, num_paths or label)");
}

std::vector<BreakdownRow> breakdown(const std::vector<EvalRecord>& records, const std::vector<PuzzleInstance>& dataset,
                                    BreakdownKey key, std::optional<bool> label_filter) {
  std::unordered_map<std::string_view, const PuzzleInstance*> by_id;
  for (const auto& instance : dataset) by_id.emplace(instance.id, &instance);

  // Sort key: counts numerically; labels as 0 = no, 1 = yes.
  struct Group {
    std::size_t parsed = 0, correct = 0;
  };
  std::map<std::size_t, Group> groups;
  for (const auto& r : records) {
    auto it = by_id.find(r.instance_id);
    if (it == by_id.end()) throw IntegrityError("record for unknown instance id " + r.instance_id);
    const auto& instance = *it->second;
    if (label_filter && instance.label != *label_filter) continue;
    if (!r.parsed()) continue;
    std::size_t value = 0;
    switch (key) {
      case BreakdownKey::NArgs:
        value = instance.graph.size();
        break;
      case BreakdownKey::NumPaths:
        value = instance.topology.path_count();
        break;
      case BreakdownKey::Label:
        value = instance.label ? 1 : 0;
        break;
    }
    auto& g = groups[value];
    ++g.parsed;
    if (r.correct.value_or(false)) ++g.correct;
  }

  std::vector<BreakdownRow> rows;
  for (const auto& [value, g] : groups) {
    rows.push_back(BreakdownRow{
        .key = key == BreakdownKey::Label ? (value ? "yes" : "no") : std::to_string(value),
        .parsed = g.parsed,
        .percent_correct = 100.0 * static_cast<double>(g.correct) / static_cast<double>(g.parsed),
    });
  }
  return rows;
}

std::string breakdown_csv(const std::vector<BreakdownRow>& rows) {
  std::string out = "key,parsed,percent_correct\n";
  for (const auto& r : rows) out += r.key + "," + std::to_string(r.parsed) + "," + format_number(r.percent_correct) + "\n";
  return out;
}

std::vector<BreakdownRow> parse_breakdown_csv(std::string_view csv) {
  const auto lines = csv_lines(csv);
  if (lines.empty() || lines[0] != "key,parsed,percent_correct") {
    throw ParseError(1, "expected header 'key,parsed,percent_correct'");
  }
  std::vector<BreakdownRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split(lines[i], ',');
    if (f.size() != 3 || f[0].empty()) throw ParseError(i + 1, "expected key,parsed,percent_correct");
    const double pct = to_double(f[2], i + 1);
    if (pct < 0 || pct > 100) throw ParseError(i + 1, "percent_correct outside [0, 100]");
    rows.push_back({std::string(f[0]), to_count(f[1], i + 1), pct});
  }
  return rows;
}

std::set<std::string> select_hard_subset(const std::vector<EvalRecord>& results_a,
                                         const std::vector<EvalRecord>& results_b) {
  std::set<std::string> ids_a, ids_b, hard;
  for (const auto& r : results_a) {
    ids_a.insert(r.instance_id);
    if (r.missed()) hard.insert(r.instance_id);
  }
  for (const auto& r : results_b) {
    ids_b.insert(r.instance_id);
    if (r.missed()) hard.insert(r.instance_id);
  }
  if (ids_a != ids_b) {
    std::string message = "result sets cover different instances;";
    auto list = [&](const std::set<std::string>& from, const std::set<std::string>& other, const char* side) {
      std::vector<std::string> missing;
      std::set_difference(from.begin(), from.end(), other.begin(), other.end(), std::back_inserter(missing));
      if (missing.empty()) return;
      message += std::string(" missing from ") + side + ":";
      for (const auto& id : missing) message += " " + id;
    };
    list(ids_b, ids_a, "first");
    list(ids_a, ids_b, "second");
    throw IntegrityError(message);
  }
  return hard;
}

}  // namespace argbench
