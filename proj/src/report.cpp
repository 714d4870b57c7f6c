#include "argbench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "argbench/error.hpp"

namespace argbench {

std::string metrics_file_name() { return "metrics.csv"; }
std::string breakdown_file_name(BreakdownKey key) { return "breakdown_" + to_string(key) + ".csv"; }
std::string split_breakdown_file_name(BreakdownKey key, bool yes) {
  return "breakdown_" + to_string(key) + (yes ? "_yes" : "_no") + ".csv";
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Numeric keys sort numerically, anything else lexicographically after them.
bool key_less(const std::string& a, const std::string& b) {
  auto numeric = [](const std::string& s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
  };
  const bool na = numeric(a), nb = numeric(b);
  if (na && nb) return a.size() != b.size() ? a.size() < b.size() : a < b;
  if (na != nb) return na;
  return a < b;
}

std::vector<std::string> ordered_keys(const std::vector<std::vector<BreakdownRow>>& tables) {
  std::set<std::string> keys;
  for (const auto& t : tables) {
    for (const auto& r : t) keys.insert(r.key);
  }
  std::vector<std::string> out(keys.begin(), keys.end());
  std::sort(out.begin(), out.end(), key_less);
  return out;
}

constexpr const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};

}  // namespace

ScoredRun load_scored_run(const std::filesystem::path& dir, std::string name) {
  ScoredRun run;
  run.name = std::move(name);
  const auto metrics_path = dir / metrics_file_name();
  try {
    run.metrics = parse_metrics_csv(slurp(metrics_path));
  } catch (const ParseError& e) {
    throw ParseError(e.line(), metrics_path.string() + ": " + e.what());
  }
  for (auto key : {BreakdownKey::NArgs, BreakdownKey::NumPaths, BreakdownKey::Label}) {
    auto load = [&](const std::filesystem::path& p) {
      try {
        return parse_breakdown_csv(slurp(p));
      } catch (const ParseError& e) {
        throw ParseError(e.line(), p.string() + ": " + e.what());
      }
    };
    const auto p = dir / breakdown_file_name(key);
    if (std::filesystem::exists(p)) run.breakdowns[key] = load(p);
    const auto no = dir / split_breakdown_file_name(key, false);
    const auto yes = dir / split_breakdown_file_name(key, true);
    if (std::filesystem::exists(no) && std::filesystem::exists(yes)) run.label_splits[key] = {load(no), load(yes)};
  }
  return run;
}

std::string render_chart_svg(const std::string& title, const std::string& x_label,
                             const std::vector<ChartSeries>& series) {
  std::vector<std::vector<BreakdownRow>> tables;
  for (const auto& s : series) tables.push_back(s.rows);
  const auto keys = ordered_keys(tables);

  constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 60, kPlotHeight = 300;
  const double group_width = std::max(24.0, 12.0 * static_cast<double>(std::max<std::size_t>(1, series.size())) + 8);
  const double plot_width = std::max(200.0, group_width * static_cast<double>(keys.size()));
  const double width = kLeft + plot_width + kRight;
  const double height = kTop + kPlotHeight + kBottom + 20.0 * static_cast<double>(series.size());
  auto y_of = [&](double pct) { return kTop + kPlotHeight * (1.0 - pct / 100.0); };
  const double slot = keys.empty() ? plot_width : plot_width / static_cast<double>(keys.size());
  const double bar = (slot - 8) / static_cast<double>(std::max<std::size_t>(1, series.size()));

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
      << "</text>\n";
  for (int pct = 0; pct <= 100; pct += 20) {
    const double y = y_of(pct);
    svg << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(y) << "\" x2=\"" << num(kLeft + plot_width) << "\" y2=\""
        << num(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << pct
        << "</text>\n";
  }
  svg << "<text x=\"15\" y=\"" << num(kTop + kPlotHeight / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << num(kTop + kPlotHeight / 2) << ")\">% correct</text>\n";

  for (std::size_t k = 0; k < keys.size(); ++k) {
    const double x = kLeft + slot * static_cast<double>(k) + slot / 2;
    svg << "<text x=\"" << num(x) << "\" y=\"" << num(kTop + kPlotHeight + 16) << "\" text-anchor=\"middle\">"
        << escape_xml(keys[k]) << "</text>\n";
  }
  svg << "<text x=\"" << num(kLeft + plot_width / 2) << "\" y=\"" << num(kTop + kPlotHeight + 36)
      << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % std::size(kPalette)];
    std::string points;
    for (const auto& row : series[s].rows) {
      const auto k = static_cast<std::size_t>(std::find(keys.begin(), keys.end(), row.key) - keys.begin());
      const double x0 = kLeft + slot * static_cast<double>(k) + 4 + bar * static_cast<double>(s);
      const double y = y_of(row.percent_correct);
      svg << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(bar) << "\" height=\""
          << num(kTop + kPlotHeight - y) << "\" fill=\"" << color << "\" fill-opacity=\"0.6\"><title>"
          << escape_xml(series[s].name) << " " << escape_xml(row.key) << ": " << num(row.percent_correct) << "% of "
          << row.parsed << "</title></rect>\n";
      if (!points.empty()) points += ' ';
      points += num(x0 + bar / 2) + "," + num(y);
    }
    svg << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    const double ly = kTop + kPlotHeight + 52 + 20.0 * static_cast<double>(s);
    svg << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(ly - 10) << "\" width=\"12\" height=\"12\" fill=\"" << color
        << "\"/>\n";
    svg << "<text x=\"" << num(kLeft + 18) << "\" y=\"" << num(ly) << "\">" << escape_xml(series[s].name)
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string merged_breakdown_csv(const std::vector<ScoredRun>& runs, BreakdownKey key) {
  std::vector<std::vector<BreakdownRow>> tables;
  for (const auto& r : runs) {
    auto it = r.breakdowns.find(key);
    tables.push_back(it == r.breakdowns.end() ? std::vector<BreakdownRow>{} : it->second);
  }
  std::string out = "key";
  for (const auto& r : runs) out += "," + r.name;
  out += "\n";
  for (const auto& k : ordered_keys(tables)) {
    out += k;
    for (const auto& t : tables) {
      out += ",";
      auto it = std::find_if(t.begin(), t.end(), [&](const BreakdownRow& row) { return row.key == k; });
      if (it != t.end()) out += format_number(it->percent_correct);
    }
    out += "\n";
  }
  return out;
}

std::string merged_metrics_csv(const std::vector<ScoredRun>& runs) {
  std::string out = "metric";
  for (const auto& r : runs) out += "," + r.name;
  out += "\n";
  auto row = [&](const char* name, auto get) {
    out += name;
    for (const auto& r : runs) out += "," + get(r.metrics);
    out += "\n";
  };
  row("accuracy", [](const MetricsReport& m) { return format_number(m.accuracy); });
  row("f1", [](const MetricsReport& m) { return format_number(m.f1); });
  row("mcc", [](const MetricsReport& m) { return format_number(m.mcc); });
  row("recall", [](const MetricsReport& m) { return format_number(m.recall); });
  row("precision", [](const MetricsReport& m) { return format_number(m.precision); });
  row("parsed", [](const MetricsReport& m) { return std::to_string(m.counts.parsed()); });
  row("unparsed", [](const MetricsReport& m) { return std::to_string(m.counts.unparsed); });
  row("failed", [](const MetricsReport& m) { return std::to_string(m.counts.failed); });
  return out;
}

}  // namespace argbench
