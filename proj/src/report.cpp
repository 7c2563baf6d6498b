#include "omnibench/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "omnibench/corpus.hpp"
#include "omnibench/error.hpp"

namespace omnibench::report {
namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string join(const std::set<std::string>& items, char sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out.push_back(sep);
    out += s;
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double parse_percent(const std::string& field) {
  if (field.size() < 2 || field.back() != '%') fail(ErrorKind::Format, "expected a percentage, got '" + field + "'");
  try {
    std::size_t used = 0;
    const double v = std::stod(field.substr(0, field.size() - 1), &used);
    if (used != field.size() - 1) throw std::invalid_argument(field);
    return v / 100.0;
  } catch (const std::logic_error&) {
    fail(ErrorKind::Format, "expected a percentage, got '" + field + "'");
  }
}

nlohmann::ordered_json summary_json(const metrics::TrackSummary& s) {
  nlohmann::ordered_json j;
  j["S"] = s.S;
  j["T"] = s.T;
  j["U_gpu"] = s.U_gpu ? nlohmann::ordered_json(*s.U_gpu) : nlohmann::ordered_json(nullptr);
  j["U_mem"] = s.U_mem;
  j["n"] = s.n;
  return j;
}

nlohmann::ordered_json row_json(const Row& row) {
  const auto& e = row.enhancement;
  nlohmann::ordered_json j;
  j["domain"] = row.domain;
  j["base"] = summary_json(row.base);
  j["rag"] = summary_json(row.rag);
  j["improvements"] = e.improvements;
  j["transformation"] = e.transformation ? nlohmann::ordered_json(*e.transformation) : nlohmann::ordered_json(nullptr);
  j["ratios"] = {{"r_time", e.ratios.r_time}, {"r_gpu", e.ratios.r_gpu}, {"r_mem", e.ratios.r_mem}};
  j["weights"] = {{"w_time", e.weights.w_time}, {"w_gpu", e.weights.w_gpu}, {"w_mem", e.weights.w_mem}};
  j["flags"] = e.flags;
  j["formatted"] = {{"baseline", format_percent(row.base.S)},
                    {"rag", format_percent(row.rag.S)},
                    {"improvements", format_percent(e.improvements, true)},
                    {"transformation", format_transformation(e.transformation)}};
  return j;
}

std::vector<const Row*> sorted_rows(const ReportBundle& bundle) {
  std::vector<const Row*> rows;
  for (const auto& r : bundle.rows) rows.push_back(&r);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row* a, const Row* b) { return domain_rank(a->domain) < domain_rank(b->domain); });
  return rows;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string points(const std::vector<double>& fractions) {
  std::string out;
  const std::size_t n = fractions.size();
  for (std::size_t i = 0; i <= n; ++i) {  // repeat the first vertex to close
    const auto [x, y] = radar_vertex(i % n, n, fractions[i % n]);
    if (i) out.push_back(' ');
    out += fixed(x, 9) + "," + fixed(y, 9);
  }
  return out;
}

}  // namespace

std::size_t domain_rank(std::string_view name) {
  if (const auto tag = corpus::parse_domain(name)) return static_cast<std::size_t>(*tag);
  return corpus::kAllDomains.size();
}

double round_half_away(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  const double scaled = value * scale;
  // Absorb binary representation error so 0.5115 rounds like the decimal it denotes.
  const double nudged = scaled + std::copysign(1e-9 * std::max(1.0, std::abs(scaled)), scaled);
  return std::round(nudged) / scale;
}

std::string format_percent(double fraction, bool sign) {
  double pct = round_half_away(fraction * 100.0, 1);
  if (pct == 0.0) pct = 0.0;  // drop negative zero
  std::string out = fixed(pct, 1) + "%";
  if (sign && pct >= 0.0) out.insert(out.begin(), '+');
  return out;
}

std::string format_transformation(const std::optional<double>& t) {
  return t ? fixed(round_half_away(*t, 4), 4) : "n/a";
}

std::vector<TableRow> table_rows(const ReportBundle& bundle) {
  std::vector<TableRow> out;
  const auto convert = [](const Row& r) {
    return TableRow{r.domain, r.base.S, r.rag.S, r.enhancement.improvements, r.enhancement.transformation,
                    r.enhancement.flags};
  };
  for (const Row* r : sorted_rows(bundle)) out.push_back(convert(*r));
  if (bundle.overall && !bundle.rows.empty()) out.push_back(convert(*bundle.overall));
  return out;
}

std::string emit_table(const ReportBundle& bundle) { return emit_table(table_rows(bundle)); }

std::string emit_table(std::vector<TableRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const TableRow& a, const TableRow& b) { return domain_rank(a.domain) < domain_rank(b.domain); });
  std::string out = std::string(kTableHeader) + "\n";
  for (const auto& r : rows) {
    out += r.domain + "," + format_percent(r.baseline) + "," + format_percent(r.rag) + "," +
           format_percent(r.improvements, true) + "," + format_transformation(r.transformation) + "," +
           join(r.flags, ';') + "\n";
  }
  return out;
}

std::vector<TableRow> parse_table(std::string_view csv) {
  auto lines = split(csv, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines.front() != kTableHeader) fail(ErrorKind::Format, "report table: bad header");
  std::vector<TableRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split(lines[i], ',');
    if (fields.size() != 6) fail(ErrorKind::Format, "report table line " + std::to_string(i + 1) + ": expected 6 fields");
    TableRow r;
    r.domain = fields[0];
    r.baseline = parse_percent(fields[1]);
    r.rag = parse_percent(fields[2]);
    r.improvements = parse_percent(fields[3]);
    if (fields[4] != "n/a") {
      try {
        r.transformation = std::stod(fields[4]);
      } catch (const std::logic_error&) {
        fail(ErrorKind::Format, "report table line " + std::to_string(i + 1) + ": bad transformation");
      }
    }
    if (!fields[5].empty()) {
      for (auto& f : split(fields[5], ';')) r.flags.insert(std::move(f));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string emit_json(const ReportBundle& bundle) {
  nlohmann::ordered_json j;
  j["meta"] = bundle.meta;
  auto& rows = j["domains"] = nlohmann::ordered_json::array();
  for (const Row* r : sorted_rows(bundle)) rows.push_back(row_json(*r));
  j["overall"] = bundle.overall ? row_json(*bundle.overall) : nlohmann::ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::pair<double, double> radar_vertex(std::size_t index, std::size_t count, double fraction, double cx,
                                       double cy, double radius) {
  const double angle = 2.0 * std::numbers::pi * static_cast<double>(index) / static_cast<double>(count);
  const double r = fraction * radius;
  return {cx + r * std::sin(angle), cy - r * std::cos(angle)};
}

Radar emit_radar(const ReportBundle& bundle) {
  Radar out;
  const auto rows = sorted_rows(bundle);
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const Row* r : rows) j[r->domain] = {{"s_base", r->base.S}, {"s_rag", r->rag.S}};
  out.json = j.dump(2) + "\n";

  if (rows.size() < 3) {
    out.notices.push_back("radar plot skipped: needs at least 3 domains, have " + std::to_string(rows.size()));
    return out;
  }

  const std::size_t n = rows.size();
  std::vector<double> base;
  std::vector<double> rag;
  for (const Row* r : rows) {
    base.push_back(r->base.S);
    rag.push_back(r->rag.S);
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"640\" viewBox=\"0 0 600 640\">\n"
      << "  <rect width=\"600\" height=\"640\" fill=\"white\"/>\n";
  for (double ring : {0.25, 0.5, 0.75, 1.0}) {
    svg << "  <polyline class=\"ring\" points=\"" << points(std::vector<double>(n, ring))
        << "\" fill=\"none\" stroke=\"#cccccc\"/>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto [x, y] = radar_vertex(i, n, 1.0);
    const auto [lx, ly] = radar_vertex(i, n, 1.12);
    svg << "  <line class=\"axis\" x1=\"" << fixed(kRadarCenter, 9) << "\" y1=\"" << fixed(kRadarCenter, 9)
        << "\" x2=\"" << fixed(x, 9) << "\" y2=\"" << fixed(y, 9) << "\" stroke=\"#999999\"/>\n"
        << "  <text x=\"" << fixed(lx, 3) << "\" y=\"" << fixed(ly, 3)
        << "\" text-anchor=\"middle\" dominant-baseline=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << xml_escape(rows[i]->domain) << "</text>\n";
  }
  svg << "  <polyline class=\"base\" points=\"" << points(base)
      << "\" fill=\"#1f77b4\" fill-opacity=\"0.15\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n"
      << "  <polyline class=\"rag\" points=\"" << points(rag)
      << "\" fill=\"#d62728\" fill-opacity=\"0.15\" stroke=\"#d62728\" stroke-width=\"2\"/>\n"
      << "  <text x=\"20\" y=\"610\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#1f77b4\">S_base</text>\n"
      << "  <text x=\"90\" y=\"610\" font-family=\"sans-serif\" font-size=\"13\" fill=\"#d62728\">S_rag</text>\n"
      << "  <text x=\"160\" y=\"610\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666666\">"
         "rings at 25/50/75/100%</text>\n"
      << "</svg>\n";
  out.svg = svg.str();
  return out;
}

}  // namespace omnibench::report
