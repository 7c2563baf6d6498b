#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "omnibench/metrics.hpp"

namespace omnibench::report {

struct Row {
  std::string domain;
  metrics::TrackSummary base;
  metrics::TrackSummary rag;
  metrics::EnhancementReport enhancement;
};

struct ReportBundle {
  std::vector<Row> rows;  // emitted in canonical domain order
  std::optional<Row> overall;
  /// Deterministic run description (no timestamps), copied into report.json.
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
};

/// One line of the CSV table, with fractions rather than formatted text.
struct TableRow {
  std::string domain;
  double baseline = 0.0;
  double rag = 0.0;
  double improvements = 0.0;
  std::optional<double> transformation;
  std::set<std::string> flags;
};

inline constexpr const char* kTableHeader = "domain,baseline,rag,improvements,transformation,flags";

/// Position of a domain name in the canonical order; unknown names (e.g.
/// "Overall") sort after the nine domains.
std::size_t domain_rank(std::string_view name);

/// Round half away from zero to `decimals` places.
double round_half_away(double value, int decimals);

/// Fraction -> "51.1%"; with `sign`, "+17.1%" / "-25.6%".
std::string format_percent(double fraction, bool sign = false);
std::string format_transformation(const std::optional<double>& t);

std::vector<TableRow> table_rows(const ReportBundle& bundle);

std::string emit_table(const ReportBundle& bundle);
std::string emit_table(std::vector<TableRow> rows);
/// Inverse of emit_table at the printed precision. Throws Format.
std::vector<TableRow> parse_table(std::string_view csv);

std::string emit_json(const ReportBundle& bundle);

struct Radar {
  std::string json;
  /// Absent when fewer than three domains are available.
  std::optional<std::string> svg;
  std::vector<std::string> notices;
};

inline constexpr double kRadarCenter = 300.0;
inline constexpr double kRadarRadius = 220.0;

/// Vertex for axis `index` of `count`, at `fraction` of the outer radius.
/// Axis 0 points to 12 o'clock; axes proceed clockwise at equal angles.
std::pair<double, double> radar_vertex(std::size_t index, std::size_t count, double fraction,
                                       double cx = kRadarCenter, double cy = kRadarCenter,
                                       double radius = kRadarRadius);

Radar emit_radar(const ReportBundle& bundle);

}  // namespace omnibench::report
