#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "homewise/config.hpp"
#include "homewise/csv.hpp"
#include "homewise/serialize.hpp"

namespace homewise {

inline constexpr std::string_view kTimestampSentinel = "1970-01-01T00:00:00Z";
inline constexpr int kReportSchemaVersion = 1;

struct ReportBundle {
  BuildingDescriptor building;  // building_id holds the pseudonym
  ValidationReport validation;
  std::size_t filled_days = 0;
  std::vector<std::string> cleaning_warnings;
  std::optional<ClimateRecord> climate;
  EnergyProfile profile;
  std::vector<AnomalyFlag> flags;
  std::optional<BaselineModel> baseline;
  std::vector<MonthlyPrediction> baseline_monthly;
  LoadDecomposition loads;
  std::vector<ScenarioResult> scenarios;
  ComparisonTable table;  // no rows when no scenarios ran
  RecommendationSet recommendations;
  std::vector<std::string> assumptions;
  std::string generated_at;
  std::string tool_version = std::string(kToolVersion);
  Json config_snapshot;
  std::uint64_t seed = 0;          // run seed as given
  std::uint64_t dataset_seed = 0;  // derived from the run seed and pseudonym
};

struct ReportInputs {
  BuildingDescriptor building;
  std::string pseudonym;
  ValidationReport validation;
  std::size_t filled_days = 0;
  std::vector<std::string> cleaning_warnings;
  std::optional<ClimateRecord> climate;
  EnergyProfile profile;
  std::vector<AnomalyFlag> flags;
  std::optional<BaselineModel> baseline;
  LoadDecomposition loads;
  std::vector<ScenarioResult> scenarios;
  std::optional<ComparisonTable> table;
  RecommendationSet recommendations;
};

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
inline std::string utc_timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Replaces every UTC timestamp of the form YYYY-MM-DDTHH:MM:SSZ with the
/// fixed sentinel. Calendar dates without a time part are left alone.
inline std::string normalize_timestamps(const std::string& text) {
  static const std::regex kPattern(R"(\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}Z)");
  return std::regex_replace(text, kPattern, std::string(kTimestampSentinel));
}

inline ReportBundle normalized(ReportBundle b) {
  b.generated_at = std::string(kTimestampSentinel);
  return b;
}

namespace detail {

inline std::string climate_assumption(const ClimateRecord& c) {
  if (c.source == ClimateSource::UserSupplied)
    return "Degree days: user supplied annual HDD " + csv::number(c.hdd_annual) + " and CDD " +
           csv::number(c.cdd_annual) + ", spread over months by the regional profile";
  return "Degree days: regional defaults for climate zone " + std::to_string(c.zone) + " (HDD " +
         csv::number(c.hdd_annual) + ", CDD " + csv::number(c.cdd_annual) + ", base 18 degC)";
}

inline std::string decomposition_assumption(const LoadDecomposition& d) {
  if (d.method == DecompositionMethod::RegressionSplit)
    return "Load split: heating and cooling from baseline degree-day coefficients times annual degree days";
  return "Load split: heating and cooling from fixed shares by heating system and climate zone";
}

}  // namespace detail

/// Assembles a bundle. Assumptions from every stage are merged in first-seen
/// order without duplicates.
inline ReportBundle build_report(ReportInputs in, const Config& cfg, std::uint64_t seed,
                                 std::uint64_t dataset_seed,
                                 std::optional<std::string> generated_at = std::nullopt) {
  ReportBundle b;
  b.building = std::move(in.building);
  b.building.building_id = in.pseudonym.empty() ? std::nullopt : std::optional<std::string>(in.pseudonym);
  b.validation = std::move(in.validation);
  b.filled_days = in.filled_days;
  b.cleaning_warnings = std::move(in.cleaning_warnings);
  b.climate = std::move(in.climate);
  b.profile = std::move(in.profile);
  b.flags = std::move(in.flags);
  b.baseline = std::move(in.baseline);
  if (b.baseline) b.baseline_monthly = predict_baseline(*b.baseline, b.climate, b.building);
  b.loads = in.loads;
  b.scenarios = std::move(in.scenarios);
  if (in.table) b.table = std::move(*in.table);
  b.recommendations = std::move(in.recommendations);
  b.generated_at = generated_at.value_or(utc_timestamp_now());
  b.config_snapshot = config_snapshot(cfg);
  b.seed = seed;
  b.dataset_seed = dataset_seed;

  std::set<std::string> seen;
  auto add = [&](const std::string& a) {
    if (seen.insert(a).second) b.assumptions.push_back(a);
  };
  add("Energy intensity annualized as mean daily kWh x 365.25 / floor area");
  if (b.climate) add(detail::climate_assumption(*b.climate));
  if (b.baseline)
    for (const auto& n : b.baseline->notes) add("Baseline: " + n);
  add(detail::decomposition_assumption(b.loads));
  add(detail::lighting_assumption(cfg.lighting));
  for (const auto& s : b.scenarios)
    for (const auto& a : s.assumptions) add(a);
  return b;
}

/// Machine-readable report. Key order is fixed; a missing baseline is null.
inline Json report_json(const ReportBundle& b) {
  Json j;
  j["schema_version"] = kReportSchemaVersion;
  j["tool_version"] = b.tool_version;
  j["generated_at"] = b.generated_at;
  j["seed"] = b.seed;
  j["dataset_seed"] = b.dataset_seed;
  j["config"] = b.config_snapshot;
  j["building"] = to_json(b.building);
  j["validation"] = to_json(b.validation);
  j["cleaning"] = {{"filled_days", b.filled_days}, {"warnings", b.cleaning_warnings}};
  j["climate"] = b.climate ? to_json(*b.climate) : Json(nullptr);
  j["profile"] = to_json(b.profile);
  j["anomalies"] = to_json(b.flags);
  j["baseline"] = b.baseline ? to_json(*b.baseline) : Json(nullptr);
  j["baseline_monthly"] = to_json(b.baseline_monthly);
  j["loads"] = to_json(b.loads);
  Json scenarios = Json::array();
  for (const auto& s : b.scenarios) scenarios.push_back(to_json(s));
  j["scenarios"] = scenarios;
  j["comparison"] = to_json(b.table);
  const Json recs = to_json(b.recommendations);
  j["recommendations"] = recs["recommendations"];
  j["advisories"] = recs["advisories"];
  j["assumptions"] = b.assumptions;
  return j;
}

inline std::string export_json(const ReportBundle& b) { return report_json(b).dump(2) + "\n"; }

struct ExportFile {
  std::string name;
  std::string content;
};

inline std::string profile_monthly_csv(const EnergyProfile& p) {
  csv::Writer w({"month", "kwh_sum", "kwh_per_m2"});
  for (const auto& m : p.monthly)
    w.row({m.month.to_string(), csv::number(m.kwh_sum), csv::number(m.kwh_sum / p.floor_area_m2)});
  return w.str();
}

inline std::string anomalies_csv(const std::vector<AnomalyFlag>& flags) {
  csv::Writer w({"date", "kind", "method", "score", "threshold"});
  for (const auto& f : flags)
    w.row({f.date.to_string(), std::string(enum_name(f.kind)), std::string(enum_name(f.method)),
           csv::number(f.score), csv::number(f.threshold)});
  return w.str();
}

inline std::string scenarios_csv(const ComparisonTable& t) {
  csv::Writer w({"kind", "kwh_saved_yr", "cost_saved_yr", "capex_nzd", "payback_years"});
  for (const auto& r : t.rows)
    w.row({r.kind, csv::number(r.kwh_saved_yr), csv::number(r.cost_saved_yr), csv::number(r.capex),
           r.payback_years ? csv::number(*r.payback_years) : std::string()});
  return w.str();
}

inline std::vector<ExportFile> export_csv(const ReportBundle& b) {
  return {{"profile_monthly.csv", profile_monthly_csv(b.profile)},
          {"anomalies.csv", anomalies_csv(b.flags)},
          {"scenarios.csv", scenarios_csv(b.table)}};
}

namespace detail {

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string fixed(double v, int digits = 1) {
  if (!std::isfinite(v)) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  if (s == "-0.0" || s == "-0.00" || s == "-0") s.erase(0, 1);
  return s;
}

inline std::string payback_text(const std::optional<double>& p) {
  if (!p) return "n/a";
  if (*p == 0.0) return "immediate";
  return fixed(*p, 1) + " yr";
}

struct ChartFrame {
  double width = 720, height = 240, left = 48, right = 12, top = 12, bottom = 28;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

inline std::string svg_open(const ChartFrame& f, std::string_view label) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + fixed(f.width, 0) + " " + fixed(f.height, 0) +
         "\" role=\"img\" aria-label=\"" + html_escape(label) + "\">\n";
}

inline std::string svg_axes(const ChartFrame& f, double ymax, std::string_view first, std::string_view last) {
  std::string s;
  const double x0 = f.left, y0 = f.top + f.plot_h();
  s += "<line x1=\"" + fixed(x0) + "\" y1=\"" + fixed(f.top) + "\" x2=\"" + fixed(x0) + "\" y2=\"" + fixed(y0) +
       "\" class=\"axis\"/>\n";
  s += "<line x1=\"" + fixed(x0) + "\" y1=\"" + fixed(y0) + "\" x2=\"" + fixed(f.left + f.plot_w()) + "\" y2=\"" +
       fixed(y0) + "\" class=\"axis\"/>\n";
  s += "<text x=\"" + fixed(x0 - 4) + "\" y=\"" + fixed(f.top + 10) + "\" text-anchor=\"end\">" + fixed(ymax, 0) +
       "</text>\n";
  s += "<text x=\"" + fixed(x0 - 4) + "\" y=\"" + fixed(y0) + "\" text-anchor=\"end\">0</text>\n";
  s += "<text x=\"" + fixed(x0) + "\" y=\"" + fixed(f.height - 8) + "\">" + html_escape(first) + "</text>\n";
  s += "<text x=\"" + fixed(f.left + f.plot_w()) + "\" y=\"" + fixed(f.height - 8) + "\" text-anchor=\"end\">" +
       html_escape(last) + "</text>\n";
  return s;
}

inline std::string daily_chart(const ReportBundle& b) {
  const auto& daily = b.profile.daily;
  if (daily.empty()) return {};
  ChartFrame f;
  double ymax = 0.0;
  for (const auto& d : daily) ymax = std::max(ymax, d.kwh);
  if (ymax <= 0.0) ymax = 1.0;
  const Date first = daily.front().date;
  const double span = std::max<long>(1, first.days_until(daily.back().date));
  auto x_of = [&](Date d) { return f.left + f.plot_w() * static_cast<double>(first.days_until(d)) / span; };
  auto y_of = [&](double v) { return f.top + f.plot_h() * (1.0 - v / ymax); };

  std::string s = svg_open(f, "Daily consumption");
  s += svg_axes(f, ymax, daily.front().date.to_string(), daily.back().date.to_string());
  s += "<polyline class=\"daily\" points=\"";
  for (std::size_t i = 0; i < daily.size(); ++i) {
    if (i) s += ' ';
    s += fixed(x_of(daily[i].date)) + "," + fixed(y_of(daily[i].kwh));
  }
  s += "\"/>\n";
  std::string rolling;
  for (std::size_t i = 0; i < daily.size(); ++i) {
    if (!b.profile.rolling_30[i]) continue;
    if (!rolling.empty()) rolling += ' ';
    rolling += fixed(x_of(daily[i].date)) + "," + fixed(y_of(*b.profile.rolling_30[i]));
  }
  if (!rolling.empty()) s += "<polyline class=\"rolling\" points=\"" + rolling + "\"/>\n";
  std::set<Date> marked;
  for (const auto& flag : b.flags) {
    if (!marked.insert(flag.date).second) continue;
    const auto it = std::lower_bound(daily.begin(), daily.end(), flag.date,
                                     [](const DailyPoint& p, Date d) { return p.date < d; });
    if (it == daily.end() || it->date != flag.date) continue;
    s += "<circle class=\"flag\" cx=\"" + fixed(x_of(it->date)) + "\" cy=\"" + fixed(y_of(it->kwh)) +
         "\" r=\"3.5\"><title>" + it->date.to_string() + "</title></circle>\n";
  }
  s += "</svg>\n";
  return s;
}

inline std::string monthly_chart(const ReportBundle& b) {
  const auto& monthly = b.profile.monthly;
  if (monthly.empty()) return {};
  ChartFrame f;
  double ymax = 0.0;
  for (const auto& m : monthly) ymax = std::max(ymax, m.kwh_sum);
  if (ymax <= 0.0) ymax = 1.0;
  const double slot = f.plot_w() / static_cast<double>(monthly.size());
  std::string s = svg_open(f, "Monthly consumption");
  s += svg_axes(f, ymax, monthly.front().month.to_string(), monthly.back().month.to_string());
  for (std::size_t i = 0; i < monthly.size(); ++i) {
    const double h = f.plot_h() * monthly[i].kwh_sum / ymax;
    s += "<rect class=\"bar\" x=\"" + fixed(f.left + slot * static_cast<double>(i) + slot * 0.1) + "\" y=\"" +
         fixed(f.top + f.plot_h() - h) + "\" width=\"" + fixed(slot * 0.8) + "\" height=\"" + fixed(h) +
         "\"><title>" + monthly[i].month.to_string() + ": " + fixed(monthly[i].kwh_sum) + " kWh</title></rect>\n";
  }
  s += "</svg>\n";
  return s;
}

inline constexpr std::string_view kReportStyle = R"(body{font-family:system-ui,sans-serif;margin:0;color:#1d2b36;background:#f6f8f7}
header.brand{background:#1f5f4a;color:#fff;padding:18px 32px}
header.brand .logo{font-size:1.6em;font-weight:700;letter-spacing:.04em}
header.brand p{margin:4px 0 0;opacity:.85}
main{max-width:960px;margin:0 auto;padding:8px 32px 48px}
section{background:#fff;border-radius:6px;padding:12px 20px;margin-top:18px}
table{border-collapse:collapse;width:100%}
th,td{text-align:left;padding:4px 8px;border-bottom:1px solid #dde3e0}
td.num{text-align:right;font-variant-numeric:tabular-nums}
svg{width:100%;height:auto}
svg text{font-size:11px;fill:#4a5a55}
.axis{stroke:#8a9a95}
.daily{fill:none;stroke:#2f7fb8;stroke-width:1}
.rolling{fill:none;stroke:#e08a1e;stroke-width:2}
.flag{fill:#c0392b}
.bar{fill:#3c9a77}
)";

}  // namespace detail

/// Self-contained HTML page: summary, profile charts, anomalies, scenario
/// comparison, recommendations and the assumptions appendix.
inline std::string export_html_report(const ReportBundle& b) {
  using detail::fixed;
  using detail::html_escape;
  std::string h;
  h += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  h += "<title>HomeWise energy report</title>\n<style>\n" + std::string(detail::kReportStyle) + "</style>\n</head>\n";
  h += "<body>\n<header class=\"brand\">\n<div class=\"logo\">HomeWise</div>\n";
  h += "<p>Household energy efficiency report, powered by homewise " + html_escape(b.tool_version) + "</p>\n";
  h += "</header>\n<main>\n";

  const auto& p = b.profile;
  h += "<section id=\"summary\">\n<h2>Summary</h2>\n<table>\n";
  auto kv = [&](std::string_view k, const std::string& v) {
    h += "<tr><th>" + html_escape(k) + "</th><td>" + html_escape(v) + "</td></tr>\n";
  };
  kv("Building", b.building.building_id.value_or("unidentified"));
  kv("Generated", b.generated_at);
  kv("Seed", std::to_string(b.seed));
  kv("Floor area", fixed(b.building.floor_area_m2) + " m2");
  kv("Climate zone", std::to_string(b.building.climate_zone));
  kv("Period", p.daily.empty() ? std::string("-")
                               : p.daily.front().date.to_string() + " to " + p.daily.back().date.to_string());
  kv("Days covered", std::to_string(p.days_covered) + " (" + std::to_string(b.filled_days) + " forward-filled)");
  kv("Total consumption", fixed(p.total_kwh) + " kWh");
  kv("Energy intensity", fixed(p.kwh_per_m2_annualized) + " kWh/m2/yr");
  kv("Peak / off-peak day", fixed(p.peak_load, 2) + " / " + fixed(p.offpeak_load, 2) + " kWh");
  kv("Anomalies flagged", std::to_string(b.flags.size()));
  if (b.baseline) {
    kv("Baseline", b.baseline->kind == BaselineKind::Regression
                       ? "degree-day regression, r2 " + fixed(b.baseline->r_squared, 3)
                       : "moving average, " + fixed(b.baseline->daily_mean_kwh, 2) + " kWh/day");
  } else {
    kv("Baseline", "not fitted");
  }
  kv("Annual load split",
     "heating " + fixed(b.loads.heating_kwh_yr, 0) + ", cooling " + fixed(b.loads.cooling_kwh_yr, 0) +
         ", lighting " + fixed(b.loads.lighting_kwh_yr, 0) + ", base " + fixed(b.loads.base_kwh_yr, 0) + " kWh/yr");
  h += "</table>\n</section>\n";

  h += "<section id=\"profile\">\n<h2>Consumption profile</h2>\n";
  h += "<h3>Daily kWh with 30-day rolling mean</h3>\n" + detail::daily_chart(b);
  h += "<h3>Monthly kWh</h3>\n" + detail::monthly_chart(b);
  h += "<table>\n<tr><th>Month</th><th>kWh</th><th>kWh/m2</th><th>Days</th></tr>\n";
  for (const auto& m : p.monthly)
    h += "<tr><td>" + m.month.to_string() + "</td><td class=\"num\">" + fixed(m.kwh_sum) + "</td><td class=\"num\">" +
         fixed(m.kwh_sum / p.floor_area_m2, 2) + "</td><td class=\"num\">" + std::to_string(m.days) + "</td></tr>\n";
  h += "</table>\n</section>\n";

  h += "<section id=\"anomalies\">\n<h2>Anomalies</h2>\n";
  if (b.flags.empty()) {
    h += "<p class=\"empty\">None detected.</p>\n";
  } else {
    h += "<table>\n<tr><th>Date</th><th>Kind</th><th>Method</th><th>Score</th><th>Threshold</th></tr>\n";
    for (const auto& f : b.flags)
      h += "<tr><td>" + f.date.to_string() + "</td><td>" + std::string(enum_name(f.kind)) + "</td><td>" +
           std::string(enum_name(f.method)) + "</td><td class=\"num\">" + fixed(f.score, 3) +
           "</td><td class=\"num\">" + fixed(f.threshold, 3) + "</td></tr>\n";
    h += "</table>\n";
  }
  h += "</section>\n";

  h += "<section id=\"scenarios\">\n<h2>Scenario comparison</h2>\n";
  if (b.table.rows.empty()) {
    h += "<p class=\"empty\">No scenarios were run.</p>\n";
  } else {
    h += "<table>\n<tr><th>Measure</th><th>kWh saved/yr</th><th>NZD saved/yr</th><th>Capex NZD</th>"
         "<th>Payback</th></tr>\n";
    for (const auto& r : b.table.rows)
      h += "<tr><td>" + html_escape(r.kind) + "</td><td class=\"num\">" + fixed(r.kwh_saved_yr) +
           "</td><td class=\"num\">" + fixed(r.cost_saved_yr, 2) + "</td><td class=\"num\">" + fixed(r.capex, 2) +
           "</td><td class=\"num\">" + detail::payback_text(r.payback_years) + "</td></tr>\n";
    h += "</table>\n";
  }
  h += "</section>\n";

  h += "<section id=\"recommendations\">\n<h2>Recommendations</h2>\n";
  if (b.recommendations.recommendations.empty()) {
    h += "<p class=\"empty\">No measures recommended.</p>\n";
  } else {
    h += "<ol>\n";
    for (const auto& r : b.recommendations.recommendations)
      h += "<li><strong>" + html_escape(r.kind) + "</strong>: saves " + fixed(r.kwh_saved_yr) + " kWh/yr (" +
           fixed(r.cost_saved_yr, 2) + " NZD/yr), capex " + fixed(r.capex, 2) + " NZD, payback " +
           detail::payback_text(r.payback_years) + ". Evidence: " + html_escape(r.evidence) + ".</li>\n";
    h += "</ol>\n";
  }
  for (const auto& a : b.recommendations.advisories) {
    h += "<p class=\"advisory\"><strong>" + html_escape(a.code) + "</strong>: " + html_escape(a.message);
    if (!a.dates.empty()) {
      h += " (";
      for (std::size_t i = 0; i < a.dates.size(); ++i) h += (i ? ", " : "") + html_escape(a.dates[i]);
      h += ")";
    }
    h += "</p>\n";
  }
  h += "</section>\n";

  h += "<section id=\"assumptions\">\n<h2>Assumptions</h2>\n<ul>\n";
  for (const auto& a : b.assumptions) h += "<li>" + html_escape(a) + "</li>\n";
  h += "</ul>\n</section>\n</main>\n</body>\n</html>\n";
  return h;
}

enum class ExportFormat { Json, Html, Csv };

inline ExportFormat parse_export_format(std::string_view s) {
  const auto v = detail::lower(detail::trim(s));
  if (v == "json") return ExportFormat::Json;
  if (v == "html") return ExportFormat::Html;
  if (v == "csv") return ExportFormat::Csv;
  throw Error(ErrorCode::UnknownFormat, "unknown export format '" + std::string(s) + "'", {std::string(s)});
}

/// Export files for one format, named as written to disk.
inline std::vector<ExportFile> export_files(const ReportBundle& b, ExportFormat format) {
  switch (format) {
    case ExportFormat::Json: return {{"report.json", export_json(b)}};
    case ExportFormat::Html: return {{"report.html", export_html_report(b)}};
    case ExportFormat::Csv: return export_csv(b);
  }
  return {};
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create directory " + path.parent_path().string());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

inline std::vector<std::filesystem::path> write_files(const std::filesystem::path& dir,
                                                      const std::vector<ExportFile>& files) {
  std::vector<std::filesystem::path> written;
  for (const auto& f : files) {
    write_text_file(dir / f.name, f.content);
    written.push_back(dir / f.name);
  }
  return written;
}

inline std::vector<std::filesystem::path> write_report(const ReportBundle& b, const std::filesystem::path& dir,
                                                       ExportFormat format) {
  return write_files(dir, export_files(b, format));
}

}  // namespace homewise
