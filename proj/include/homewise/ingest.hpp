#pragma once

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "homewise/config.hpp"
#include "homewise/csv.hpp"
#include "homewise/domain.hpp"

namespace homewise {

struct RawDataset {
  std::string source_name;
  std::vector<RawRecord> rows;  // source order
  DataFormat format = DataFormat::Csv;
  std::vector<std::string> warnings;
  std::optional<RawFields> embedded_building;  // JSON documents may carry one
};

inline constexpr std::array<std::string_view, 4> kMeterColumns = {"meter_date", "kwh", "cost", "building_id"};

namespace detail {

inline std::string_view strip_bom(std::string_view text) {
  if (text.size() >= 3 && static_cast<unsigned char>(text[0]) == 0xEF &&
      static_cast<unsigned char>(text[1]) == 0xBB && static_cast<unsigned char>(text[2]) == 0xBF)
    text.remove_prefix(3);
  return text;
}

inline bool is_meter_column(std::string_view name) {
  return std::find(kMeterColumns.begin(), kMeterColumns.end(), name) != kMeterColumns.end();
}

}  // namespace detail

/// Parses meter CSV text. Header names match case-insensitively; columns
/// outside the schema are dropped with a warning.
inline RawDataset parse_meter_csv(std::string_view text, std::string source_name = "upload.csv") {
  auto records = csv::parse(detail::strip_bom(text));
  if (!records) throw Error(ErrorCode::UnparseableHeader, "unterminated quoted field");
  if (records->empty()) throw Error(ErrorCode::UnparseableHeader, "no header row");

  const auto& header = records->front();
  std::vector<std::optional<std::string>> column_map;
  std::set<std::string> seen;
  std::vector<std::string> ignored;
  for (const auto& raw_name : header) {
    auto name = detail::lower(detail::trim(raw_name));
    if (name.empty()) throw Error(ErrorCode::UnparseableHeader, "empty column name in header");
    if (!seen.insert(name).second)
      throw Error(ErrorCode::UnparseableHeader, "duplicate column '" + name + "' in header", {name});
    if (detail::is_meter_column(name)) {
      column_map.emplace_back(name);
    } else {
      column_map.emplace_back(std::nullopt);
      ignored.push_back(name);
    }
  }
  for (const char* required : {"meter_date", "kwh"})
    if (!seen.count(required))
      throw Error(ErrorCode::MissingColumn, std::string("missing column ") + required, {required});

  RawDataset out;
  out.source_name = std::move(source_name);
  out.format = DataFormat::Csv;
  for (const auto& name : ignored) out.warnings.push_back("unknown column '" + name + "' ignored");

  std::size_t index = 0;
  for (std::size_t r = 1; r < records->size(); ++r) {
    const auto& rec = (*records)[r];
    if (rec.size() == 1 && detail::trim(rec[0]).empty()) continue;  // blank line
    RawRecord row{index++, {}};
    for (std::size_t c = 0; c < rec.size() && c < column_map.size(); ++c)
      if (column_map[c]) row.fields[*column_map[c]] = rec[c];
    out.rows.push_back(std::move(row));
  }
  return out;
}

/// Flattens a JSON object into a string field bag. Nulls are dropped;
/// numbers keep their shortest round-trip text.
inline RawFields fields_from_json(const nlohmann::json& obj) {
  RawFields out;
  if (!obj.is_object()) throw Error(ErrorCode::InvalidArgument, "expected a JSON object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const auto& v = it.value();
    if (v.is_null()) continue;
    out[detail::lower(it.key())] = v.is_string() ? v.get<std::string>() : v.dump();
  }
  return out;
}

/// Parses a JSON meter document: either an array of reading objects or an
/// object `{"readings": [...], "building": {...}}`.
inline RawDataset parse_meter_json(std::string_view text, std::string source_name = "upload.json") {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(detail::strip_bom(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::UnparseableHeader, "document is not valid JSON", {e.what()});
  }
  RawDataset out;
  out.source_name = std::move(source_name);
  out.format = DataFormat::Json;

  const nlohmann::json* readings = nullptr;
  if (doc.is_array()) {
    readings = &doc;
  } else if (doc.is_object() && doc.contains("readings") && doc["readings"].is_array()) {
    readings = &doc["readings"];
    if (doc.contains("building") && doc["building"].is_object())
      out.embedded_building = fields_from_json(doc["building"]);
  } else {
    throw Error(ErrorCode::UnparseableHeader, "expected an array of readings or an object with 'readings'");
  }

  std::set<std::string> present;
  std::set<std::string> ignored;
  std::size_t index = 0;
  for (const auto& item : *readings) {
    RawRecord row{index++, {}};
    if (item.is_object()) {
      for (auto& [k, v] : fields_from_json(item)) {
        if (detail::is_meter_column(k)) {
          present.insert(k);
          row.fields[k] = v;
        } else {
          ignored.insert(k);
        }
      }
    }
    out.rows.push_back(std::move(row));
  }
  if (!out.rows.empty()) {
    for (const char* required : {"meter_date", "kwh"})
      if (!present.count(required))
        throw Error(ErrorCode::MissingColumn, std::string("missing column ") + required, {required});
  }
  for (const auto& name : ignored) out.warnings.push_back("unknown column '" + name + "' ignored");
  return out;
}

/// Serializes a series in the canonical column order. Values use shortest
/// round-trip text so re-parsing yields identical doubles.
inline std::string write_meter_csv(const MeterSeries& series) {
  std::vector<std::string> header = {"meter_date", "kwh", "cost"};
  if (series.building_id) header.emplace_back("building_id");
  csv::Writer w(header);
  for (const auto& r : series) {
    std::vector<std::string> cells = {r.date.to_string(), csv::number(r.kwh), r.cost ? csv::number(*r.cost) : ""};
    if (series.building_id) cells.push_back(*series.building_id);
    w.row(cells);
  }
  return w.str();
}

struct Gap {
  Date last_before;  // last reading before the gap
  Date first_after;  // first reading after the gap
  long missing_days = 0;
};

struct CleanResult {
  MeterSeries series;
  std::size_t filled_days = 0;
  std::vector<Gap> holes;  // gaps longer than the fill limit, left open
  std::vector<std::string> warnings;
};

/// Forward-fills internal gaps of up to `max_gap_days` missing days by copying
/// the previous reading's kWh (cost left absent). Longer gaps stay open and
/// are reported as `gap_exceeds_limit`. Nothing is filled before the first
/// reading.
inline CleanResult clean_series(const MeterSeries& s, int max_gap_days = 3) {
  if (max_gap_days < 0) throw Error(ErrorCode::InvalidArgument, "max_gap_days must be >= 0");
  CleanResult out;
  out.series.building_id = s.building_id;
  out.series.readings.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& cur = s[i];
    if (i > 0) {
      const auto& prev = s[i - 1];
      const long step = prev.date.days_until(cur.date);
      if (step <= 0) throw Error(ErrorCode::InvalidArgument, "series is not strictly date-ordered");
      const long missing = step - 1;
      if (missing > 0 && missing <= max_gap_days) {
        for (long d = 1; d <= missing; ++d) {
          out.series.readings.push_back({prev.date.plus_days(d), prev.kwh, std::nullopt, true});
          ++out.filled_days;
        }
      } else if (missing > max_gap_days) {
        out.holes.push_back({prev.date, cur.date, missing});
        out.warnings.push_back("gap_exceeds_limit: " + std::to_string(missing) + " days missing between " +
                               prev.date.to_string() + " and " + cur.date.to_string());
      }
    }
    out.series.readings.push_back(cur);
  }
  return out;
}

/// Degree days for a zone. User values win (source = user_supplied);
/// otherwise the regional defaults table applies. Monthly values spread the
/// annual total by the configured month-of-year profile.
inline ClimateRecord resolve_climate(int zone, std::optional<double> user_hdd = std::nullopt,
                                     std::optional<double> user_cdd = std::nullopt,
                                     const ClimateDefaults& defaults = {}) {
  if (zone < 1 || zone > 6)
    throw Error(ErrorCode::UnknownZone, "climate zone must be 1-6", {std::to_string(zone)});
  for (auto v : {user_hdd, user_cdd})
    if (v && !(*v >= 0.0 && std::isfinite(*v)))
      throw Error(ErrorCode::OutOfRange, "degree days must be finite and >= 0");

  const auto& row = defaults.zones[zone - 1];
  ClimateRecord rec;
  rec.zone = zone;
  rec.hdd_annual = user_hdd.value_or(row.hdd_annual);
  rec.cdd_annual = user_cdd.value_or(row.cdd_annual);
  rec.source = (user_hdd || user_cdd) ? ClimateSource::UserSupplied : ClimateSource::RegionalDefault;
  for (std::size_t m = 0; m < 12; ++m) {
    rec.hdd_monthly[m] = rec.hdd_annual * defaults.hdd_profile[m];
    rec.cdd_monthly[m] = rec.cdd_annual * defaults.cdd_profile[m];
  }
  return rec;
}

inline ClimateRecord resolve_climate(const BuildingDescriptor& b, const ClimateDefaults& defaults = {}) {
  return resolve_climate(b.climate_zone, b.user_hdd_annual, b.user_cdd_annual, defaults);
}

/// Builds a climate record from explicit monthly degree days. Annual totals
/// are the monthly sums.
inline ClimateRecord climate_from_monthly(int zone, const std::array<double, 12>& hdd,
                                          const std::array<double, 12>& cdd) {
  if (zone < 1 || zone > 6) throw Error(ErrorCode::UnknownZone, "climate zone must be 1-6");
  ClimateRecord rec;
  rec.zone = zone;
  rec.source = ClimateSource::UserSupplied;
  rec.hdd_monthly = hdd;
  rec.cdd_monthly = cdd;
  for (std::size_t m = 0; m < 12; ++m) {
    if (!(hdd[m] >= 0.0) || !(cdd[m] >= 0.0)) throw Error(ErrorCode::OutOfRange, "degree days must be >= 0");
    rec.hdd_annual += hdd[m];
    rec.cdd_annual += cdd[m];
  }
  return rec;
}

}  // namespace homewise
