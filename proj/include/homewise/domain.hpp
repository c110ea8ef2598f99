#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "homewise/config.hpp"
#include "homewise/date.hpp"
#include "homewise/enums.hpp"
#include "homewise/error.hpp"

namespace homewise {

struct MeterReading {
  Date date;
  double kwh = 0.0;
  std::optional<double> cost;
  bool imputed = false;  // produced by forward fill, not read from the source

  friend bool operator==(const MeterReading&, const MeterReading&) = default;
};

/// Strictly date-ordered daily readings for one building.
struct MeterSeries {
  std::optional<std::string> building_id;
  std::vector<MeterReading> readings;

  std::size_t size() const { return readings.size(); }
  bool empty() const { return readings.empty(); }
  auto begin() const { return readings.begin(); }
  auto end() const { return readings.end(); }
  const MeterReading& operator[](std::size_t i) const { return readings[i]; }

  std::vector<double> kwh_values() const {
    std::vector<double> out;
    out.reserve(readings.size());
    for (const auto& r : readings) out.push_back(r.kwh);
    return out;
  }

  friend bool operator==(const MeterSeries&, const MeterSeries&) = default;
};

/// One source record before validation. Keys are lower-cased schema names.
struct RawRecord {
  std::size_t row_index = 0;
  std::map<std::string, std::string> fields;

  const std::string* get(const std::string& key) const {
    auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  }
};

struct Rejection {
  std::size_t row_index = 0;
  ReasonCode reason = ReasonCode::MissingField;
  std::string message;
};

struct ValidationReport {
  std::size_t input_rows = 0;
  std::size_t accepted_rows = 0;
  std::vector<Rejection> rejected_rows;
  std::vector<std::string> warnings;
};

struct BuildingDescriptor {
  std::optional<std::string> building_id;
  double floor_area_m2 = 0.0;
  int occupants = 1;
  std::optional<int> construction_year;
  std::optional<double> wall_r;
  std::optional<double> roof_r;
  WindowType window_type = WindowType::Double;
  AirLeakage air_leakage_est = AirLeakage::Typical;
  HvacType hvac_type = HvacType::ResistiveHeaters;
  WaterHeating water_heating = WaterHeating::ElectricCylinder;
  int lighting_count_led = 0;
  int lighting_count_halogen = 0;
  std::optional<InsulationLevel> insulation_level;
  int climate_zone = 1;
  double solar_pv_kw = 0.0;
  double electricity_price = 0.32;  // NZD/kWh
  // Stored for completeness; no calculator consumes it.
  bool mechanical_ventilation = false;
  // Optional user-supplied degree days overriding the regional defaults.
  std::optional<double> user_hdd_annual;
  std::optional<double> user_cdd_annual;
};

struct ClimateRecord {
  int zone = 1;
  double hdd_annual = 0.0;
  double cdd_annual = 0.0;
  std::array<double, 12> hdd_monthly{};
  std::array<double, 12> cdd_monthly{};
  ClimateSource source = ClimateSource::RegionalDefault;
};

struct ValidatedSeries {
  MeterSeries series;
  ValidationReport report;
};

struct ValidatedBuilding {
  BuildingDescriptor building;
  ValidationReport report;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
    s.remove_suffix(1);
  return s;
}

inline std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

/// Parses a full-string decimal number. Non-finite values are rejected.
inline std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || p != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
  return value;
}

inline std::optional<int> parse_integer(std::string_view text) {
  auto v = parse_number(text);
  if (!v || std::floor(*v) != *v || std::abs(*v) > 1e9) return std::nullopt;
  return static_cast<int>(*v);
}

inline std::optional<bool> parse_bool(std::string_view text) {
  const auto t = lower(trim(text));
  if (t == "true" || t == "yes" || t == "1") return true;
  if (t == "false" || t == "no" || t == "0" || t.empty()) return false;
  return std::nullopt;
}

}  // namespace detail

/// Validates raw meter rows into a strictly ordered series.
///
/// Each rejected row carries exactly one reason code. When a date repeats,
/// the later row wins and the earlier one is reported as `duplicate_date`.
/// Timestamps are truncated to their calendar date with a warning.
inline ValidatedSeries validate_readings(std::span<const RawRecord> rows) {
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "no rows to validate");

  ValidatedSeries out;
  auto& report = out.report;
  report.input_rows = rows.size();

  struct Candidate {
    std::size_t row_index;
    MeterReading reading;
  };
  std::map<Date, Candidate> by_date;
  std::size_t truncated = 0;
  bool mixed_ids = false;

  auto reject = [&](std::size_t row, ReasonCode reason, std::string msg) {
    report.rejected_rows.push_back({row, reason, std::move(msg)});
  };

  for (const auto& row : rows) {
    const auto* date_text = row.get("meter_date");
    const auto* kwh_text = row.get("kwh");
    if (!date_text || detail::trim(*date_text).empty()) {
      reject(row.row_index, ReasonCode::MissingField, "meter_date is missing");
      continue;
    }
    if (!kwh_text || detail::trim(*kwh_text).empty()) {
      reject(row.row_index, ReasonCode::MissingField, "kwh is missing");
      continue;
    }
    auto parsed = parse_date(*date_text);
    if (!parsed) {
      reject(row.row_index, ReasonCode::BadDate, "unparseable meter_date '" + *date_text + "'");
      continue;
    }
    auto kwh = detail::parse_number(*kwh_text);
    if (!kwh) {
      reject(row.row_index, ReasonCode::OutOfRange, "kwh is not a finite number");
      continue;
    }
    if (*kwh < 0.0) {
      reject(row.row_index, ReasonCode::NegativeKwh, "kwh is negative");
      continue;
    }
    MeterReading reading{parsed->date, *kwh, std::nullopt, false};
    if (const auto* cost_text = row.get("cost"); cost_text && !detail::trim(*cost_text).empty()) {
      auto cost = detail::parse_number(*cost_text);
      if (!cost || *cost < 0.0) {
        reject(row.row_index, ReasonCode::OutOfRange, "cost must be a non-negative finite number");
        continue;
      }
      reading.cost = *cost;
    }
    if (const auto* id = row.get("building_id"); id && !detail::trim(*id).empty()) {
      std::string trimmed(detail::trim(*id));
      if (!out.series.building_id)
        out.series.building_id = trimmed;
      else if (*out.series.building_id != trimmed)
        mixed_ids = true;
    }
    if (parsed->truncated) ++truncated;

    auto [it, inserted] = by_date.try_emplace(parsed->date, Candidate{row.row_index, reading});
    if (!inserted) {
      reject(it->second.row_index, ReasonCode::DuplicateDate,
             "superseded by a later reading for " + parsed->date.to_string());
      report.warnings.push_back("duplicate meter_date " + parsed->date.to_string() + ": kept row " +
                                std::to_string(row.row_index) + " (last wins)");
      it->second = Candidate{row.row_index, reading};
    }
  }

  std::sort(report.rejected_rows.begin(), report.rejected_rows.end(),
            [](const Rejection& a, const Rejection& b) { return a.row_index < b.row_index; });
  if (truncated > 0)
    report.warnings.push_back("timestamps truncated to calendar dates on " + std::to_string(truncated) + " rows");
  if (mixed_ids) report.warnings.push_back("rows carry more than one building_id; the first one is used");

  out.series.readings.reserve(by_date.size());
  for (auto& [date, cand] : by_date) out.series.readings.push_back(cand.reading);
  report.accepted_rows = out.series.readings.size();

  if (out.series.readings.empty())
    throw Error(ErrorCode::AllRejected, "every row was rejected",
                [&] {
                  std::vector<std::string> d;
                  for (const auto& r : report.rejected_rows)
                    d.push_back("row " + std::to_string(r.row_index) + ": " + std::string(enum_name(r.reason)));
                  return d;
                }());
  return out;
}

/// Converts a validated series back to raw rows (used for re-validation and
/// serialization).
inline std::vector<RawRecord> to_raw_records(const MeterSeries& series) {
  std::vector<RawRecord> out;
  out.reserve(series.size());
  std::size_t i = 0;
  for (const auto& r : series) {
    RawRecord rec{i++, {}};
    rec.fields["meter_date"] = r.date.to_string();
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, r.kwh);
    rec.fields["kwh"] = std::string(buf, res.ptr);
    if (r.cost) {
      res = std::to_chars(buf, buf + sizeof buf, *r.cost);
      rec.fields["cost"] = std::string(buf, res.ptr);
    }
    if (series.building_id) rec.fields["building_id"] = *series.building_id;
    out.push_back(std::move(rec));
  }
  return out;
}

/// Representative R-values for a categorical envelope. Only the insulation
/// level selects the row; glazing and airtightness do not shift it.
inline EnvelopeRValues map_categorical_envelope(InsulationLevel level, WindowType /*window*/,
                                                AirLeakage /*leakage*/, const EnvelopeTable& table = {}) {
  return table.row(level);
}

/// Insulation level used by calculators. Falls back to classifying measured
/// R-values against the mapping table when no level was given.
inline InsulationLevel effective_insulation_level(const BuildingDescriptor& b, const EnvelopeTable& table = {}) {
  if (b.insulation_level) return *b.insulation_level;
  const double wall = b.wall_r.value_or(0.0);
  const double roof = b.roof_r.value_or(0.0);
  if (wall >= table.high.wall_r && roof >= table.high.roof_r) return InsulationLevel::High;
  if (wall >= table.moderate.wall_r && roof >= table.moderate.roof_r) return InsulationLevel::Moderate;
  return InsulationLevel::Low;
}

inline EnvelopeRValues effective_envelope(const BuildingDescriptor& b, const EnvelopeTable& table = {}) {
  const auto mapped = map_categorical_envelope(effective_insulation_level(b, table), b.window_type,
                                               b.air_leakage_est, table);
  return {b.wall_r.value_or(mapped.wall_r), b.roof_r.value_or(mapped.roof_r)};
}

using RawFields = std::map<std::string, std::string>;

/// Validates a building field bag (keys matched case-insensitively).
///
/// Throws MissingRequired for floor_area_m2, occupants or climate_zone and
/// OutOfRange naming the offending field. Optional fields take the
/// documented defaults.
inline ValidatedBuilding validate_building(const RawFields& raw, const Config& cfg = {}) {
  RawFields fields;
  for (const auto& [k, v] : raw) fields[detail::lower(detail::trim(k))] = v;

  ValidatedBuilding out;
  auto& b = out.building;
  auto& report = out.report;
  report.input_rows = 1;

  static const std::array kKnown = {
      "building_id",   "floor_area_m2",     "occupants",          "construction_year", "wall_r",
      "roof_r",        "window_type",       "air_leakage_est",    "hvac_type",         "water_heating",
      "lighting_count_led", "lighting_count_halogen", "insulation_level", "climate_zone", "solar_pv_kw",
      "electricity_price", "mechanical_ventilation", "hdd_annual", "cdd_annual"};

  auto present = [&](const char* key) -> const std::string* {
    auto it = fields.find(key);
    if (it == fields.end() || detail::trim(it->second).empty()) return nullptr;
    return &it->second;
  };
  auto out_of_range = [](const char* field, const std::string& why) {
    return Error(ErrorCode::OutOfRange, std::string(field) + " " + why, {field});
  };
  auto require = [&](const char* key) -> const std::string& {
    const auto* v = present(key);
    if (!v) throw Error(ErrorCode::MissingRequired, std::string(key) + " is required", {key});
    return *v;
  };
  auto positive = [&](const char* key, const std::string& text) {
    auto v = detail::parse_number(text);
    if (!v || !(*v > 0.0)) throw out_of_range(key, "must be a number > 0");
    return *v;
  };
  auto non_negative = [&](const char* key, const std::string& text) {
    auto v = detail::parse_number(text);
    if (!v || *v < 0.0) throw out_of_range(key, "must be a number >= 0");
    return *v;
  };
  auto count = [&](const char* key, const std::string& text, int min) {
    auto v = detail::parse_integer(text);
    if (!v || *v < min) throw out_of_range(key, "must be an integer >= " + std::to_string(min));
    return *v;
  };
  auto category = [&]<typename E>(const char* key, E& target, E fallback) {
    if (const auto* v = present(key)) {
      auto parsed = enum_from_string<E>(detail::trim(*v));
      if (!parsed) throw out_of_range(key, "has unknown value '" + *v + "'");
      target = *parsed;
    } else {
      target = fallback;
      report.warnings.push_back(std::string(key) + " not given; defaulted to " + std::string(enum_name(fallback)));
    }
  };

  b.floor_area_m2 = positive("floor_area_m2", require("floor_area_m2"));
  b.occupants = count("occupants", require("occupants"), 1);
  {
    auto zone = detail::parse_integer(require("climate_zone"));
    if (!zone || *zone < 1 || *zone > 6) throw out_of_range("climate_zone", "must be an integer 1-6");
    b.climate_zone = *zone;
  }

  if (const auto* v = present("building_id")) b.building_id = std::string(detail::trim(*v));
  if (const auto* v = present("construction_year")) {
    auto year = detail::parse_integer(*v);
    if (!year || *year < 1000 || *year > 9999) throw out_of_range("construction_year", "must be a four-digit year");
    b.construction_year = *year;
  }
  if (const auto* v = present("wall_r")) b.wall_r = positive("wall_R", *v);
  if (const auto* v = present("roof_r")) b.roof_r = positive("roof_R", *v);

  category("window_type", b.window_type, WindowType::Double);
  category("air_leakage_est", b.air_leakage_est, AirLeakage::Typical);
  category("hvac_type", b.hvac_type, HvacType::ResistiveHeaters);
  category("water_heating", b.water_heating, WaterHeating::ElectricCylinder);

  if (const auto* v = present("insulation_level")) {
    auto level = enum_from_string<InsulationLevel>(detail::trim(*v));
    if (!level) throw out_of_range("insulation_level", "has unknown value '" + *v + "'");
    b.insulation_level = *level;
  } else if (!(b.wall_r && b.roof_r)) {
    b.insulation_level = InsulationLevel::Moderate;
    report.warnings.push_back("insulation_level not given; defaulted to moderate");
  }

  b.lighting_count_led = present("lighting_count_led") ? count("lighting_count_led", *present("lighting_count_led"), 0) : 0;
  b.lighting_count_halogen =
      present("lighting_count_halogen") ? count("lighting_count_halogen", *present("lighting_count_halogen"), 0) : 0;
  b.solar_pv_kw = present("solar_pv_kw") ? non_negative("solar_pv_kw", *present("solar_pv_kw")) : 0.0;
  if (const auto* v = present("electricity_price")) {
    b.electricity_price = positive("electricity_price", *v);
  } else {
    b.electricity_price = cfg.default_price_nzd_per_kwh;
    report.warnings.push_back("electricity_price not given; defaulted to configured price");
  }
  if (const auto* v = present("mechanical_ventilation")) {
    auto flag = detail::parse_bool(*v);
    if (!flag) throw out_of_range("mechanical_ventilation", "must be true or false");
    b.mechanical_ventilation = *flag;
  }
  if (const auto* v = present("hdd_annual")) b.user_hdd_annual = non_negative("hdd_annual", *v);
  if (const auto* v = present("cdd_annual")) b.user_cdd_annual = non_negative("cdd_annual", *v);

  for (const auto& [k, v] : fields)
    if (std::find(kKnown.begin(), kKnown.end(), k) == kKnown.end())
      report.warnings.push_back("unknown building field '" + k + "' ignored");

  report.accepted_rows = 1;
  return out;
}

/// Inverse of validate_building for serialization; emits every field.
inline RawFields to_raw_fields(const BuildingDescriptor& b) {
  auto num = [](double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  };
  RawFields f;
  if (b.building_id) f["building_id"] = *b.building_id;
  f["floor_area_m2"] = num(b.floor_area_m2);
  f["occupants"] = std::to_string(b.occupants);
  if (b.construction_year) f["construction_year"] = std::to_string(*b.construction_year);
  if (b.wall_r) f["wall_r"] = num(*b.wall_r);
  if (b.roof_r) f["roof_r"] = num(*b.roof_r);
  f["window_type"] = std::string(enum_name(b.window_type));
  f["air_leakage_est"] = std::string(enum_name(b.air_leakage_est));
  f["hvac_type"] = std::string(enum_name(b.hvac_type));
  f["water_heating"] = std::string(enum_name(b.water_heating));
  f["lighting_count_led"] = std::to_string(b.lighting_count_led);
  f["lighting_count_halogen"] = std::to_string(b.lighting_count_halogen);
  if (b.insulation_level) f["insulation_level"] = std::string(enum_name(*b.insulation_level));
  f["climate_zone"] = std::to_string(b.climate_zone);
  f["solar_pv_kw"] = num(b.solar_pv_kw);
  f["electricity_price"] = num(b.electricity_price);
  f["mechanical_ventilation"] = b.mechanical_ventilation ? "true" : "false";
  if (b.user_hdd_annual) f["hdd_annual"] = num(*b.user_hdd_annual);
  if (b.user_cdd_annual) f["cdd_annual"] = num(*b.user_cdd_annual);
  return f;
}

}  // namespace homewise
