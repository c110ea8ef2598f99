#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "homewise/analytics.hpp"
#include "homewise/ingest.hpp"
#include "homewise/scenarios.hpp"

namespace homewise {

using Json = nlohmann::ordered_json;

namespace detail {

template <typename T>
Json opt(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

inline Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

inline Json to_json(const Error& e) {
  return Json{{"code", to_string(e.code())}, {"message", e.message()}, {"details", e.details()}};
}

inline Json to_json(const ValidationReport& r) {
  Json rejected = Json::array();
  for (const auto& x : r.rejected_rows)
    rejected.push_back({{"row_index", x.row_index}, {"reason", enum_name(x.reason)}, {"message", x.message}});
  return Json{{"input_rows", r.input_rows},
              {"accepted_rows", r.accepted_rows},
              {"rejected_rows", rejected},
              {"warnings", r.warnings}};
}

inline Json to_json(const BuildingDescriptor& b) {
  return Json{{"building_id", detail::opt(b.building_id)},
              {"floor_area_m2", b.floor_area_m2},
              {"occupants", b.occupants},
              {"construction_year", detail::opt(b.construction_year)},
              {"wall_R", detail::opt(b.wall_r)},
              {"roof_R", detail::opt(b.roof_r)},
              {"window_type", enum_name(b.window_type)},
              {"air_leakage_est", enum_name(b.air_leakage_est)},
              {"hvac_type", enum_name(b.hvac_type)},
              {"water_heating", enum_name(b.water_heating)},
              {"lighting_count_led", b.lighting_count_led},
              {"lighting_count_halogen", b.lighting_count_halogen},
              {"insulation_level", b.insulation_level ? Json(enum_name(*b.insulation_level)) : Json(nullptr)},
              {"climate_zone", b.climate_zone},
              {"solar_pv_kw", b.solar_pv_kw},
              {"electricity_price", b.electricity_price},
              {"mechanical_ventilation", b.mechanical_ventilation},
              {"hdd_annual", detail::opt(b.user_hdd_annual)},
              {"cdd_annual", detail::opt(b.user_cdd_annual)}};
}

inline Json to_json(const ClimateRecord& c) {
  return Json{{"zone", c.zone},
              {"hdd_annual", c.hdd_annual},
              {"cdd_annual", c.cdd_annual},
              {"hdd_monthly", c.hdd_monthly},
              {"cdd_monthly", c.cdd_monthly},
              {"source", enum_name(c.source)}};
}

inline Json to_json(const EnergyProfile& p) {
  Json monthly = Json::array();
  for (const auto& m : p.monthly)
    monthly.push_back({{"month", m.month.to_string()},
                       {"kwh_sum", m.kwh_sum},
                       {"days", m.days},
                       {"kwh_per_m2", m.kwh_sum / p.floor_area_m2}});
  Json daily = Json::array();
  for (std::size_t i = 0; i < p.daily.size(); ++i)
    daily.push_back({{"date", p.daily[i].date.to_string()},
                     {"kwh", p.daily[i].kwh},
                     {"rolling_7", detail::opt(p.rolling_7[i])},
                     {"rolling_30", detail::opt(p.rolling_30[i])}});
  Json seasonal = Json::array();
  for (const auto& s : p.seasonal_index) seasonal.push_back(detail::opt(s));
  return Json{{"floor_area_m2", p.floor_area_m2},
              {"total_kwh", p.total_kwh},
              {"days_covered", p.days_covered},
              {"kwh_per_m2_annualized", p.kwh_per_m2_annualized},
              {"peak_load", p.peak_load},
              {"offpeak_load", p.offpeak_load},
              {"seasonal_index", seasonal},
              {"monthly", monthly},
              {"daily", daily}};
}

inline Json to_json(const AnomalyFlag& f) {
  return Json{{"date", f.date.to_string()},
              {"kind", enum_name(f.kind)},
              {"method", enum_name(f.method)},
              {"score", detail::num(f.score)},
              {"threshold", f.threshold}};
}

inline Json to_json(const std::vector<AnomalyFlag>& flags) {
  Json out = Json::array();
  for (const auto& f : flags) out.push_back(to_json(f));
  return out;
}

inline Json to_json(const BaselineModel& m) {
  Json j{{"kind", enum_name(m.kind)}};
  if (m.kind == BaselineKind::Regression) {
    j["intercept"] = m.intercept;
    j["coef_hdd"] = m.coef_hdd;
    j["coef_cdd"] = m.coef_cdd;
    j["coef_occupants"] = m.coef_occupants;
    j["coef_floor_area"] = m.coef_floor_area;
    j["r_squared"] = m.r_squared;
    j["months_used"] = m.months_used;
  } else {
    j["window"] = m.window;
    j["daily_mean_kwh"] = m.daily_mean_kwh;
  }
  j["notes"] = m.notes;
  return j;
}

inline Json to_json(const std::vector<MonthlyPrediction>& p) {
  Json out = Json::array();
  for (const auto& m : p) out.push_back({{"month", m.month}, {"expected_kwh", m.expected_kwh}});
  return out;
}

inline Json to_json(const LoadDecomposition& d) {
  return Json{{"heating_kwh_yr", d.heating_kwh_yr}, {"cooling_kwh_yr", d.cooling_kwh_yr},
              {"lighting_kwh_yr", d.lighting_kwh_yr}, {"base_kwh_yr", d.base_kwh_yr},
              {"annual_total_kwh", d.annual_total_kwh}, {"method", enum_name(d.method)}};
}

inline Json to_json(const ScenarioResult& r) {
  return Json{{"kind", enum_name(r.kind)},
              {"kwh_saved_yr", r.kwh_saved_yr},
              {"cost_saved_yr", r.cost_saved_yr},
              {"capex_nzd", r.capex},
              {"payback_years", detail::opt(r.payback_years)},
              {"assumptions", r.assumptions}};
}

inline Json to_json(const ComparisonRow& r) {
  return Json{{"kind", r.kind},
              {"kwh_saved_yr", r.kwh_saved_yr},
              {"cost_saved_yr", r.cost_saved_yr},
              {"capex_nzd", r.capex},
              {"payback_years", detail::opt(r.payback_years)},
              {"is_baseline", r.is_baseline}};
}

inline Json to_json(const ComparisonTable& t) {
  Json out = Json::array();
  for (const auto& r : t.rows) out.push_back(to_json(r));
  return out;
}

inline Json to_json(const RecommendationSet& s) {
  Json recs = Json::array();
  for (const auto& r : s.recommendations)
    recs.push_back({{"kind", r.kind},
                    {"kwh_saved_yr", r.kwh_saved_yr},
                    {"cost_saved_yr", r.cost_saved_yr},
                    {"capex_nzd", r.capex},
                    {"payback_years", detail::opt(r.payback_years)},
                    {"evidence", r.evidence}});
  Json adv = Json::array();
  for (const auto& a : s.advisories) adv.push_back({{"code", a.code}, {"message", a.message}, {"dates", a.dates}});
  return Json{{"recommendations", recs}, {"advisories", adv}};
}

namespace detail {

inline std::optional<double> json_number(const Json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number())
    throw Error(ErrorCode::InvalidArgument, std::string(key) + " must be a number", {key});
  return j[key].get<double>();
}

}  // namespace detail

/// Reads `{"kind": ..., "factor"?, "setback_degc"?, "capex_nzd"?}`. The
/// optional values may also sit under a nested "params" object.
inline ScenarioSpec scenario_spec_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "scenario spec must be an object");
  if (!j.contains("kind") || !j["kind"].is_string())
    throw Error(ErrorCode::MissingRequired, "scenario spec needs a kind", {"kind"});
  const auto kind_name = j["kind"].get<std::string>();
  const auto kind = enum_from_string<ScenarioKind>(kind_name);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown scenario kind '" + kind_name + "'", {kind_name});
  Json params = Json::object();
  for (const auto& [k, v] : j.items()) {
    if (k == "kind") continue;
    if (k == "params") {
      if (!v.is_object()) throw Error(ErrorCode::InvalidArgument, "params must be an object", {"params"});
      for (const auto& [pk, pv] : v.items()) params[pk] = pv;
    } else {
      params[k] = v;
    }
  }
  for (const auto& [k, v] : params.items())
    if (k != "factor" && k != "setback_degc" && k != "capex_nzd")
      throw Error(ErrorCode::InvalidArgument, "unknown scenario parameter '" + k + "'", {k});
  ScenarioSpec spec;
  spec.kind = *kind;
  spec.factor = detail::json_number(params, "factor");
  spec.setback_degc = detail::json_number(params, "setback_degc");
  spec.capex_nzd = detail::json_number(params, "capex_nzd");
  return spec;
}

inline std::vector<ScenarioSpec> scenario_specs_from_json(const Json& j) {
  const Json& list = j.is_object() && j.contains("scenarios") ? j["scenarios"] : j;
  if (!list.is_array()) throw Error(ErrorCode::InvalidArgument, "expected a list of scenario specs");
  std::vector<ScenarioSpec> out;
  for (const auto& item : list) out.push_back(scenario_spec_from_json(item));
  return out;
}

}  // namespace homewise
