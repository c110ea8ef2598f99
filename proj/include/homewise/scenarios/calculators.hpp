#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homewise/analytics/decompose.hpp"
#include "homewise/config.hpp"
#include "homewise/csv.hpp"
#include "homewise/domain.hpp"
#include "homewise/scenarios/lighting.hpp"

namespace homewise {

/// One single-measure intervention with optional overrides.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::LedRetrofit;
  std::optional<double> factor;        // led_retrofit, insulation_upgrade
  std::optional<double> setback_degc;  // thermostat_setback
  std::optional<double> capex_nzd;     // any kind

  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

struct ScenarioResult {
  ScenarioKind kind = ScenarioKind::LedRetrofit;
  double kwh_saved_yr = 0.0;
  double cost_saved_yr = 0.0;
  double capex = 0.0;
  std::optional<double> payback_years;  // none when nothing is saved; 0 = immediate
  std::vector<std::string> assumptions;
};

struct FactorBand {
  double min;
  double max;
  bool contains(double v) const { return v >= min && v <= max; }
};

inline constexpr FactorBand kLedBand{0.60, 0.75};
inline constexpr FactorBand kInsulationBand{0.10, 0.30};
inline constexpr FactorBand kSetbackBand{0.5, 3.0};

/// capex / annual saving in years; none when nothing is saved.
inline std::optional<double> simple_payback(double capex, double annual_saving) {
  if (!std::isfinite(capex) || !std::isfinite(annual_saving) || capex < 0.0 || annual_saving < 0.0)
    throw Error(ErrorCode::NegativeInput, "capex and annual saving must be finite and >= 0");
  if (annual_saving == 0.0) return std::nullopt;
  if (capex == 0.0) return 0.0;
  return capex / annual_saving;
}

namespace detail {

inline std::string fmt_num(double v) { return csv::number(v); }

inline std::string price_assumption(const BuildingDescriptor& b) {
  return "Electricity price " + fmt_num(b.electricity_price) + " NZD/kWh (flat tariff)";
}

inline double resolve_capex(std::optional<double> override_nzd, double computed) {
  if (!override_nzd) return computed;
  if (!std::isfinite(*override_nzd) || *override_nzd < 0.0)
    throw Error(ErrorCode::OutOfRange, "capex override must be >= 0", {"capex_nzd"});
  return *override_nzd;
}

inline ScenarioResult finish(ScenarioKind kind, double kwh_saved, double capex, const BuildingDescriptor& b,
                             std::vector<std::string> assumptions) {
  ScenarioResult r;
  r.kind = kind;
  r.kwh_saved_yr = kwh_saved;
  r.cost_saved_yr = kwh_saved * b.electricity_price;
  r.capex = capex;
  r.payback_years = simple_payback(capex, r.cost_saved_yr);
  assumptions.push_back(price_assumption(b));
  r.assumptions = std::move(assumptions);
  return r;
}

inline std::string lighting_assumption(const LightingConstants& k) {
  return "Lighting load: halogen " + fmt_num(k.halogen_watts) + " W, LED " + fmt_num(k.led_watts) + " W, " +
         fmt_num(k.hours_per_day) + " h/day per fixture";
}

}  // namespace detail

/// Halogen share of the decomposed lighting load, in kWh/yr.
inline double halogen_lighting_load(const BuildingDescriptor& b, const LoadDecomposition& d,
                                    const LightingConstants& k = {}) {
  return d.lighting_kwh_yr * halogen_wattage_share(b, k);
}

/// LED retrofit: saves r x the halogen share of the lighting load. Only
/// halogen fixtures convert.
inline ScenarioResult scenario_led(const BuildingDescriptor& b, const LoadDecomposition& d,
                                   std::optional<double> factor = std::nullopt, const Config& cfg = {},
                                   std::optional<double> capex_override = std::nullopt) {
  const double r = factor.value_or(cfg.scenarios.led_default_factor);
  if (!kLedBand.contains(r))
    throw Error(ErrorCode::FactorOutOfBand, "LED reduction factor must lie in [0.60, 0.75]", {detail::fmt_num(r)});
  const double saved = r * halogen_lighting_load(b, d, cfg.lighting);
  const double unit = cfg.scenarios.led_unit_cost_nzd;
  const double capex =
      detail::resolve_capex(capex_override, static_cast<double>(b.lighting_count_halogen) * unit);
  std::vector<std::string> a = {
      "LED retrofit: lighting reduction factor " + detail::fmt_num(r) +
          (factor ? " (user override)" : " (midpoint of 0.60-0.75 band)") + " applied to halogen fixtures only",
      capex_override ? "LED retrofit: capital cost " + detail::fmt_num(capex) + " NZD (user override)"
                     : "LED retrofit: " + detail::fmt_num(unit) + " NZD per halogen fixture replaced",
      detail::lighting_assumption(cfg.lighting),
  };
  return detail::finish(ScenarioKind::LedRetrofit, saved, capex, b, std::move(a));
}

inline double default_insulation_factor(InsulationLevel level, const ScenarioConstants& k = {}) {
  switch (level) {
    case InsulationLevel::Low: return k.insulation_factor_low;
    case InsulationLevel::Moderate: return k.insulation_factor_moderate;
    case InsulationLevel::High: return k.insulation_factor_high;
  }
  return k.insulation_factor_moderate;
}

/// Insulation upgrade: saves r x heating load; r defaults by current level
/// (low 0.30, moderate 0.20, high 0.10).
inline ScenarioResult scenario_insulation(const BuildingDescriptor& b, const LoadDecomposition& d,
                                          std::optional<double> factor = std::nullopt, const Config& cfg = {},
                                          std::optional<double> capex_override = std::nullopt) {
  const auto level = effective_insulation_level(b, cfg.envelope);
  const double r = factor.value_or(default_insulation_factor(level, cfg.scenarios));
  if (!kInsulationBand.contains(r))
    throw Error(ErrorCode::FactorOutOfBand, "insulation reduction factor must lie in [0.10, 0.30]",
                {detail::fmt_num(r)});
  const double saved = r * d.heating_kwh_yr;
  const double unit = cfg.scenarios.insulation_unit_cost_nzd_per_m2;
  const double capex = detail::resolve_capex(capex_override, b.floor_area_m2 * unit);
  std::vector<std::string> a = {
      "Insulation upgrade: heating reduction factor " + detail::fmt_num(r) +
          (factor ? " (user override)" : " (default for current insulation level " + std::string(enum_name(level)) + ")"),
      capex_override ? "Insulation upgrade: capital cost " + detail::fmt_num(capex) + " NZD (user override)"
                     : "Insulation upgrade: " + detail::fmt_num(unit) + " NZD per m2 of floor area",
  };
  return detail::finish(ScenarioKind::InsulationUpgrade, saved, capex, b, std::move(a));
}

/// Behaviour measures with fixed heuristics and no capital cost.
/// Thermostat setback saves fraction_per_degC x setback x heating load;
/// standby reduction saves a fixed amount, capped at the base load.
inline ScenarioResult scenario_behavior(const BuildingDescriptor& b, const LoadDecomposition& d,
                                        const ScenarioSpec& spec, const Config& cfg = {}) {
  const auto& k = cfg.scenarios;
  if (spec.factor) throw Error(ErrorCode::InvalidArgument, "behaviour scenarios take no reduction factor");
  if (spec.kind == ScenarioKind::ThermostatSetback) {
    const double setback = spec.setback_degc.value_or(k.default_setback_degc);
    if (!kSetbackBand.contains(setback))
      throw Error(ErrorCode::OutOfRange, "setback must lie in [0.5, 3.0] degC", {"setback"});
    const double fraction = std::min(1.0, k.setback_fraction_per_degc * setback);
    const double saved = fraction * d.heating_kwh_yr;
    const double capex = detail::resolve_capex(spec.capex_nzd, 0.0);
    std::vector<std::string> a = {
        "Thermostat setback: " + detail::fmt_num(k.setback_fraction_per_degc) +
            " of heating load saved per degC (fixed heuristic)",
        "Thermostat setback: setback of " + detail::fmt_num(setback) + " degC",
    };
    return detail::finish(ScenarioKind::ThermostatSetback, saved, capex, b, std::move(a));
  }
  if (spec.kind == ScenarioKind::StandbyReduction) {
    if (spec.setback_degc) throw Error(ErrorCode::InvalidArgument, "standby reduction takes no setback");
    const double saved = std::min(k.standby_kwh_yr, d.base_kwh_yr);
    const double capex = detail::resolve_capex(spec.capex_nzd, 0.0);
    std::vector<std::string> a = {"Standby reduction: " + detail::fmt_num(k.standby_kwh_yr) +
                                  " kWh/yr per household (fixed heuristic, capped at base load)"};
    return detail::finish(ScenarioKind::StandbyReduction, saved, capex, b, std::move(a));
  }
  throw Error(ErrorCode::InvalidArgument, "not a behaviour scenario");
}

inline ScenarioResult run_scenario(const BuildingDescriptor& b, const LoadDecomposition& d, const ScenarioSpec& spec,
                                   const Config& cfg = {}) {
  switch (spec.kind) {
    case ScenarioKind::LedRetrofit:
      if (spec.setback_degc) throw Error(ErrorCode::InvalidArgument, "LED retrofit takes no setback");
      return scenario_led(b, d, spec.factor, cfg, spec.capex_nzd);
    case ScenarioKind::InsulationUpgrade:
      if (spec.setback_degc) throw Error(ErrorCode::InvalidArgument, "insulation upgrade takes no setback");
      return scenario_insulation(b, d, spec.factor, cfg, spec.capex_nzd);
    case ScenarioKind::ThermostatSetback:
    case ScenarioKind::StandbyReduction:
      return scenario_behavior(b, d, spec, cfg);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario kind");
}

/// One spec per kind with default parameters.
inline std::vector<ScenarioSpec> default_scenario_specs() {
  std::vector<ScenarioSpec> out;
  for (auto kind : all_enum_values<ScenarioKind>()) out.push_back({kind, std::nullopt, std::nullopt, std::nullopt});
  return out;
}

inline std::vector<ScenarioResult> run_scenarios(const BuildingDescriptor& b, const LoadDecomposition& d,
                                                 std::span<const ScenarioSpec> specs, const Config& cfg = {}) {
  std::vector<ScenarioResult> out;
  out.reserve(specs.size());
  for (const auto& spec : specs) out.push_back(run_scenario(b, d, spec, cfg));
  return out;
}

}  // namespace homewise
