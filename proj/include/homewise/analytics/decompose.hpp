#pragma once

#include <algorithm>
#include <optional>

#include "homewise/analytics/baseline.hpp"
#include "homewise/analytics/profile.hpp"
#include "homewise/config.hpp"
#include "homewise/scenarios/lighting.hpp"

namespace homewise {

struct LoadDecomposition {
  double heating_kwh_yr = 0.0;
  double cooling_kwh_yr = 0.0;
  double lighting_kwh_yr = 0.0;
  double base_kwh_yr = 0.0;
  double annual_total_kwh = 0.0;
  DecompositionMethod method = DecompositionMethod::ShareTable;

  double sum() const { return heating_kwh_yr + cooling_kwh_yr + lighting_kwh_yr + base_kwh_yr; }
};

/// Annualized consumption: mean daily kWh over covered days times 365.25.
inline double annualized_kwh(const MeterSeries& s) {
  if (s.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& r : s) sum += r.kwh;
  return sum / static_cast<double>(s.size()) * kDaysPerYear;
}

namespace detail {

/// Clamps the end uses at zero, scales them down if they exceed the total,
/// and assigns the remainder to base load.
inline void close_balance(LoadDecomposition& d) {
  d.heating_kwh_yr = std::max(0.0, d.heating_kwh_yr);
  d.cooling_kwh_yr = std::max(0.0, d.cooling_kwh_yr);
  d.lighting_kwh_yr = std::max(0.0, d.lighting_kwh_yr);
  const double end_uses = d.heating_kwh_yr + d.cooling_kwh_yr + d.lighting_kwh_yr;
  if (end_uses > d.annual_total_kwh) {
    const double scale = end_uses > 0.0 ? d.annual_total_kwh / end_uses : 0.0;
    d.heating_kwh_yr *= scale;
    d.cooling_kwh_yr *= scale;
    d.lighting_kwh_yr *= scale;
    d.base_kwh_yr = 0.0;
  } else {
    d.base_kwh_yr = d.annual_total_kwh - end_uses;
  }
}

}  // namespace detail

/// Splits annual consumption into heating, cooling, lighting and base load.
///
/// With a regression baseline and a climate record, heating and cooling are
/// coef x annual degree days. Otherwise fixed shares by heating system and
/// climate zone apply. Lighting always comes from fixture counts.
inline LoadDecomposition decompose_loads(const MeterSeries& s, const std::optional<BaselineModel>& model,
                                         const std::optional<ClimateRecord>& climate, const BuildingDescriptor& b,
                                         const Config& cfg = {}) {
  LoadDecomposition d;
  d.annual_total_kwh = annualized_kwh(s);
  d.lighting_kwh_yr = estimate_lighting_load(b, cfg.lighting);
  if (model && model->kind == BaselineKind::Regression && climate) {
    d.method = DecompositionMethod::RegressionSplit;
    d.heating_kwh_yr = model->coef_hdd * climate->hdd_annual;
    d.cooling_kwh_yr = model->coef_cdd * climate->cdd_annual;
  } else {
    d.method = DecompositionMethod::ShareTable;
    const auto zone = static_cast<std::size_t>(std::clamp(b.climate_zone, 1, 6) - 1);
    const auto it = cfg.load_shares.heating_share.find(b.hvac_type);
    const double heat_share = (it != cfg.load_shares.heating_share.end() ? it->second : 0.0) *
                              cfg.load_shares.zone_heating_factor[zone];
    const double cool_share =
        b.hvac_type == HvacType::HeatPump ? cfg.load_shares.heat_pump_cooling_share[zone] : 0.0;
    d.heating_kwh_yr = d.annual_total_kwh * std::clamp(heat_share, 0.0, 1.0);
    d.cooling_kwh_yr = d.annual_total_kwh * std::clamp(cool_share, 0.0, 1.0);
  }
  detail::close_balance(d);
  return d;
}

}  // namespace homewise
