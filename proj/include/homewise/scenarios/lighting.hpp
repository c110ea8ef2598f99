#pragma once

#include "homewise/config.hpp"
#include "homewise/domain.hpp"

namespace homewise {

/// Annual lighting energy from fixture counts:
/// (halogen * W_hal + led * W_led) * hours/day * 365.25 / 1000.
inline double estimate_lighting_load(const BuildingDescriptor& b, const LightingConstants& k = {}) {
  const double watts = static_cast<double>(b.lighting_count_halogen) * k.halogen_watts +
                       static_cast<double>(b.lighting_count_led) * k.led_watts;
  return watts * k.hours_per_day * 365.25 / 1000.0;
}

/// Fraction of connected lighting wattage that is halogen.
inline double halogen_wattage_share(const BuildingDescriptor& b, const LightingConstants& k = {}) {
  const double hal = static_cast<double>(b.lighting_count_halogen) * k.halogen_watts;
  const double total = hal + static_cast<double>(b.lighting_count_led) * k.led_watts;
  return total > 0.0 ? hal / total : 0.0;
}

}  // namespace homewise
