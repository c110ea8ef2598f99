#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homewise/analytics/anomaly.hpp"
#include "homewise/analytics/profile.hpp"
#include "homewise/scenarios/compare.hpp"

namespace homewise {

struct Recommendation {
  std::string kind;
  double kwh_saved_yr = 0.0;
  double cost_saved_yr = 0.0;
  double capex = 0.0;
  std::optional<double> payback_years;
  std::string evidence;
};

struct Advisory {
  std::string code;
  std::string message;
  std::vector<std::string> dates;
};

struct RecommendationSet {
  std::vector<Recommendation> recommendations;
  std::vector<Advisory> advisories;
};

inline constexpr std::size_t kMaxRecommendations = 3;

namespace detail {

struct Trigger {
  int tier;  // 0 = building evidence, 1 = generic behaviour measure
  std::string evidence;
};

inline std::optional<Trigger> trigger_for(const std::string& kind, const BuildingDescriptor& b,
                                          const EnvelopeTable& envelope) {
  if (kind == enum_name(ScenarioKind::LedRetrofit)) {
    if (b.lighting_count_halogen > 0)
      return Trigger{0, "halogen fixtures present (" + std::to_string(b.lighting_count_halogen) + ")"};
    return std::nullopt;
  }
  if (kind == enum_name(ScenarioKind::InsulationUpgrade)) {
    const auto level = effective_insulation_level(b, envelope);
    if (level == InsulationLevel::Low) return Trigger{0, "insulation level is low"};
    return std::nullopt;
  }
  if (kind == enum_name(ScenarioKind::ThermostatSetback) || kind == enum_name(ScenarioKind::StandbyReduction))
    return Trigger{1, "behaviour measure, no capital cost"};
  return std::nullopt;
}

}  // namespace detail

/// Rule engine over a comparison table. Measures backed by building evidence
/// (halogen fixtures, low insulation) come first, then the
/// generic behaviour measures; each group keeps table order. Only measures
/// that save energy qualify, up to three in total. Step-change flags add an
/// equipment advisory.
inline RecommendationSet recommend(const ComparisonTable& table, const BuildingDescriptor& b,
                                   std::span<const AnomalyFlag> flags, const EnvelopeTable& envelope = {}) {
  RecommendationSet out;
  for (int tier = 0; tier < 2; ++tier) {
    for (const auto& row : table.rows) {
      if (out.recommendations.size() >= kMaxRecommendations) break;
      if (row.is_baseline || !(row.kwh_saved_yr > 0.0)) continue;
      auto trigger = detail::trigger_for(row.kind, b, envelope);
      if (!trigger || trigger->tier != tier) continue;
      out.recommendations.push_back({row.kind, row.kwh_saved_yr, row.cost_saved_yr, row.capex, row.payback_years,
                                     std::move(trigger->evidence)});
    }
  }
  std::vector<std::string> step_dates;
  for (const auto& f : flags)
    if (f.kind == AnomalyKind::StepChange) step_dates.push_back(f.date.to_string());
  if (!step_dates.empty())
    out.advisories.push_back({"investigate_equipment",
                              "Sustained shift in consumption level detected; check heating and appliances for a "
                              "fault or a change in use",
                              std::move(step_dates)});
  if (out.recommendations.empty())
    out.advisories.push_back({"no_scenarios", "No retrofit or behaviour measure applies to this dataset", {}});
  return out;
}

}  // namespace homewise
