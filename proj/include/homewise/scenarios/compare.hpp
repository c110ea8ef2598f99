#pragma once

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "homewise/scenarios/calculators.hpp"

namespace homewise {

struct ComparisonRow {
  std::string kind;  // scenario kind name, or "baseline"
  double kwh_saved_yr = 0.0;
  double cost_saved_yr = 0.0;
  double capex = 0.0;
  std::optional<double> payback_years;
  bool is_baseline = false;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  /// Rows other than the baseline, in table order.
  std::vector<ComparisonRow> scenarios() const {
    std::vector<ComparisonRow> out;
    for (const auto& r : rows)
      if (!r.is_baseline) out.push_back(r);
    return out;
  }
};

inline constexpr const char* kBaselineRowName = "baseline";

/// Total order: payback ascending with undefined last, then larger
/// kwh_saved_yr, then kind name, then the remaining fields.
inline bool comparison_less(const ComparisonRow& a, const ComparisonRow& b) {
  if (a.payback_years.has_value() != b.payback_years.has_value()) return a.payback_years.has_value();
  if (a.payback_years && *a.payback_years != *b.payback_years) return *a.payback_years < *b.payback_years;
  if (a.kwh_saved_yr != b.kwh_saved_yr) return a.kwh_saved_yr > b.kwh_saved_yr;
  if (a.kind != b.kind) return a.kind < b.kind;
  if (a.is_baseline != b.is_baseline) return b.is_baseline;
  if (a.cost_saved_yr != b.cost_saved_yr) return a.cost_saved_yr > b.cost_saved_yr;
  return a.capex < b.capex;
}

inline ComparisonRow to_row(const ScenarioResult& r) {
  return {std::string(enum_name(r.kind)), r.kwh_saved_yr, r.cost_saved_yr, r.capex, r.payback_years, false};
}

inline ComparisonRow baseline_row() { return {kBaselineRowName, 0.0, 0.0, 0.0, std::nullopt, true}; }

inline ComparisonTable baseline_only_table() { return {{baseline_row()}}; }

/// Sorted comparison table with a zero-savings baseline row. Throws EmptyList.
inline ComparisonTable compare_scenarios(std::span<const ScenarioResult> results) {
  if (results.empty()) throw Error(ErrorCode::EmptyList, "no scenario results to compare");
  ComparisonTable t;
  t.rows.reserve(results.size() + 1);
  for (const auto& r : results) t.rows.push_back(to_row(r));
  t.rows.push_back(baseline_row());
  std::sort(t.rows.begin(), t.rows.end(), comparison_less);
  return t;
}

}  // namespace homewise
