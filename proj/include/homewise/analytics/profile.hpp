#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <vector>

#include "homewise/analytics/stats.hpp"
#include "homewise/domain.hpp"

namespace homewise {

struct DailyPoint {
  Date date;
  double kwh = 0.0;
};

struct MonthlyTotal {
  YearMonth month;
  double kwh_sum = 0.0;
  std::size_t days = 0;  // readings contributing to the sum
};

struct EnergyProfile {
  std::vector<DailyPoint> daily;
  std::vector<MonthlyTotal> monthly;
  // Aligned to `daily`; empty where the trailing window is not complete.
  std::vector<std::optional<double>> rolling_7;
  std::vector<std::optional<double>> rolling_30;
  double floor_area_m2 = 0.0;
  double total_kwh = 0.0;
  std::size_t days_covered = 0;
  double kwh_per_m2_annualized = 0.0;
  // Index 0 = January. Months without data carry no index.
  std::array<std::optional<double>, 12> seasonal_index{};
  double peak_load = 0.0;
  double offpeak_load = 0.0;
};

inline constexpr double kDaysPerYear = 365.25;

/// Trailing mean over a full calendar window of `window` days ending at each
/// reading. Windows that span a missing day or the start of the series are
/// left empty.
inline std::vector<std::optional<double>> trailing_rolling_mean(const MeterSeries& s, std::size_t window) {
  std::vector<std::optional<double>> out(s.size());
  if (window == 0) return out;
  for (std::size_t i = window - 1; i < s.size(); ++i) {
    const std::size_t first = i + 1 - window;
    if (s[first].date.days_until(s[i].date) != static_cast<long>(window) - 1) continue;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += s[j].kwh;
    out[i] = sum / static_cast<double>(window);
  }
  return out;
}

/// Calendar-month sums, in date order. Each sum is over its member days only.
inline std::vector<MonthlyTotal> monthly_totals(const MeterSeries& s) {
  std::vector<MonthlyTotal> out;
  for (const auto& r : s) {
    const auto ym = year_month_of(r.date);
    if (out.empty() || out.back().month != ym) out.push_back({ym, 0.0, 0});
    out.back().kwh_sum += r.kwh;
    ++out.back().days;
  }
  return out;
}

/// Seasonal index per calendar month: mean daily kWh in that month divided by
/// the mean of the represented months' daily means.
inline std::array<std::optional<double>, 12> seasonal_indices(const MeterSeries& s) {
  std::array<double, 12> sum{};
  std::array<std::size_t, 12> count{};
  for (const auto& r : s) {
    sum[r.date.month() - 1] += r.kwh;
    ++count[r.date.month() - 1];
  }
  std::array<std::optional<double>, 12> out{};
  double total = 0.0;
  std::size_t months = 0;
  std::array<double, 12> month_mean{};
  for (std::size_t m = 0; m < 12; ++m) {
    if (count[m] == 0) continue;
    month_mean[m] = sum[m] / static_cast<double>(count[m]);
    total += month_mean[m];
    ++months;
  }
  if (months == 0 || total <= 0.0) return out;
  const double overall = total / static_cast<double>(months);
  for (std::size_t m = 0; m < 12; ++m)
    if (count[m] > 0) out[m] = month_mean[m] / overall;
  return out;
}

inline EnergyProfile profile(const MeterSeries& s, double floor_area_m2) {
  if (s.size() < 7)
    throw Error(ErrorCode::SeriesTooShort, "profiling needs at least 7 daily readings",
                {std::to_string(s.size())});
  if (!(floor_area_m2 > 0.0)) throw Error(ErrorCode::OutOfRange, "floor_area_m2 must be > 0", {"floor_area_m2"});

  EnergyProfile p;
  p.floor_area_m2 = floor_area_m2;
  p.daily.reserve(s.size());
  for (const auto& r : s) {
    p.daily.push_back({r.date, r.kwh});
    p.total_kwh += r.kwh;
  }
  p.days_covered = s.size();
  p.monthly = monthly_totals(s);
  p.rolling_7 = trailing_rolling_mean(s, 7);
  p.rolling_30 = trailing_rolling_mean(s, 30);
  p.kwh_per_m2_annualized = (p.total_kwh / static_cast<double>(p.days_covered)) * kDaysPerYear / floor_area_m2;
  p.seasonal_index = seasonal_indices(s);

  auto values = s.kwh_values();
  std::sort(values.begin(), values.end());
  const std::size_t k = std::max<std::size_t>(1, values.size() / 10);
  double low = 0.0, high = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    low += values[i];
    high += values[values.size() - 1 - i];
  }
  p.offpeak_load = low / static_cast<double>(k);
  p.peak_load = high / static_cast<double>(k);
  return p;
}

inline EnergyProfile profile(const MeterSeries& s, const BuildingDescriptor& b) {
  return profile(s, b.floor_area_m2);
}

}  // namespace homewise
