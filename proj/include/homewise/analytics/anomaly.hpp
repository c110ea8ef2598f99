#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <vector>

#include "homewise/analytics/iforest.hpp"
#include "homewise/analytics/stats.hpp"
#include "homewise/config.hpp"
#include "homewise/domain.hpp"

namespace homewise {

struct AnomalyFlag {
  Date date;
  AnomalyKind kind = AnomalyKind::Spike;
  AnomalyMethod method = AnomalyMethod::Iqr;
  double score = 0.0;
  double threshold = 0.0;

  friend bool operator==(const AnomalyFlag&, const AnomalyFlag&) = default;
};

inline constexpr double kSpreadEpsilon = 1e-9;

namespace detail {
inline void require_points(const MeterSeries& s, std::size_t n, const char* what) {
  if (s.size() < n)
    throw Error(ErrorCode::SeriesTooShort, std::string(what) + " needs at least " + std::to_string(n) + " readings",
                {std::to_string(s.size())});
}
}  // namespace detail

/// Tukey fences with quartiles by linear interpolation. Score is the distance
/// beyond the nearer fence divided by the IQR; a flag means score > 0. A
/// spread below 1e-9 yields no flags.
inline std::vector<AnomalyFlag> detect_iqr(const MeterSeries& s) {
  detail::require_points(s, 12, "IQR detection");
  auto sorted = s.kwh_values();
  std::sort(sorted.begin(), sorted.end());
  const double q1 = stats::quantile_sorted(sorted, 0.25);
  const double q3 = stats::quantile_sorted(sorted, 0.75);
  const double iqr = q3 - q1;
  std::vector<AnomalyFlag> out;
  if (iqr < kSpreadEpsilon) return out;
  const double lower = q1 - 1.5 * iqr;
  const double upper = q3 + 1.5 * iqr;
  for (const auto& r : s) {
    double beyond = 0.0;
    if (r.kwh > upper) beyond = r.kwh - upper;
    else if (r.kwh < lower) beyond = lower - r.kwh;
    const double score = beyond / std::max(iqr, kSpreadEpsilon);
    if (score > 0.0) out.push_back({r.date, AnomalyKind::Spike, AnomalyMethod::Iqr, score, 0.0});
  }
  return out;
}

/// Flags |x - mean| / sigma > k using the population standard deviation.
/// A series with no spread (relative to its magnitude) yields no flags.
inline std::vector<AnomalyFlag> detect_zscore(const MeterSeries& s, double k = 3.0) {
  detail::require_points(s, 12, "z-score detection");
  const auto xs = s.kwh_values();
  const double m = stats::mean(xs);
  const double sd = std::sqrt(stats::population_variance(xs));
  std::vector<AnomalyFlag> out;
  if (!(sd > 1e-12 * std::max(1.0, std::abs(m)))) return out;
  for (const auto& r : s) {
    const double z = std::abs(r.kwh - m) / sd;
    if (z > k) out.push_back({r.date, AnomalyKind::Spike, AnomalyMethod::Zscore, z, k});
  }
  return out;
}

/// Two-window mean-shift detector. At each boundary the score is
/// |mean(next w) - mean(previous w)| / max(pooled sd, eps); boundaries
/// scoring above `threshold` are grouped when within `w` readings of each
/// other and each group reports its maximum. Flags carry the first date of
/// the new level.
inline std::vector<AnomalyFlag> detect_step_change(const MeterSeries& s, std::size_t window = 14,
                                                   double threshold = 3.0) {
  if (window < 2) throw Error(ErrorCode::InvalidArgument, "step window must be >= 2");
  detail::require_points(s, 2 * window, "step-change detection");
  const auto xs = s.kwh_values();
  std::vector<std::pair<std::size_t, double>> candidates;
  for (std::size_t b = window; b + window <= xs.size(); ++b) {
    std::span<const double> prev(xs.data() + b - window, window);
    std::span<const double> next(xs.data() + b, window);
    const double pooled = std::sqrt((stats::sample_variance(prev) + stats::sample_variance(next)) / 2.0);
    const double score = std::abs(stats::mean(next) - stats::mean(prev)) / std::max(pooled, kSpreadEpsilon);
    if (score > threshold) candidates.emplace_back(b, score);
  }
  std::vector<AnomalyFlag> out;
  std::size_t i = 0;
  while (i < candidates.size()) {
    std::size_t best = i;
    std::size_t j = i + 1;
    while (j < candidates.size() && candidates[j].first - candidates[j - 1].first < window) {
      if (candidates[j].second > candidates[best].second) best = j;
      ++j;
    }
    out.push_back({s[candidates[best].first].date, AnomalyKind::StepChange, AnomalyMethod::Cusum,
                   candidates[best].second, threshold});
    i = j;
  }
  return out;
}

/// Per-day isolation-forest features: kWh, kWh minus the trailing 7-reading
/// mean (shorter at the start of the series), and ISO weekday index.
inline std::vector<std::array<double, 3>> iforest_features(const MeterSeries& s) {
  std::vector<std::array<double, 3>> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::size_t first = i >= 6 ? i - 6 : 0;
    double sum = 0.0;
    for (std::size_t j = first; j <= i; ++j) sum += s[j].kwh;
    const double rolling = sum / static_cast<double>(i - first + 1);
    out.push_back({s[i].kwh, s[i].kwh - rolling, static_cast<double>(s[i].date.weekday_index())});
  }
  return out;
}

struct IforestParams {
  std::uint64_t seed = 0;
  std::size_t trees = 100;
  std::size_t subsample = 256;
  double score_threshold = 0.6;
};

/// Isolation-forest anomaly score for every reading, in series order.
inline std::vector<double> iforest_scores(const MeterSeries& s, const IforestParams& params) {
  detail::require_points(s, 30, "isolation forest detection");
  const auto features = iforest_features(s);
  IsolationForest<3> forest({params.trees, params.subsample, params.seed});
  forest.fit(features);
  std::vector<double> out;
  out.reserve(features.size());
  for (const auto& f : features) out.push_back(forest.score(f));
  return out;
}

inline std::vector<AnomalyFlag> detect_iforest(const MeterSeries& s, const IforestParams& params = {}) {
  const auto scores = iforest_scores(s, params);
  std::vector<AnomalyFlag> out;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores[i] > params.score_threshold)
      out.push_back({s[i].date, AnomalyKind::Pattern, AnomalyMethod::Iforest, scores[i], params.score_threshold});
  return out;
}

/// Parses a comma-separated method list (`iqr,zscore,iforest,cusum`; `step`
/// is accepted for `cusum`). Throws UnknownMethod.
inline std::vector<AnomalyMethod> parse_methods(std::string_view list) {
  std::vector<AnomalyMethod> out;
  std::size_t pos = 0;
  while (pos <= list.size()) {
    const auto comma = list.find(',', pos);
    const auto token = detail::lower(detail::trim(list.substr(pos, comma == std::string_view::npos ? list.npos : comma - pos)));
    if (!token.empty()) {
      auto m = token == "step" ? std::optional<AnomalyMethod>(AnomalyMethod::Cusum) : enum_from_string<AnomalyMethod>(token);
      if (!m) throw Error(ErrorCode::UnknownMethod, "unknown anomaly method '" + token + "'", {token});
      if (std::find(out.begin(), out.end(), *m) == out.end()) out.push_back(*m);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

/// Runs the selected detectors. Detectors whose minimum length is not met
/// are skipped; results are ordered by date, then method.
inline std::vector<AnomalyFlag> detect_anomalies(const MeterSeries& s, std::span<const AnomalyMethod> methods,
                                                 std::uint64_t seed, const AnomalyConstants& k = {}) {
  std::vector<AnomalyFlag> out;
  auto append = [&](std::vector<AnomalyFlag> flags) { out.insert(out.end(), flags.begin(), flags.end()); };
  for (auto m : methods) {
    switch (m) {
      case AnomalyMethod::Iqr:
        if (s.size() >= 12) append(detect_iqr(s));
        break;
      case AnomalyMethod::Zscore:
        if (s.size() >= 12) append(detect_zscore(s, k.zscore_k));
        break;
      case AnomalyMethod::Cusum:
        if (s.size() >= 2 * static_cast<std::size_t>(k.step_window_days))
          append(detect_step_change(s, static_cast<std::size_t>(k.step_window_days), k.step_threshold));
        break;
      case AnomalyMethod::Iforest:
        if (s.size() >= 30)
          append(detect_iforest(s, {seed, static_cast<std::size_t>(k.iforest_trees),
                                    static_cast<std::size_t>(k.iforest_subsample), k.iforest_threshold}));
        break;
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const AnomalyFlag& a, const AnomalyFlag& b) {
    if (a.date != b.date) return a.date < b.date;
    return static_cast<int>(a.method) < static_cast<int>(b.method);
  });
  return out;
}

}  // namespace homewise
