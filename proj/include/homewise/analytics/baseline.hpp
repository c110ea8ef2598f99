#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "homewise/analytics/profile.hpp"
#include "homewise/domain.hpp"

namespace homewise {

struct BaselineModel {
  BaselineKind kind = BaselineKind::MovingAverage;
  double intercept = 0.0;
  double coef_hdd = 0.0;
  double coef_cdd = 0.0;
  double coef_occupants = 0.0;
  double coef_floor_area = 0.0;
  double r_squared = 0.0;
  int window = 0;                // moving_average only
  double daily_mean_kwh = 0.0;   // moving_average only
  std::size_t months_used = 0;   // regression only
  std::vector<std::string> notes;
};

struct MonthlyPrediction {
  unsigned month = 1;  // 1 = January
  double expected_kwh = 0.0;
};

inline constexpr std::size_t kMinRegressionMonths = 6;
inline constexpr int kMovingAverageWindow = 30;

struct OlsFit {
  Eigen::VectorXd coef;
  double r_squared = 0.0;
};

/// Ordinary least squares via column-pivoting QR. Returns nullopt when the
/// design is rank deficient.
inline std::optional<OlsFit> ordinary_least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() < x.cols()) return std::nullopt;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < x.cols()) return std::nullopt;
  OlsFit fit;
  fit.coef = qr.solve(y);
  const Eigen::VectorXd resid = y - x * fit.coef;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  fit.r_squared = ss_tot > 0.0 ? std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0) : 1.0;
  return fit;
}

/// Months whose every day has a reading.
inline std::vector<MonthlyTotal> complete_months(const MeterSeries& s) {
  std::vector<MonthlyTotal> out;
  for (const auto& m : monthly_totals(s))
    if (m.days == m.month.days()) out.push_back(m);
  return out;
}

inline BaselineModel moving_average_baseline(const MeterSeries& s, std::string reason) {
  BaselineModel model;
  model.kind = BaselineKind::MovingAverage;
  model.window = kMovingAverageWindow;
  const std::size_t n = std::min<std::size_t>(s.size(), kMovingAverageWindow);
  double sum = 0.0;
  for (std::size_t i = s.size() - n; i < s.size(); ++i) sum += s[i].kwh;
  model.daily_mean_kwh = n > 0 ? sum / static_cast<double>(n) : 0.0;
  model.notes.push_back(std::move(reason));
  return model;
}

namespace detail {

struct Regressor {
  const char* name;
  std::vector<double> values;
  double* target;
};

/// Fits y on an intercept plus every non-constant regressor. Constant
/// regressors are folded into the intercept with coefficient 0.
inline bool fit_with_drop_rule(const std::vector<double>& y, std::vector<Regressor> regressors, BaselineModel& model) {
  std::vector<const Regressor*> kept;
  for (auto& r : regressors) {
    const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
    if (*hi - *lo > 1e-12 * std::max(1.0, std::abs(*hi))) {
      kept.push_back(&r);
    } else {
      *r.target = 0.0;
      model.notes.push_back(std::string(r.name) + " is constant across rows; absorbed into the intercept");
    }
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(y.size()), static_cast<Eigen::Index>(kept.size() + 1));
  Eigen::VectorXd yv(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    x(row, 0) = 1.0;
    for (std::size_t c = 0; c < kept.size(); ++c) x(row, static_cast<Eigen::Index>(c + 1)) = kept[c]->values[i];
    yv(row) = y[i];
  }
  auto fit = ordinary_least_squares(x, yv);
  if (!fit) return false;
  model.kind = BaselineKind::Regression;
  model.intercept = fit->coef(0);
  for (std::size_t c = 0; c < kept.size(); ++c) *kept[c]->target = fit->coef(static_cast<Eigen::Index>(c + 1));
  model.r_squared = fit->r_squared;
  model.months_used = y.size();
  for (double v : {model.intercept, model.coef_hdd, model.coef_cdd, model.coef_occupants, model.coef_floor_area})
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace detail

/// Monthly degree-day regression kWh ~ HDD + CDD (+ occupants + floor area).
///
/// Rows are complete calendar months. For a single building occupants and
/// floor area are constant, so they fold into the intercept. Falls back to a
/// 30-day moving average when climate data is absent, fewer than six complete
/// months exist, or the design is degenerate.
inline BaselineModel fit_baseline(const MeterSeries& s, const std::optional<ClimateRecord>& climate,
                                  const BuildingDescriptor& b) {
  if (s.empty()) throw Error(ErrorCode::SeriesTooShort, "baseline needs at least one reading");
  if (!climate) return moving_average_baseline(s, "no degree-day data; moving average baseline");
  const auto months = complete_months(s);
  if (months.size() < kMinRegressionMonths)
    return moving_average_baseline(s, "fewer than 6 complete months; moving average baseline");

  BaselineModel model;
  std::vector<double> y;
  std::vector<detail::Regressor> regs = {
      {"hdd", {}, &model.coef_hdd},
      {"cdd", {}, &model.coef_cdd},
      {"occupants", {}, &model.coef_occupants},
      {"floor_area", {}, &model.coef_floor_area},
  };
  for (const auto& m : months) {
    y.push_back(m.kwh_sum);
    regs[0].values.push_back(climate->hdd_monthly[m.month.month - 1]);
    regs[1].values.push_back(climate->cdd_monthly[m.month.month - 1]);
    regs[2].values.push_back(static_cast<double>(b.occupants));
    regs[3].values.push_back(b.floor_area_m2);
  }
  if (!detail::fit_with_drop_rule(y, std::move(regs), model))
    return moving_average_baseline(s, "degenerate regression design; moving average baseline");
  return model;
}

struct PooledSample {
  MeterSeries series;
  ClimateRecord climate;
  BuildingDescriptor building;
};

/// Pooled fit across buildings, where occupants and floor area vary and get
/// their own coefficients. Throws DegenerateDesign when the pooled design is
/// rank deficient.
inline BaselineModel fit_pooled_baseline(std::span<const PooledSample> samples) {
  BaselineModel model;
  std::vector<double> y;
  std::vector<detail::Regressor> regs = {
      {"hdd", {}, &model.coef_hdd},
      {"cdd", {}, &model.coef_cdd},
      {"occupants", {}, &model.coef_occupants},
      {"floor_area", {}, &model.coef_floor_area},
  };
  for (const auto& sample : samples) {
    for (const auto& m : complete_months(sample.series)) {
      y.push_back(m.kwh_sum);
      regs[0].values.push_back(sample.climate.hdd_monthly[m.month.month - 1]);
      regs[1].values.push_back(sample.climate.cdd_monthly[m.month.month - 1]);
      regs[2].values.push_back(static_cast<double>(sample.building.occupants));
      regs[3].values.push_back(sample.building.floor_area_m2);
    }
  }
  if (y.size() < kMinRegressionMonths)
    throw Error(ErrorCode::SeriesTooShort, "pooled baseline needs at least 6 complete months");
  if (!detail::fit_with_drop_rule(y, std::move(regs), model))
    throw Error(ErrorCode::DegenerateDesign, "pooled regression design is rank deficient");
  return model;
}

/// Expected kWh per calendar month (non-leap month lengths for the moving
/// average).
inline std::vector<MonthlyPrediction> predict_baseline(const BaselineModel& m,
                                                       const std::optional<ClimateRecord>& climate,
                                                       const BuildingDescriptor& b) {
  std::vector<MonthlyPrediction> out;
  if (m.kind == BaselineKind::Regression) {
    if (!climate) throw Error(ErrorCode::ModelClimateMismatch, "regression baseline needs a climate record");
    for (unsigned month = 1; month <= 12; ++month) {
      const double v = m.intercept + m.coef_hdd * climate->hdd_monthly[month - 1] +
                       m.coef_cdd * climate->cdd_monthly[month - 1] +
                       m.coef_occupants * static_cast<double>(b.occupants) + m.coef_floor_area * b.floor_area_m2;
      out.push_back({month, v});
    }
  } else {
    for (unsigned month = 1; month <= 12; ++month)
      out.push_back({month, m.daily_mean_kwh * static_cast<double>(days_in_month(month))});
  }
  return out;
}

}  // namespace homewise
