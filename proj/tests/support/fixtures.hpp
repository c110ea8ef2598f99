#pragma once

// Shared test fixtures: synthetic meter series, reference houses, scratch
// directories.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "homewise/pipeline.hpp"

namespace hwtest {

namespace hw = homewise;
namespace fs = std::filesystem;

inline hw::MeterSeries series_from(hw::Date start, const std::vector<double>& kwh) {
  hw::MeterSeries s;
  for (std::size_t i = 0; i < kwh.size(); ++i) s.readings.push_back({start.plus_days(static_cast<long>(i)), kwh[i], {}, false});
  return s;
}

inline hw::MeterSeries constant_series(hw::Date start, std::size_t n, double value) {
  return series_from(start, std::vector<double>(n, value));
}

/// The example house: zone 2, 140 m2, two occupants, low insulation,
/// 20 halogen and 4 LED fixtures, 0.32 NZD/kWh.
inline hw::BuildingDescriptor example_house() {
  hw::BuildingDescriptor b;
  b.building_id = "HOUSE-0001";
  b.floor_area_m2 = 140.0;
  b.occupants = 2;
  b.construction_year = 1985;
  b.insulation_level = hw::InsulationLevel::Low;
  b.window_type = hw::WindowType::Single;
  b.air_leakage_est = hw::AirLeakage::Leaky;
  b.lighting_count_halogen = 20;
  b.lighting_count_led = 4;
  b.climate_zone = 2;
  b.electricity_price = 0.32;
  return b;
}

inline std::string building_json(const hw::BuildingDescriptor& b) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : hw::to_raw_fields(b)) j[k] = v;
  return j.dump();
}

/// Standard normal draws from mt19937_64 via Box-Muller, so sequences are
/// identical across standard libraries.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}
  double uniform() { return (static_cast<double>(rng_() >> 11) + 0.5) * 0x1.0p-53; }
  double operator()() {
    if (spare_) {
      const double v = *spare_;
      spare_.reset();
      return v;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }
  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
  std::optional<double> spare_;
};

/// Year-long style household: base load plus a heating term that follows the
/// zone's monthly degree days, with optional multiplicative noise and spikes.
struct Household {
  hw::Date start{2024, 1, 1};
  int days = 365;
  double base_kwh = 8.0;
  double kwh_per_hdd = 0.9;
  double noise_frac = 0.0;
  int zone = 2;
  std::uint64_t seed = 1;
  std::vector<std::pair<std::size_t, double>> spikes;  // (day index, multiple of the daily mean)
};

inline hw::MeterSeries synth_household(const Household& h) {
  const auto climate = hw::resolve_climate(h.zone);
  Gaussian g(h.seed);
  std::vector<double> kwh;
  kwh.reserve(static_cast<std::size_t>(h.days));
  for (int i = 0; i < h.days; ++i) {
    const auto d = h.start.plus_days(i);
    const double leap = (d.year() % 4 == 0 && (d.year() % 100 != 0 || d.year() % 400 == 0));
    const double hdd_day = climate.hdd_monthly[d.month() - 1] / hw::days_in_month(d.month(), leap != 0.0);
    double v = h.base_kwh + h.kwh_per_hdd * hdd_day;
    if (h.noise_frac > 0.0) v *= 1.0 + h.noise_frac * g();
    kwh.push_back(std::max(0.0, v));
  }
  double mean = 0.0;
  for (double v : kwh) mean += v;
  mean /= static_cast<double>(kwh.size());
  for (auto [idx, mult] : h.spikes) kwh.at(idx) = mult * mean;
  return series_from(h.start, kwh);
}

inline std::string meter_csv(const hw::MeterSeries& s, const std::optional<std::string>& id = std::nullopt) {
  auto copy = s;
  copy.building_id = id;
  return hw::write_meter_csv(copy);
}

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << content;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t")
      : path_(fs::temp_directory_path() / ("homewise-" + tag + "-" + hw::random_token().substr(0, 12))) {
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& s) const { return path_ / s; }

 private:
  fs::path path_;
};

/// Every regular file under `dir`, relative path -> content.
inline std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = read_file(e.path());
  return out;
}

}  // namespace hwtest
