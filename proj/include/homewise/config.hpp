#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <map>
#include <string>
#include <utility>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "homewise/enums.hpp"
#include "homewise/error.hpp"

namespace homewise {

inline constexpr std::string_view kToolVersion = "0.1.0";

struct EnvelopeRValues {
  double wall_r = 0.0;
  double roof_r = 0.0;
  friend bool operator==(const EnvelopeRValues&, const EnvelopeRValues&) = default;
};

/// Representative R-values (m²·K/W) per categorical insulation level. These
/// are assumptions, overridable under `envelope:` in the config file.
struct EnvelopeTable {
  EnvelopeRValues low{0.8, 1.4};
  EnvelopeRValues moderate{1.5, 2.9};
  EnvelopeRValues high{2.0, 3.3};

  const EnvelopeRValues& row(InsulationLevel level) const {
    switch (level) {
      case InsulationLevel::Low: return low;
      case InsulationLevel::Moderate: return moderate;
      case InsulationLevel::High: return high;
    }
    return moderate;
  }
  EnvelopeRValues& row(InsulationLevel level) {
    return const_cast<EnvelopeRValues&>(std::as_const(*this).row(level));
  }
};

struct ZoneDegreeDays {
  double hdd_annual = 0.0;
  double cdd_annual = 0.0;
};

/// Regional average degree days (base 18 °C) for the six NZBC H1 climate
/// zones, and the month-of-year shape used to spread annual totals. The
/// numbers are approximate regional averages and should be replaced with
/// local data where available.
struct ClimateDefaults {
  double base_temperature_c = 18.0;
  std::array<ZoneDegreeDays, 6> zones{{
      {1100.0, 90.0},  // 1 Auckland/Northland
      {1500.0, 55.0},  // 2 Upper North Island
      {1900.0, 25.0},  // 3 Lower North Island
      {1950.0, 30.0},  // 4 Top of South Island
      {2400.0, 20.0},  // 5 Canterbury/coastal Otago
      {2900.0, 5.0},   // 6 Central Plateau/Southern Alps/Southland
  }};
  // Southern hemisphere: heating weighted to June-August, cooling to Dec-Feb.
  std::array<double, 12> hdd_profile{0.02, 0.02, 0.04, 0.07, 0.11, 0.14,
                                     0.15, 0.14, 0.11, 0.09, 0.06, 0.05};
  std::array<double, 12> cdd_profile{0.28, 0.26, 0.14, 0.03, 0.0, 0.0,
                                     0.0,  0.0,  0.0,  0.02, 0.09, 0.18};
};

struct LightingConstants {
  double halogen_watts = 50.0;
  double led_watts = 8.0;
  double hours_per_day = 3.0;
};

struct ScenarioConstants {
  double led_default_factor = 0.675;
  double led_unit_cost_nzd = 25.0;
  double insulation_unit_cost_nzd_per_m2 = 30.0;
  double insulation_factor_low = 0.30;
  double insulation_factor_moderate = 0.20;
  double insulation_factor_high = 0.10;
  double setback_fraction_per_degc = 0.05;
  double default_setback_degc = 1.0;
  double standby_kwh_yr = 100.0;
};

struct AnomalyConstants {
  double zscore_k = 3.0;
  int step_window_days = 14;
  double step_threshold = 3.0;
  int iforest_trees = 100;
  int iforest_subsample = 256;
  double iforest_threshold = 0.6;
};

/// Electricity end-use shares used when no regression baseline is available.
struct LoadShareTable {
  std::map<HvacType, double> heating_share{{HvacType::HeatPump, 0.22},
                                          {HvacType::ResistiveHeaters, 0.32},
                                          {HvacType::Gas, 0.04},
                                          {HvacType::Wood, 0.02},
                                          {HvacType::None, 0.0}};
  std::array<double, 6> zone_heating_factor{0.75, 0.9, 1.0, 1.0, 1.15, 1.3};
  // Only heat pumps provide cooling.
  std::array<double, 6> heat_pump_cooling_share{0.04, 0.03, 0.015, 0.015, 0.01, 0.0};
};

struct BatchSettings {
  unsigned parallelism = 0;  // 0 = available cores
  std::string uploads_dir = "uploads";
  std::string exports_dir = "exports";
  std::string results_dir = "results";
};

struct ServerSettings {
  int port = 8080;
  bool loopback_only = true;
  double max_upload_mb = 50.0;
  std::string static_dir;
};

struct Config {
  int fill_gap_max_days = 3;
  std::string climate_defaults_path;
  double default_price_nzd_per_kwh = 0.32;
  EnvelopeTable envelope;
  ClimateDefaults climate;
  LightingConstants lighting;
  ScenarioConstants scenarios;
  AnomalyConstants anomaly;
  LoadShareTable load_shares;
  BatchSettings batch;
  std::string privacy_salt;
  ServerSettings server;
};

namespace detail {

template <typename T>
void read_if(const YAML::Node& node, const char* key, T& out) {
  if (node && node[key]) {
    try {
      out = node[key].as<T>();
    } catch (const YAML::Exception&) {
      throw Error(ErrorCode::InvalidArgument, std::string("config key '") + key + "' has the wrong type");
    }
  }
}

template <std::size_t N>
void read_array_if(const YAML::Node& node, const char* key, std::array<double, N>& out) {
  if (!node || !node[key]) return;
  const auto seq = node[key];
  if (!seq.IsSequence() || seq.size() != N)
    throw Error(ErrorCode::InvalidArgument,
                std::string("config key '") + key + "' must be a list of " + std::to_string(N) + " numbers");
  for (std::size_t i = 0; i < N; ++i) out[i] = seq[i].as<double>();
}

inline void apply_climate_yaml(const YAML::Node& root, ClimateDefaults& climate) {
  read_if(root, "base_temperature_c", climate.base_temperature_c);
  read_array_if(root, "hdd_profile", climate.hdd_profile);
  read_array_if(root, "cdd_profile", climate.cdd_profile);
  if (const auto zones = root["zones"]) {
    for (auto it = zones.begin(); it != zones.end(); ++it) {
      const int zone = it->first.as<int>();
      if (zone < 1 || zone > 6) throw Error(ErrorCode::InvalidArgument, "climate zone keys must be 1-6");
      read_if(it->second, "hdd", climate.zones[zone - 1].hdd_annual);
      read_if(it->second, "cdd", climate.zones[zone - 1].cdd_annual);
    }
  }
}

inline void check_profile(const std::array<double, 12>& profile, const char* name) {
  double sum = 0.0;
  for (double w : profile) {
    if (!(w >= 0.0)) throw Error(ErrorCode::InvalidArgument, std::string(name) + " weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, std::string(name) + " must sum to 1");
}

}  // namespace detail

inline ClimateDefaults load_climate_defaults(const std::filesystem::path& path) {
  ClimateDefaults climate;
  try {
    detail::apply_climate_yaml(YAML::LoadFile(path.string()), climate);
  } catch (const YAML::BadFile&) {
    throw Error(ErrorCode::IoFailure, "cannot read climate defaults file", {path.string()});
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidArgument, "malformed climate defaults file", {e.what()});
  }
  detail::check_profile(climate.hdd_profile, "hdd_profile");
  detail::check_profile(climate.cdd_profile, "cdd_profile");
  return climate;
}

/// Parses YAML config text. Relative `climate_defaults_path` values resolve
/// against `base_dir`.
inline Config parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = {}) {
  Config cfg;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::InvalidArgument, "malformed config file", {e.what()});
  }
  if (!root || root.IsNull()) return cfg;

  detail::read_if(root, "fill_gap_max_days", cfg.fill_gap_max_days);
  detail::read_if(root, "default_price_nzd_per_kwh", cfg.default_price_nzd_per_kwh);
  detail::read_if(root, "climate_defaults_path", cfg.climate_defaults_path);

  if (const auto env = root["envelope"]) {
    for (auto level : all_enum_values<InsulationLevel>()) {
      const std::string key(enum_name(level));
      auto& row = cfg.envelope.row(level);
      if (env[key]) {
        detail::read_if(env[key], "wall_R", row.wall_r);
        detail::read_if(env[key], "roof_R", row.roof_r);
      }
    }
  }
  if (const auto l = root["lighting"]) {
    detail::read_if(l, "halogen_watts", cfg.lighting.halogen_watts);
    detail::read_if(l, "led_watts", cfg.lighting.led_watts);
    detail::read_if(l, "hours_per_day", cfg.lighting.hours_per_day);
  }
  if (const auto s = root["scenarios"]) {
    auto& sc = cfg.scenarios;
    detail::read_if(s, "led_default_factor", sc.led_default_factor);
    detail::read_if(s, "led_unit_cost_nzd", sc.led_unit_cost_nzd);
    detail::read_if(s, "insulation_unit_cost_nzd_per_m2", sc.insulation_unit_cost_nzd_per_m2);
    detail::read_if(s, "insulation_factor_low", sc.insulation_factor_low);
    detail::read_if(s, "insulation_factor_moderate", sc.insulation_factor_moderate);
    detail::read_if(s, "insulation_factor_high", sc.insulation_factor_high);
    detail::read_if(s, "setback_fraction_per_degc", sc.setback_fraction_per_degc);
    detail::read_if(s, "default_setback_degc", sc.default_setback_degc);
    detail::read_if(s, "standby_kwh_yr", sc.standby_kwh_yr);
  }
  if (const auto a = root["anomaly"]) {
    auto& an = cfg.anomaly;
    detail::read_if(a, "zscore_k", an.zscore_k);
    detail::read_if(a, "step_window_days", an.step_window_days);
    detail::read_if(a, "step_threshold", an.step_threshold);
    detail::read_if(a, "iforest_trees", an.iforest_trees);
    detail::read_if(a, "iforest_subsample", an.iforest_subsample);
    detail::read_if(a, "iforest_threshold", an.iforest_threshold);
  }
  if (const auto ls = root["load_shares"]) {
    if (const auto hs = ls["heating_share"]) {
      for (auto it = hs.begin(); it != hs.end(); ++it) {
        auto hvac = enum_from_string<HvacType>(it->first.as<std::string>());
        if (!hvac) throw Error(ErrorCode::InvalidArgument, "unknown hvac_type in load_shares.heating_share");
        cfg.load_shares.heating_share[*hvac] = it->second.as<double>();
      }
    }
    detail::read_array_if(ls, "zone_heating_factor", cfg.load_shares.zone_heating_factor);
    detail::read_array_if(ls, "heat_pump_cooling_share", cfg.load_shares.heat_pump_cooling_share);
  }
  if (const auto b = root["batch"]) {
    detail::read_if(b, "parallelism", cfg.batch.parallelism);
    detail::read_if(b, "uploads_dir", cfg.batch.uploads_dir);
    detail::read_if(b, "exports_dir", cfg.batch.exports_dir);
    detail::read_if(b, "results_dir", cfg.batch.results_dir);
  }
  if (const auto p = root["privacy"]) detail::read_if(p, "salt", cfg.privacy_salt);
  if (const auto s = root["server"]) {
    detail::read_if(s, "port", cfg.server.port);
    detail::read_if(s, "loopback_only", cfg.server.loopback_only);
    detail::read_if(s, "max_upload_mb", cfg.server.max_upload_mb);
    detail::read_if(s, "static_dir", cfg.server.static_dir);
  }

  if (cfg.fill_gap_max_days < 0) throw Error(ErrorCode::InvalidArgument, "fill_gap_max_days must be >= 0");
  if (!(cfg.default_price_nzd_per_kwh > 0.0))
    throw Error(ErrorCode::InvalidArgument, "default_price_nzd_per_kwh must be > 0");
  if (!(cfg.server.max_upload_mb > 0.0)) throw Error(ErrorCode::InvalidArgument, "server.max_upload_mb must be > 0");

  if (!cfg.climate_defaults_path.empty()) {
    std::filesystem::path p = cfg.climate_defaults_path;
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    cfg.climate = load_climate_defaults(p);
  }
  return cfg;
}

/// Loads a config file. A missing file yields the built-in defaults only
/// when `must_exist` is false.
inline Config load_config(const std::filesystem::path& path, bool must_exist = true) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) {
    if (must_exist) throw Error(ErrorCode::IoFailure, "config file not found", {path.string()});
    return Config{};
  }
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config file", {path.string()});
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.parent_path());
}

/// Reproducibility snapshot embedded in report bundles. The privacy salt is
/// never copied, only whether one is configured.
inline nlohmann::ordered_json config_snapshot(const Config& cfg) {
  using nlohmann::ordered_json;
  ordered_json env = ordered_json::object();
  for (auto level : all_enum_values<InsulationLevel>()) {
    const auto& row = cfg.envelope.row(level);
    env[std::string(enum_name(level))] = {{"wall_R", row.wall_r}, {"roof_R", row.roof_r}};
  }
  ordered_json zones = ordered_json::array();
  for (std::size_t i = 0; i < cfg.climate.zones.size(); ++i)
    zones.push_back({{"zone", i + 1}, {"hdd", cfg.climate.zones[i].hdd_annual}, {"cdd", cfg.climate.zones[i].cdd_annual}});
  ordered_json heating_share = ordered_json::object();
  for (const auto& [hvac, share] : cfg.load_shares.heating_share) heating_share[std::string(enum_name(hvac))] = share;

  const auto& sc = cfg.scenarios;
  const auto& an = cfg.anomaly;
  return ordered_json{
      {"fill_gap_max_days", cfg.fill_gap_max_days},
      {"default_price_nzd_per_kwh", cfg.default_price_nzd_per_kwh},
      {"envelope", env},
      {"climate_defaults",
       {{"base_temperature_c", cfg.climate.base_temperature_c},
        {"zones", zones},
        {"hdd_profile", cfg.climate.hdd_profile},
        {"cdd_profile", cfg.climate.cdd_profile}}},
      {"lighting",
       {{"halogen_watts", cfg.lighting.halogen_watts},
        {"led_watts", cfg.lighting.led_watts},
        {"hours_per_day", cfg.lighting.hours_per_day}}},
      {"scenarios",
       {{"led_default_factor", sc.led_default_factor},
        {"led_unit_cost_nzd", sc.led_unit_cost_nzd},
        {"insulation_unit_cost_nzd_per_m2", sc.insulation_unit_cost_nzd_per_m2},
        {"insulation_factor_low", sc.insulation_factor_low},
        {"insulation_factor_moderate", sc.insulation_factor_moderate},
        {"insulation_factor_high", sc.insulation_factor_high},
        {"setback_fraction_per_degc", sc.setback_fraction_per_degc},
        {"default_setback_degc", sc.default_setback_degc},
        {"standby_kwh_yr", sc.standby_kwh_yr}}},
      {"anomaly",
       {{"zscore_k", an.zscore_k},
        {"step_window_days", an.step_window_days},
        {"step_threshold", an.step_threshold},
        {"iforest_trees", an.iforest_trees},
        {"iforest_subsample", an.iforest_subsample},
        {"iforest_threshold", an.iforest_threshold}}},
      {"load_shares",
       {{"heating_share", heating_share},
        {"zone_heating_factor", cfg.load_shares.zone_heating_factor},
        {"heat_pump_cooling_share", cfg.load_shares.heat_pump_cooling_share}}},
      {"privacy", {{"salt_configured", !cfg.privacy_salt.empty()}}},
  };
}

}  // namespace homewise
