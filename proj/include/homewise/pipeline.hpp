#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "homewise/analytics.hpp"
#include "homewise/config.hpp"
#include "homewise/ingest.hpp"
#include "homewise/privacy.hpp"
#include "homewise/reporting.hpp"
#include "homewise/scenarios.hpp"
#include "homewise/serialize.hpp"

namespace homewise {

/// Meter data plus an optional building descriptor, as received.
struct DatasetInput {
  std::string source_name;
  std::string content;
  std::optional<DataFormat> format;  // detected from name or content when absent
  std::optional<RawFields> building_fields;
};

/// Validated and cleaned dataset. Holds no raw identifier, only the
/// pseudonym.
struct PreparedDataset {
  std::string pseudonym;
  MeterSeries series;
  ValidationReport validation;
  std::size_t filled_days = 0;
  std::vector<std::string> cleaning_warnings;
  BuildingDescriptor building;
  ClimateRecord climate;
};

inline DataFormat detect_format(std::string_view source_name, std::string_view content) {
  const auto name = detail::lower(source_name);
  if (name.size() >= 5 && name.ends_with(".json")) return DataFormat::Json;
  if (name.size() >= 4 && name.ends_with(".csv")) return DataFormat::Csv;
  const auto body = detail::trim(detail::strip_bom(content));
  if (!body.empty() && (body.front() == '[' || body.front() == '{')) return DataFormat::Json;
  return DataFormat::Csv;
}

inline RawDataset parse_dataset(const DatasetInput& in) {
  const auto format = in.format.value_or(detect_format(in.source_name, in.content));
  return format == DataFormat::Json ? parse_meter_json(in.content, in.source_name)
                                    : parse_meter_csv(in.content, in.source_name);
}

/// Pseudonym for a dataset: the hashed building id when one is known,
/// otherwise the hashed content digest.
inline std::string dataset_pseudonym(const std::optional<std::string>& building_id, std::string_view content,
                                     std::string_view salt) {
  if (building_id && !building_id->empty()) return hash_building_id(*building_id, salt);
  return hash_building_id("content:" + sha256_hex(content), salt);
}

/// Readings only: ingest, validate and clean without a building descriptor.
struct PreparedSeries {
  std::string pseudonym;
  MeterSeries series;
  ValidationReport validation;
  std::size_t filled_days = 0;
  std::vector<std::string> cleaning_warnings;
};

inline PreparedSeries prepare_series(const DatasetInput& in, const Config& cfg = {}) {
  auto raw = parse_dataset(in);
  auto validated = validate_readings(raw.rows);
  PreparedSeries out;
  out.validation = std::move(validated.report);
  out.validation.warnings.insert(out.validation.warnings.begin(), raw.warnings.begin(), raw.warnings.end());
  out.pseudonym = dataset_pseudonym(validated.series.building_id, in.content, cfg.privacy_salt);
  auto cleaned = clean_series(validated.series, cfg.fill_gap_max_days);
  out.series = std::move(cleaned.series);
  out.series.building_id = out.pseudonym;
  out.filled_days = cleaned.filled_days;
  out.cleaning_warnings = std::move(cleaned.warnings);
  return out;
}

/// Ingest, validate, clean, resolve the building and its climate.
inline PreparedDataset prepare_dataset(const DatasetInput& in, const Config& cfg = {}) {
  auto raw = parse_dataset(in);
  auto validated = validate_readings(raw.rows);

  RawFields fields;
  if (raw.embedded_building) fields = *raw.embedded_building;
  if (in.building_fields)
    for (const auto& [k, v] : *in.building_fields) fields[detail::lower(k)] = v;
  auto building = validate_building(fields, cfg);

  PreparedDataset out;
  out.validation = std::move(validated.report);
  out.validation.warnings.insert(out.validation.warnings.begin(), raw.warnings.begin(), raw.warnings.end());
  out.validation.warnings.insert(out.validation.warnings.end(), building.report.warnings.begin(),
                                 building.report.warnings.end());

  const auto& id = building.building.building_id ? building.building.building_id : validated.series.building_id;
  out.pseudonym = dataset_pseudonym(id, in.content, cfg.privacy_salt);

  auto cleaned = clean_series(validated.series, cfg.fill_gap_max_days);
  out.series = std::move(cleaned.series);
  out.series.building_id = out.pseudonym;
  out.filled_days = cleaned.filled_days;
  out.cleaning_warnings = std::move(cleaned.warnings);

  out.building = std::move(building.building);
  out.building.building_id = out.pseudonym;
  out.climate = resolve_climate(out.building, cfg.climate);
  return out;
}

inline std::uint64_t dataset_seed(const PreparedDataset& d, std::uint64_t seed) {
  return derive_seed(seed, d.pseudonym);
}

inline std::vector<AnomalyMethod> all_anomaly_methods() {
  const auto all = all_enum_values<AnomalyMethod>();
  return {all.begin(), all.end()};
}

/// Detectors over a prepared series; the forest seed is derived from the
/// run seed and the pseudonym.
template <typename Prepared>
std::vector<AnomalyFlag> dataset_anomalies(const Prepared& d, std::span<const AnomalyMethod> methods,
                                           std::uint64_t seed, const Config& cfg = {}) {
  return detect_anomalies(d.series, methods, derive_seed(seed, d.pseudonym), cfg.anomaly);
}

inline BaselineModel dataset_baseline(const PreparedDataset& d) {
  return fit_baseline(d.series, d.climate, d.building);
}

inline LoadDecomposition dataset_loads(const PreparedDataset& d, const BaselineModel& model, const Config& cfg = {}) {
  return decompose_loads(d.series, model, d.climate, d.building, cfg);
}

struct ScenarioOutcome {
  std::vector<ScenarioResult> results;
  ComparisonTable table;
  RecommendationSet recommendations;
};

/// Runs the given specs (an empty list yields the baseline-only table) and
/// the rule engine.
inline ScenarioOutcome dataset_scenarios(const PreparedDataset& d, std::span<const ScenarioSpec> specs,
                                         std::span<const AnomalyFlag> flags, const Config& cfg = {}) {
  const auto model = dataset_baseline(d);
  const auto loads = dataset_loads(d, model, cfg);
  ScenarioOutcome out;
  out.results = run_scenarios(d.building, loads, specs, cfg);
  out.table = out.results.empty() ? baseline_only_table() : compare_scenarios(out.results);
  out.recommendations = recommend(out.table, d.building, flags, cfg.envelope);
  return out;
}

/// Full analysis of one prepared dataset with the default scenario set.
inline ReportBundle analyze_dataset(const PreparedDataset& d, const Config& cfg, std::uint64_t seed,
                                    std::optional<std::string> generated_at = std::nullopt) {
  ReportInputs in;
  in.building = d.building;
  in.pseudonym = d.pseudonym;
  in.validation = d.validation;
  in.filled_days = d.filled_days;
  in.cleaning_warnings = d.cleaning_warnings;
  in.climate = d.climate;
  in.profile = profile(d.series, d.building);
  const auto methods = all_anomaly_methods();
  in.flags = dataset_anomalies(d, methods, seed, cfg);
  const auto model = dataset_baseline(d);
  in.baseline = model;
  in.loads = dataset_loads(d, model, cfg);
  const auto specs = default_scenario_specs();
  in.scenarios = run_scenarios(d.building, in.loads, specs, cfg);
  in.table = in.scenarios.empty() ? baseline_only_table() : compare_scenarios(in.scenarios);
  in.recommendations = recommend(*in.table, d.building, in.flags, cfg.envelope);
  return build_report(std::move(in), cfg, seed, dataset_seed(d, seed), std::move(generated_at));
}

}  // namespace homewise
