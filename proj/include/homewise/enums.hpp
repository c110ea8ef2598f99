#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace homewise {

enum class WindowType { Single, Double, Triple };
enum class AirLeakage { Tight, Typical, Leaky };
enum class HvacType { HeatPump, ResistiveHeaters, Gas, Wood, None };
enum class WaterHeating { ElectricCylinder, Gas, HeatPump, Solar };
enum class InsulationLevel { Low, Moderate, High };
enum class ClimateSource { UserSupplied, RegionalDefault };
enum class DataFormat { Csv, Json };

enum class ReasonCode { NegativeKwh, BadDate, MissingField, OutOfRange, DuplicateDate };

enum class AnomalyKind { Spike, StepChange, Pattern };
enum class AnomalyMethod { Iqr, Zscore, Iforest, Cusum };

enum class BaselineKind { Regression, MovingAverage };
enum class DecompositionMethod { RegressionSplit, ShareTable };

enum class ScenarioKind { LedRetrofit, InsulationUpgrade, ThermostatSetback, StandbyReduction };

/// Wire names for every enum. Each table is the single source of truth for
/// both directions of the conversion.
template <typename E>
struct EnumNames;

#define HOMEWISE_ENUM_NAMES(Type, ...)                                              \
  template <>                                                                       \
  struct EnumNames<Type> {                                                          \
    static constexpr std::array values = {__VA_ARGS__};                             \
  };

HOMEWISE_ENUM_NAMES(WindowType, std::pair{WindowType::Single, std::string_view{"single"}},
                    std::pair{WindowType::Double, std::string_view{"double"}},
                    std::pair{WindowType::Triple, std::string_view{"triple"}})
HOMEWISE_ENUM_NAMES(AirLeakage, std::pair{AirLeakage::Tight, std::string_view{"tight"}},
                    std::pair{AirLeakage::Typical, std::string_view{"typical"}},
                    std::pair{AirLeakage::Leaky, std::string_view{"leaky"}})
HOMEWISE_ENUM_NAMES(HvacType, std::pair{HvacType::HeatPump, std::string_view{"heat_pump"}},
                    std::pair{HvacType::ResistiveHeaters, std::string_view{"resistive_heaters"}},
                    std::pair{HvacType::Gas, std::string_view{"gas"}},
                    std::pair{HvacType::Wood, std::string_view{"wood"}},
                    std::pair{HvacType::None, std::string_view{"none"}})
HOMEWISE_ENUM_NAMES(WaterHeating,
                    std::pair{WaterHeating::ElectricCylinder, std::string_view{"electric_cylinder"}},
                    std::pair{WaterHeating::Gas, std::string_view{"gas"}},
                    std::pair{WaterHeating::HeatPump, std::string_view{"heat_pump"}},
                    std::pair{WaterHeating::Solar, std::string_view{"solar"}})
HOMEWISE_ENUM_NAMES(InsulationLevel, std::pair{InsulationLevel::Low, std::string_view{"low"}},
                    std::pair{InsulationLevel::Moderate, std::string_view{"moderate"}},
                    std::pair{InsulationLevel::High, std::string_view{"high"}})
HOMEWISE_ENUM_NAMES(ClimateSource,
                    std::pair{ClimateSource::UserSupplied, std::string_view{"user_supplied"}},
                    std::pair{ClimateSource::RegionalDefault, std::string_view{"regional_default"}})
HOMEWISE_ENUM_NAMES(DataFormat, std::pair{DataFormat::Csv, std::string_view{"csv"}},
                    std::pair{DataFormat::Json, std::string_view{"json"}})
HOMEWISE_ENUM_NAMES(ReasonCode, std::pair{ReasonCode::NegativeKwh, std::string_view{"negative_kwh"}},
                    std::pair{ReasonCode::BadDate, std::string_view{"bad_date"}},
                    std::pair{ReasonCode::MissingField, std::string_view{"missing_field"}},
                    std::pair{ReasonCode::OutOfRange, std::string_view{"out_of_range"}},
                    std::pair{ReasonCode::DuplicateDate, std::string_view{"duplicate_date"}})
HOMEWISE_ENUM_NAMES(AnomalyKind, std::pair{AnomalyKind::Spike, std::string_view{"spike"}},
                    std::pair{AnomalyKind::StepChange, std::string_view{"step_change"}},
                    std::pair{AnomalyKind::Pattern, std::string_view{"pattern"}})
HOMEWISE_ENUM_NAMES(AnomalyMethod, std::pair{AnomalyMethod::Iqr, std::string_view{"iqr"}},
                    std::pair{AnomalyMethod::Zscore, std::string_view{"zscore"}},
                    std::pair{AnomalyMethod::Iforest, std::string_view{"iforest"}},
                    std::pair{AnomalyMethod::Cusum, std::string_view{"cusum"}})
HOMEWISE_ENUM_NAMES(BaselineKind, std::pair{BaselineKind::Regression, std::string_view{"regression"}},
                    std::pair{BaselineKind::MovingAverage, std::string_view{"moving_average"}})
HOMEWISE_ENUM_NAMES(DecompositionMethod,
                    std::pair{DecompositionMethod::RegressionSplit, std::string_view{"regression_split"}},
                    std::pair{DecompositionMethod::ShareTable, std::string_view{"share_table"}})
HOMEWISE_ENUM_NAMES(ScenarioKind,
                    std::pair{ScenarioKind::LedRetrofit, std::string_view{"led_retrofit"}},
                    std::pair{ScenarioKind::InsulationUpgrade, std::string_view{"insulation_upgrade"}},
                    std::pair{ScenarioKind::ThermostatSetback, std::string_view{"thermostat_setback"}},
                    std::pair{ScenarioKind::StandbyReduction, std::string_view{"standby_reduction"}})

#undef HOMEWISE_ENUM_NAMES

template <typename E>
constexpr std::string_view enum_name(E value) {
  for (const auto& [v, name] : EnumNames<E>::values)
    if (v == value) return name;
  return "unknown";
}

template <typename E>
std::optional<E> enum_from_string(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const auto& [v, name] : EnumNames<E>::values)
    if (name == lower) return v;
  return std::nullopt;
}

template <typename E>
constexpr auto all_enum_values() {
  std::array<E, EnumNames<E>::values.size()> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = EnumNames<E>::values[i].first;
  return out;
}

}  // namespace homewise
