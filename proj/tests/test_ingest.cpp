#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace homewise;

namespace {

MeterSeries validated(std::string_view csv_text) { return validate_readings(parse_meter_csv(csv_text).rows).series; }

}  // namespace

TEST(ParseMeterCsv, HappyPath) {
  const auto raw = parse_meter_csv("meter_date,kwh,cost\n2024-01-01,10.5,3.36\n2024-01-02,9,2.88\n");
  ASSERT_EQ(raw.rows.size(), 2u);
  EXPECT_EQ(raw.format, DataFormat::Csv);
  EXPECT_EQ(*raw.rows[1].get("kwh"), "9");
  EXPECT_TRUE(raw.warnings.empty());
}

TEST(ParseMeterCsv, HeaderCaseInsensitive) {
  const auto raw = parse_meter_csv("KWH,METER_DATE\n4,2024-05-01\n");
  ASSERT_EQ(raw.rows.size(), 1u);
  EXPECT_EQ(*raw.rows[0].get("meter_date"), "2024-05-01");
  EXPECT_EQ(*raw.rows[0].get("kwh"), "4");
}

TEST(ParseMeterCsv, MissingColumn) {
  try {
    parse_meter_csv("date,energy\n2024-01-01,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
    EXPECT_EQ(e.details().at(0), "meter_date");
  }
  try {
    parse_meter_csv("meter_date,energy\n2024-01-01,1\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.details().at(0), "kwh");
  }
}

TEST(ParseMeterCsv, UnknownColumnsIgnoredWithWarning) {
  const auto raw = parse_meter_csv("meter_date,kwh,temperature\n2024-01-01,1,12\n");
  ASSERT_EQ(raw.warnings.size(), 1u);
  EXPECT_NE(raw.warnings[0].find("temperature"), std::string::npos);
  EXPECT_EQ(raw.rows[0].get("temperature"), nullptr);
}

TEST(ParseMeterCsv, QuotingBomAndCrlf) {
  const auto raw = parse_meter_csv("\xEF\xBB\xBFmeter_date,kwh,building_id\r\n2024-01-01,1,\"A, \"\"x\"\"\"\r\n\r\n");
  ASSERT_EQ(raw.rows.size(), 1u);
  EXPECT_EQ(*raw.rows[0].get("building_id"), "A, \"x\"");
}

TEST(ParseMeterCsv, UnparseableHeader) {
  for (const char* text : {"", "meter_date,,kwh\n", "meter_date,kwh,kwh\n", "meter_date,kwh\n\"2024-01-01,1\n"}) {
    try {
      parse_meter_csv(text);
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnparseableHeader) << text;
    }
  }
}

TEST(ParseMeterJson, ArrayAndEnvelope) {
  const auto a = parse_meter_json(R"([{"meter_date":"2024-01-01","kwh":1.5,"extra":1}])");
  ASSERT_EQ(a.rows.size(), 1u);
  EXPECT_EQ(*a.rows[0].get("kwh"), "1.5");
  EXPECT_EQ(a.warnings.size(), 1u);

  const auto b = parse_meter_json(
      R"({"readings":[{"meter_date":"2024-01-01","kwh":2}],"building":{"floor_area_m2":90,"occupants":3,"climate_zone":4}})");
  ASSERT_TRUE(b.embedded_building.has_value());
  EXPECT_EQ(b.embedded_building->at("floor_area_m2"), "90");

  EXPECT_THROW(parse_meter_json("{not json"), Error);
  try {
    parse_meter_json(R"([{"date":"2024-01-01","kwh":1}])");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MissingColumn);
  }
}

TEST(ParseMeterCsvProperty, RoundTripBitIdentical) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    MeterSeries s;
    Date d(2022, 6, 1);
    for (int i = 0; i < 120; ++i) {
      const double kwh = std::ldexp(static_cast<double>(rng() >> 11), -49);  // arbitrary binary fractions
      std::optional<double> cost;
      if (rng() % 2) cost = kwh * 0.3199999999999999;
      s.readings.push_back({d, kwh, cost, false});
      d = d.plus_days(1 + static_cast<long>(rng() % 2));
    }
    const auto back = validated(write_meter_csv(s));
    ASSERT_EQ(back.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_EQ(back[i].date, s[i].date);
      EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i].kwh), std::bit_cast<std::uint64_t>(s[i].kwh));
      EXPECT_EQ(back[i].cost.has_value(), s[i].cost.has_value());
      if (s[i].cost) { EXPECT_EQ(std::bit_cast<std::uint64_t>(*back[i].cost), std::bit_cast<std::uint64_t>(*s[i].cost)); }
    }
  }
}

TEST(CleanSeries, SingleDayGapForwardFilled) {
  MeterSeries s;
  s.readings = {{Date(2024, 1, 1), 10.0, 3.2, false}, {Date(2024, 1, 3), 12.0, 3.84, false}};
  const auto c = clean_series(s);
  ASSERT_EQ(c.series.size(), 3u);
  EXPECT_EQ(c.series[1].date, Date(2024, 1, 2));
  EXPECT_EQ(c.series[1].kwh, 10.0);
  EXPECT_FALSE(c.series[1].cost.has_value());
  EXPECT_TRUE(c.series[1].imputed);
  EXPECT_EQ(c.filled_days, 1u);
}

TEST(CleanSeries, LongGapLeftOpen) {
  MeterSeries s;
  s.readings = {{Date(2024, 1, 1), 5.0, {}, false}, {Date(2024, 1, 12), 6.0, {}, false}};
  const auto c = clean_series(s, 3);
  EXPECT_EQ(c.series.size(), 2u);
  ASSERT_EQ(c.holes.size(), 1u);
  EXPECT_EQ(c.holes[0].missing_days, 10);
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_EQ(c.warnings[0].rfind("gap_exceeds_limit", 0), 0u);
}

TEST(CleanSeries, GapAtLimitIsFilledAndLeadingGapUntouched) {
  MeterSeries s;
  s.readings = {{Date(2024, 1, 5), 5.0, {}, false}, {Date(2024, 1, 9), 6.0, {}, false}};
  const auto c = clean_series(s, 3);
  EXPECT_EQ(c.series.size(), 5u);
  EXPECT_EQ(c.series[0].date, Date(2024, 1, 5));
  EXPECT_TRUE(c.holes.empty());
}

// Random series with gaps of 1..8 days.
MeterSeries gappy(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MeterSeries s;
  Date d(2024, 1, 1);
  for (int i = 0; i < 80; ++i) {
    s.readings.push_back({d, static_cast<double>(rng() % 1000) / 10.0, {}, false});
    d = d.plus_days(rng() % 4 == 0 ? 1 + static_cast<long>(rng() % 8) : 1);
  }
  return s;
}

TEST(CleanSeriesProperty, NeverDropsOrAltersAndIsIdempotent) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto s = gappy(seed);
    const auto c = clean_series(s, 3);
    EXPECT_GE(c.series.size(), s.size());
    std::map<Date, double> cleaned;
    for (const auto& r : c.series) cleaned[r.date] = r.kwh;
    for (const auto& r : s) {
      ASSERT_TRUE(cleaned.count(r.date));
      EXPECT_EQ(cleaned[r.date], r.kwh);
    }
    const auto again = clean_series(c.series, 3);
    EXPECT_EQ(again.series, c.series) << seed;
    EXPECT_EQ(again.filled_days, 0u);
  }
}

TEST(CleanSeriesProperty, GapScanOracle) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto s = gappy(seed);
    std::size_t expected_holes = 0, expected_fill = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      const long missing = s[i - 1].date.days_until(s[i].date) - 1;
      if (missing > 3) ++expected_holes;
      else expected_fill += static_cast<std::size_t>(missing);
    }
    const auto c = clean_series(s, 3);
    EXPECT_EQ(c.holes.size(), expected_holes);
    EXPECT_EQ(c.filled_days, expected_fill);
  }
}

TEST(ResolveClimate, RegionalDefault) {
  const auto c = resolve_climate(2);
  EXPECT_EQ(c.source, ClimateSource::RegionalDefault);
  EXPECT_EQ(c.hdd_annual, 1500.0);
  EXPECT_EQ(c.cdd_annual, 55.0);
  EXPECT_DOUBLE_EQ(c.hdd_monthly[6], 1500.0 * 0.15);
}

TEST(ResolveClimate, UserOverride) {
  const auto c = resolve_climate(2, 1500.0);
  EXPECT_EQ(c.source, ClimateSource::UserSupplied);
  EXPECT_EQ(c.hdd_annual, 1500.0);
  const auto d = resolve_climate(5, 1234.0, 7.0);
  EXPECT_EQ(d.hdd_annual, 1234.0);
  EXPECT_EQ(d.cdd_annual, 7.0);
}

TEST(ResolveClimate, UnknownZone) {
  for (int z : {0, 7, -1}) {
    try {
      resolve_climate(z);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::UnknownZone);
    }
  }
}

TEST(ResolveClimate, MonthlySumsMatchAnnual) {
  for (int z = 1; z <= 6; ++z) {
    const auto c = resolve_climate(z);
    double h = 0.0, k = 0.0;
    for (int m = 0; m < 12; ++m) {
      EXPECT_GE(c.hdd_monthly[m], 0.0);
      h += c.hdd_monthly[m];
      k += c.cdd_monthly[m];
    }
    EXPECT_NEAR(h, c.hdd_annual, 1e-6 * c.hdd_annual);
    EXPECT_NEAR(k, c.cdd_annual, 1e-6 * std::max(1.0, c.cdd_annual));
  }
}

TEST(Config, ShippedFileMatchesBuiltInDefaults) {
  const auto shipped = load_config(std::filesystem::path(HOMEWISE_SOURCE_DIR) / "config" / "config.yaml");
  EXPECT_EQ(config_snapshot(shipped), config_snapshot(Config{}));
}

TEST(Config, OverridesAndErrors) {
  const auto cfg = parse_config("fill_gap_max_days: 5\nprivacy:\n  salt: pepper\nserver:\n  max_upload_mb: 1\n");
  EXPECT_EQ(cfg.fill_gap_max_days, 5);
  EXPECT_EQ(cfg.privacy_salt, "pepper");
  EXPECT_EQ(cfg.server.max_upload_mb, 1.0);
  EXPECT_EQ(config_snapshot(cfg)["privacy"]["salt_configured"], true);
  EXPECT_EQ(config_snapshot(cfg).dump().find("pepper"), std::string::npos);
  EXPECT_THROW(parse_config("fill_gap_max_days: [1"), Error);
  EXPECT_THROW(load_config("/nonexistent/config.yaml", true), Error);
  EXPECT_NO_THROW(load_config("/nonexistent/config.yaml", false));
}

TEST(Pipeline, PrepareDatasetPseudonymizesEverywhere) {
  const auto s = hwtest::synth_household({});
  DatasetInput in{"house.csv", hwtest::meter_csv(s, "RAW-ID-77"), std::nullopt, std::nullopt};
  auto fields = to_raw_fields(hwtest::example_house());
  fields.erase("building_id");
  in.building_fields = fields;
  Config cfg;
  cfg.privacy_salt = "s";
  const auto d = prepare_dataset(in, cfg);
  EXPECT_EQ(d.pseudonym, hash_building_id("RAW-ID-77", "s"));
  EXPECT_EQ(d.series.building_id, d.pseudonym);
  EXPECT_EQ(d.building.building_id, d.pseudonym);
  EXPECT_EQ(d.climate.zone, 2);
}

TEST(Pipeline, SidecarOverridesEmbeddedBuilding) {
  const std::string doc =
      R"({"readings":[{"meter_date":"2024-01-01","kwh":1}],"building":{"floor_area_m2":90,"occupants":3,"climate_zone":4}})";
  DatasetInput in{"x.json", doc, std::nullopt, RawFields{{"floor_area_m2", "120"}}};
  const auto d = prepare_dataset(in);
  EXPECT_EQ(d.building.floor_area_m2, 120.0);
  EXPECT_EQ(d.building.occupants, 3);
  EXPECT_EQ(detect_format("a.bin", " [1]"), DataFormat::Json);
  EXPECT_EQ(detect_format("a.CSV", "{"), DataFormat::Csv);
}
