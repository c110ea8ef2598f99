#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "fixtures.hpp"
#include "homewise/batch.hpp"

using namespace homewise;
namespace stdfs = std::filesystem;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

// Runs the CLI inside `cwd`, capturing both streams.
Run run_cli(const stdfs::path& cwd, const std::string& args) {
  const auto out = cwd / ".stdout", err = cwd / ".stderr";
  const std::string cmd = "cd '" + cwd.string() + "' && '" + std::string(HOMEWISE_CLI_PATH) + "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = hwtest::read_file(out);
  r.err = hwtest::read_file(err);
  stdfs::remove(out);
  stdfs::remove(err);
  return r;
}

MeterSeries clean_year() {
  hwtest::Household h;  // noiseless: one level per calendar month
  return hwtest::synth_household(h);
}

MeterSeries spiky_year() {
  hwtest::Household h;
  h.noise_frac = 0.05;
  h.spikes = {{45, 5.0}, {180, 5.0}, {300, 5.0}};
  return hwtest::synth_household(h);
}

class CliTest : public ::testing::Test {
 protected:
  CliTest() : dir_("cli") {
    hwtest::write_file(dir_ / "house.csv", hwtest::meter_csv(spiky_year(), "HOUSE-0001"));
    hwtest::write_file(dir_ / "clean.csv", hwtest::meter_csv(clean_year()));
    hwtest::write_file(dir_ / "house.building.json", hwtest::building_json(hwtest::example_house()));
  }
  PreparedDataset library_dataset() const {
    return prepare_dataset({"house.csv", hwtest::read_file(dir_ / "house.csv"), std::nullopt,
                            building_fields_from_json_text(hwtest::read_file(dir_ / "house.building.json"))});
  }
  hwtest::TempDir dir_;
};

}  // namespace

TEST_F(CliTest, ProfileWritesMonthlyCsv) {
  const auto r = run_cli(dir_.path(), "profile --input house.csv --area 140");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto written = dir_ / "exports" / "profile_monthly.csv";
  ASSERT_TRUE(stdfs::exists(written));
  EXPECT_EQ(Json::parse(r.out)["written"][0], "exports/profile_monthly.csv");
  const auto series = prepare_series({"house.csv", hwtest::read_file(dir_ / "house.csv"), std::nullopt, std::nullopt});
  EXPECT_EQ(hwtest::read_file(written), profile_monthly_csv(profile(series.series, 140.0)));
}

TEST_F(CliTest, DetectOnCleanFixtureIsEmpty) {
  const auto r = run_cli(dir_.path(), "detect --input clean.csv --methods iqr");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(hwtest::read_file(dir_ / "exports" / "anomalies.csv"), "date,kind,method,score,threshold\r\n");
}

TEST_F(CliTest, DetectFindsInjectedSpikes) {
  const auto r = run_cli(dir_.path(), "detect -i house.csv --methods iqr --format json -o out");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto flags = Json::parse(hwtest::read_file(dir_ / "out" / "anomalies.json"));
  std::set<std::string> dates;
  for (const auto& f : flags) dates.insert(f["date"].get<std::string>());
  for (const char* d : {"2024-02-15", "2024-06-29", "2024-10-27"}) EXPECT_TRUE(dates.count(d)) << d;
}

TEST_F(CliTest, LedFactorOutOfBandExitsOne) {
  const auto r = run_cli(dir_.path(), "scenario -i house.csv -b house.building.json --led-factor 0.5");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(Json::parse(r.err)["code"], "FactorOutOfBand");
  EXPECT_FALSE(stdfs::exists(dir_ / "exports" / "scenarios.csv"));
}

TEST_F(CliTest, ValidationFailuresExitOne) {
  hwtest::write_file(dir_ / "bad.csv", "date,energy\n2024-01-01,4\n");
  auto r = run_cli(dir_.path(), "ingest -i bad.csv");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(Json::parse(r.err)["code"], "MissingColumn");
  r = run_cli(dir_.path(), "detect -i house.csv --methods lof");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(Json::parse(r.err)["code"], "UnknownMethod");
  r = run_cli(dir_.path(), "report -i house.csv -b house.building.json --format pdf");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(run_cli(dir_.path(), "profile -i house.csv").exit_code, 1);
  EXPECT_EQ(run_cli(dir_.path(), "profile --bogus").exit_code, 1);
  EXPECT_EQ(run_cli(dir_.path(), "delete --name nothing.csv").exit_code, 1);
}

TEST_F(CliTest, InternalFailuresExitTwo) {
  hwtest::write_file(dir_ / "blocker", "a file where a directory is expected");
  const auto r = run_cli(dir_.path(), "profile -i house.csv --area 140 -o blocker/sub");
  EXPECT_EQ(r.exit_code, 2) << r.err;
  EXPECT_EQ(Json::parse(r.err)["code"], "IoFailure");
  const auto missing_config = run_cli(dir_.path(), "--config nowhere.yaml profile -i house.csv --area 140");
  EXPECT_NE(missing_config.exit_code, 0);
  EXPECT_TRUE(Json::parse(missing_config.err).contains("code"));
}

TEST_F(CliTest, ScenarioMatchesLibrary) {
  const auto r = run_cli(dir_.path(), "scenario -i house.csv -b house.building.json --led-factor 0.7 --seed 4");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto d = library_dataset();
  std::vector<ScenarioSpec> specs = default_scenario_specs();
  specs[0].factor = 0.7;
  const auto flags = dataset_anomalies(d, all_anomaly_methods(), 4, Config{});
  EXPECT_EQ(hwtest::read_file(dir_ / "exports" / "scenarios.csv"),
            scenarios_csv(dataset_scenarios(d, specs, flags).table));
}

TEST_F(CliTest, ReportMatchesLibraryAfterNormalization) {
  for (const char* fmt : {"json", "html"}) {
    const auto r = run_cli(dir_.path(), std::string("report -i house.csv -b house.building.json --seed 11 --format ") + fmt);
    ASSERT_EQ(r.exit_code, 0) << r.err;
  }
  const auto bundle = analyze_dataset(library_dataset(), Config{}, 11);
  EXPECT_EQ(normalize_timestamps(hwtest::read_file(dir_ / "exports" / "report.json")),
            normalize_timestamps(export_json(bundle)));
  EXPECT_EQ(normalize_timestamps(hwtest::read_file(dir_ / "exports" / "report.html")),
            normalize_timestamps(export_html_report(bundle)));
}

TEST_F(CliTest, BaselineAndIngest) {
  auto r = run_cli(dir_.path(), "baseline -i house.csv -b house.building.json");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = Json::parse(hwtest::read_file(dir_ / "exports" / "baseline.json"));
  EXPECT_EQ(j["baseline"]["kind"], "regression");
  r = run_cli(dir_.path(), "ingest -i house.csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["validation"]["accepted_rows"], 365);
  EXPECT_EQ(r.out.find("HOUSE-0001"), std::string::npos);
}

TEST_F(CliTest, BatchAndDelete) {
  stdfs::create_directories(dir_ / "uploads");
  stdfs::copy(dir_ / "house.csv", dir_ / "uploads" / "house.csv");
  stdfs::copy(dir_ / "house.building.json", dir_ / "uploads" / "house.building.json");
  hwtest::write_file(dir_ / "uploads" / "readme.txt", "x");
  auto r = run_cli(dir_.path(), "batch -j 2 --seed 3");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j["summary"]["dataset_count"], 1);
  EXPECT_EQ(j["skipped"][0]["name"], "readme.txt");
  EXPECT_TRUE(stdfs::exists(dir_ / "exports" / "house.csv" / "report.html"));
  EXPECT_TRUE(stdfs::exists(dir_ / "results" / "homewise.db"));
  r = run_cli(dir_.path(), "delete --name house.csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_FALSE(stdfs::exists(dir_ / "exports" / "house.csv"));
  EXPECT_EQ(run_cli(dir_.path(), "delete --name house.csv").exit_code, 1);
}

TEST_F(CliTest, ConfigFileIsHonoured) {
  hwtest::write_file(dir_ / "config.yaml", "privacy:\n  salt: cli-salt\n");
  const auto r = run_cli(dir_.path(), "ingest -i house.csv");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(Json::parse(r.out)["pseudonym"], hash_building_id("HOUSE-0001", "cli-salt"));
}
