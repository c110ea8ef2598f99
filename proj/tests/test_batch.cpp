#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "homewise/batch.hpp"

using namespace homewise;
namespace stdfs = std::filesystem;

namespace {

// Writes `n` year-long households (house_00.csv ...) with sidecar descriptors.
void write_households(const stdfs::path& uploads, int n, std::uint64_t seed_base = 100) {
  for (int i = 0; i < n; ++i) {
    hwtest::Household h;
    h.seed = seed_base + static_cast<std::uint64_t>(i);
    h.noise_frac = 0.05;
    h.zone = 1 + i % 6;
    h.kwh_per_hdd = 0.3 + 0.1 * (i % 5);
    h.spikes = {{static_cast<std::size_t>(40 + 7 * i), 5.0}};
    auto b = hwtest::example_house();
    b.building_id = "HOUSE-" + std::to_string(1000 + i);
    b.climate_zone = h.zone;
    b.lighting_count_halogen = i % 3 == 0 ? 0 : 10 + i;
    char name[32];
    std::snprintf(name, sizeof name, "house_%02d", i);
    hwtest::write_file(uploads / (std::string(name) + ".csv"), hwtest::meter_csv(hwtest::synth_household(h), b.building_id));
    hwtest::write_file(uploads / (std::string(name) + ".building.json"), hwtest::building_json(b));
  }
}

std::map<std::string, std::string> normalized_exports(const BatchResult& r) {
  std::map<std::string, std::string> out;
  for (const auto& [name, bundle] : r.bundles) {
    for (auto fmt : {ExportFormat::Json, ExportFormat::Html, ExportFormat::Csv})
      for (const auto& f : export_files(bundle, fmt)) out[name + "/" + f.name] = normalize_timestamps(f.content);
  }
  out["portfolio.csv"] = portfolio_csv(r.summary);
  return out;
}

// First differing entry, or empty when equal.
std::string first_difference(const std::map<std::string, std::string>& a, const std::map<std::string, std::string>& b) {
  if (a.size() != b.size()) return "entry count";
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return ia->first;
    if (ia->second != ib->second) {
      std::size_t i = 0;
      while (i < ia->second.size() && i < ib->second.size() && ia->second[i] == ib->second[i]) ++i;
      return ia->first + " @" + std::to_string(i) + ": " + ia->second.substr(i > 40 ? i - 40 : 0, 120) + " | " +
             ib->second.substr(i > 40 ? i - 40 : 0, 120);
    }
  }
  return {};
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

}  // namespace

TEST(ScanUploads, ExtensionFilterAndOrder) {
  hwtest::TempDir dir("scan");
  hwtest::write_file(dir / "b.csv", "meter_date,kwh\n");
  hwtest::write_file(dir / "a.csv", "meter_date,kwh\n");
  hwtest::write_file(dir / "notes.txt", "hello");
  const auto scan = scan_uploads(dir.path());
  ASSERT_EQ(scan.datasets.size(), 2u);
  EXPECT_EQ(scan.datasets[0].name, "a.csv");
  EXPECT_EQ(scan.datasets[1].name, "b.csv");
  ASSERT_EQ(scan.skipped.size(), 1u);
  EXPECT_EQ(scan.skipped[0].name, "notes.txt");
  EXPECT_EQ(scan_uploads(dir.path()).datasets, scan.datasets);
}

TEST(ScanUploads, SidecarsEmptyAndMissing) {
  hwtest::TempDir dir("scan2");
  EXPECT_TRUE(scan_uploads(dir.path()).datasets.empty());
  hwtest::write_file(dir / "h.csv", "x");
  hwtest::write_file(dir / "h.building.json", "{}");
  hwtest::write_file(dir / "orphan.building.json", "{}");
  const auto scan = scan_uploads(dir.path());
  ASSERT_EQ(scan.datasets.size(), 1u);
  EXPECT_EQ(scan.datasets[0].building_path, dir / "h.building.json");
  ASSERT_EQ(scan.skipped.size(), 1u);
  EXPECT_EQ(scan.skipped[0].name, "orphan.building.json");
  EXPECT_EQ(code_of([&] { scan_uploads(dir / "nope"); }), ErrorCode::DirectoryNotFound);
}

TEST(HashBuildingId, FrozenDigests) {
  // Reference digests from an independent SHA-256 implementation.
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(hash_building_id("HOUSE-0001", "pepper"), "5c2b4a927bc8e506");
  EXPECT_EQ(hash_building_id("HOUSE-0001", ""), "99761efd3a9de554");
  EXPECT_EQ(hash_building_id("HOUSE-0002", "pepper"), "2c5cf27042717e50");
  EXPECT_EQ(hash_building_id("HOUSE-0001", "pepper"), hash_building_id("HOUSE-0001", "pepper"));
  EXPECT_EQ(code_of([] { hash_building_id("", "pepper"); }), ErrorCode::EmptyId);
}

TEST(HashBuildingIdProperty, DistinctIdsDistinctPseudonyms) {
  std::set<std::string> seen;
  for (int i = 0; i < 5000; ++i) EXPECT_TRUE(seen.insert(hash_building_id("B" + std::to_string(i), "s")).second);
}

TEST(RunBatch, ParallelismIndependent) {
  hwtest::TempDir dir("par");
  write_households(dir.path(), 3);
  const auto refs = scan_uploads(dir.path()).datasets;
  const auto one = run_batch(refs, Config{}, 42, 1);
  const auto four = run_batch(refs, Config{}, 42, 4);
  EXPECT_EQ(one.bundles.size(), 3u);
  EXPECT_EQ(first_difference(normalized_exports(one), normalized_exports(four)), "");
  auto reversed = refs;
  std::reverse(reversed.begin(), reversed.end());
  EXPECT_EQ(first_difference(normalized_exports(one), normalized_exports(run_batch(reversed, Config{}, 42, 2))), "");
  EXPECT_NE(normalized_exports(one), normalized_exports(run_batch(refs, Config{}, 43, 1)));
}

TEST(RunBatch, FailureIsolated) {
  hwtest::TempDir dir("iso");
  write_households(dir.path(), 2);
  const auto clean = run_batch(scan_uploads(dir.path()).datasets, Config{}, 5, 2);
  hwtest::write_file(dir / "house_99.csv", "meter_date,kwh\n2024-01-01,-5\n2024-01-02,abc\n");
  const auto r = run_batch(scan_uploads(dir.path()).datasets, Config{}, 5, 2);
  EXPECT_EQ(r.bundles.size(), 2u);
  EXPECT_EQ(r.summary.dataset_count, 2u);
  EXPECT_EQ(r.summary.failed_count, 1u);
  EXPECT_EQ(r.job.datasets[2].state, RunState::Failed);
  EXPECT_EQ(r.job.datasets[2].reason, "AllRejected");
  EXPECT_EQ(r.job.state, RunState::Done);
  for (const auto& [name, bundle] : r.bundles)
    EXPECT_EQ(normalize_timestamps(export_json(bundle)), normalize_timestamps(export_json(clean.bundles.at(name))));
}

TEST(RunBatch, AllFailedAndEmpty) {
  hwtest::TempDir dir("allfail");
  hwtest::write_file(dir / "x.csv", "nothing useful");
  EXPECT_EQ(code_of([&] { run_batch(scan_uploads(dir.path()).datasets, Config{}, 1); }), ErrorCode::AllDatasetsFailed);
  EXPECT_EQ(code_of([&] { run_batch({}, Config{}, 1); }), ErrorCode::EmptyList);
}

TEST(PortfolioSummary, AggregatesRecomputable) {
  hwtest::TempDir dir("port");
  write_households(dir.path(), 5);
  const auto r = run_batch(scan_uploads(dir.path()).datasets, Config{}, 9, 2);
  std::vector<double> intensity;
  double kwh = 0, cost = 0;
  for (const auto& row : r.summary.rows) {
    intensity.push_back(row.kwh_per_m2_annualized);
    kwh += row.best_kwh_saved_yr;
    cost += row.best_cost_saved_yr;
  }
  std::sort(intensity.begin(), intensity.end());
  EXPECT_EQ(*r.summary.median_intensity, intensity[2]);
  EXPECT_NEAR(r.summary.total_kwh_saved_yr, kwh, 1e-9 * kwh);
  EXPECT_NEAR(r.summary.total_cost_saved_yr, cost, 1e-9 * cost);
}

TEST(PersistBatch, FilesAndStoreRows) {
  hwtest::TempDir root("persist");
  write_households(root / "uploads", 2);
  const auto r = run_batch(scan_uploads(root / "uploads").datasets, Config{}, 1, 1);
  const auto dirs = OutputDirs::from(Config{}, root.path());
  persist_batch(r, dirs);
  for (const char* f : {"house_00.csv/report.json", "house_00.csv/report.html", "house_01.csv/scenarios.csv",
                        "portfolio_summary.json", "portfolio_summary.csv"})
    EXPECT_TRUE(stdfs::exists(dirs.exports / f)) << f;
  EXPECT_TRUE(stdfs::exists(dirs.results / "house_01.csv.report.json"));
  ResultStore store(dirs.store_path());
  const auto job = store.job(r.job.job_id);
  ASSERT_TRUE(job);
  EXPECT_EQ(job->dataset_count, 2);
  EXPECT_EQ(job->state, "done");
  const auto rows = store.datasets(r.job.job_id);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].pseudonym, hash_building_id("HOUSE-1000", ""));
  EXPECT_TRUE(rows[0].kwh_per_m2.has_value());
}

TEST(DeleteDataset, RemovesEverythingOnce) {
  hwtest::TempDir root("del");
  write_households(root / "uploads", 2);
  const auto dirs = OutputDirs::from(Config{}, root.path());
  const auto r = run_batch(scan_uploads(root / "uploads").datasets, Config{}, 1, 1);
  persist_batch(r, dirs);
  delete_dataset("house_00.csv", root / "uploads", dirs);
  EXPECT_FALSE(stdfs::exists(root / "uploads" / "house_00.csv"));
  EXPECT_FALSE(stdfs::exists(root / "uploads" / "house_00.building.json"));
  EXPECT_FALSE(stdfs::exists(dirs.exports / "house_00.csv"));
  EXPECT_FALSE(stdfs::exists(dirs.results / "house_00.csv.report.json"));
  EXPECT_TRUE(stdfs::exists(dirs.exports / "house_01.csv" / "report.json"));
  const auto scan = scan_uploads(root / "uploads");
  ASSERT_EQ(scan.datasets.size(), 1u);
  EXPECT_EQ(scan.datasets[0].name, "house_01.csv");
  ResultStore store(dirs.store_path());
  ASSERT_EQ(store.datasets(r.job.job_id).size(), 1u);
  EXPECT_EQ(code_of([&] { delete_dataset("house_00.csv", root / "uploads", dirs); }), ErrorCode::NotFound);
  EXPECT_EQ(code_of([&] { delete_dataset("../etc", root / "uploads", dirs); }), ErrorCode::NotFound);
}

TEST(DeleteDataset, DuringRunMarksFailedDeleted) {
  hwtest::TempDir root("race");
  write_households(root / "uploads", 3);
  const auto dirs = OutputDirs::from(Config{}, root.path());
  const auto refs = scan_uploads(root / "uploads").datasets;
  const auto reference = run_batch(refs, Config{}, 3, 1);
  // The hook deletes house_01 once its analysis has started, before commit.
  BatchHooks hooks;
  hooks.on_stage = [&](const DatasetRef& ref, std::string_view stage) {
    if (ref.name == "house_01.csv" && stage == "analyze") delete_dataset(ref.name, root / "uploads", dirs);
  };
  const auto r = run_batch(refs, Config{}, 3, 2, hooks);
  EXPECT_EQ(r.job.datasets[1].state, RunState::Failed);
  EXPECT_EQ(r.job.datasets[1].reason, "deleted");
  ASSERT_EQ(r.bundles.size(), 2u);
  EXPECT_FALSE(r.bundles.count("house_01.csv"));
  for (const auto& [name, bundle] : r.bundles)
    EXPECT_EQ(normalize_timestamps(export_json(bundle)), normalize_timestamps(export_json(reference.bundles.at(name))));
}

TEST(DeleteDataset, BeforeLoadMarksFailedDeleted) {
  hwtest::TempDir root("race2");
  write_households(root / "uploads", 2);
  const auto refs = scan_uploads(root / "uploads").datasets;
  stdfs::remove(refs[0].path);
  const auto r = run_batch(refs, Config{}, 3, 1);
  EXPECT_EQ(r.job.datasets[0].reason, "deleted");
  EXPECT_EQ(r.bundles.size(), 1u);
}

TEST(BatchLogging, AggregateCountsOnly) {
  hwtest::TempDir root("log");
  write_households(root / "uploads", 3);
  Config cfg;
  cfg.privacy_salt = "log-salt";
  std::string text;
  {
    ScopedLogCapture capture;
    const auto r = run_batch(scan_uploads(root / "uploads").datasets, cfg, 1, 2);
    delete_dataset("house_02.csv", root / "uploads", OutputDirs::from(cfg, root.path()));
    text = capture.text();
  }
  EXPECT_NE(text.find("batch finished: 3 datasets, 3 done, 0 failed"), std::string::npos) << text;
  EXPECT_NE(text.find("deleted 1 dataset"), std::string::npos);
  EXPECT_EQ(text.find("HOUSE-"), std::string::npos);
  EXPECT_EQ(text.find("log-salt"), std::string::npos);
  EXPECT_EQ(text.find("house_0"), std::string::npos);
  EXPECT_EQ(text.find("2024-"), std::string::npos);
}

TEST(BatchJobStatus, JsonCounts) {
  hwtest::TempDir root("status");
  write_households(root / "uploads", 2);
  const auto r = run_batch(scan_uploads(root / "uploads").datasets, Config{}, 1, 1);
  const auto j = to_json(r.job);
  EXPECT_EQ(j["status"], "done");
  EXPECT_EQ(j["counts"]["done"], 2);
  EXPECT_EQ(j["counts"]["pending"], 0);
  EXPECT_EQ(j["datasets"][0]["pseudonym"], hash_building_id("HOUSE-1000", ""));
  EXPECT_EQ(effective_parallelism(8, 3), 3u);
  EXPECT_GE(effective_parallelism(0, 100), 1u);
}
