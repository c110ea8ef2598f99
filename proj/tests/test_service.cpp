#include <gtest/gtest.h>

#include <chrono>
#include <future>
#include <thread>

#include "fixtures.hpp"
#include "homewise/service.hpp"

using namespace homewise;
namespace stdfs = std::filesystem;

namespace {

class ServiceTest : public ::testing::Test {
 protected:
  explicit ServiceTest(Config cfg = {}) : cfg_(std::move(cfg)), root_("svc") {
    cfg_.privacy_salt = "svc-salt";
    server_ = std::make_unique<ApiServer>(cfg_, root_.path());
    port_ = server_->start_background();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(120, 0);
  }
  ~ServiceTest() override {
    client_.reset();
    server_->stop();
  }

  // Every body the server sent, for the privacy check.
  void remember(const httplib::Result& r) {
    if (r) bodies_.push_back(r->body);
  }

  httplib::Result get(const std::string& path) {
    auto r = client_->Get(path);
    remember(r);
    return r;
  }
  httplib::Result post(const std::string& path, const std::string& body, const char* type = "application/json") {
    auto r = client_->Post(path, body, type);
    remember(r);
    return r;
  }
  httplib::Result del(const std::string& path) {
    auto r = client_->Delete(path);
    remember(r);
    return r;
  }

  static std::string upload_body(const MeterSeries& s, const BuildingDescriptor& b) {
    nlohmann::json j;
    j["filename"] = "house.csv";
    j["content"] = hwtest::meter_csv(s, b.building_id);
    j["building"] = nlohmann::json::parse(hwtest::building_json(b));
    return j.dump();
  }

  static MeterSeries year_series(std::uint64_t seed = 1) {
    hwtest::Household h;
    h.seed = seed;
    h.noise_frac = 0.05;
    h.spikes = {{100, 5.0}};
    return hwtest::synth_household(h);
  }

  std::string upload(std::uint64_t seed = 1, std::string id = "HOUSE-0001") {
    auto b = hwtest::example_house();
    b.building_id = std::move(id);
    auto r = post("/datasets", upload_body(year_series(seed), b));
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, 200) << r->body;
    return Json::parse(r->body)["upload_id"].get<std::string>();
  }

  // Library-side equivalent of an upload.
  PreparedDataset library_dataset(std::uint64_t seed = 1, std::string id = "HOUSE-0001") const {
    auto b = hwtest::example_house();
    b.building_id = std::move(id);
    return prepare_dataset({"house.csv", hwtest::meter_csv(year_series(seed), b.building_id), std::nullopt,
                            to_raw_fields(b)},
                           cfg_);
  }

  Json wait_for_job(const std::string& job_id, std::vector<Json>* history = nullptr) {
    for (int i = 0; i < 1200; ++i) {
      auto r = get("/batch/" + job_id);
      EXPECT_EQ(r->status, 200);
      auto j = Json::parse(r->body);
      if (history) history->push_back(j);
      if (j["status"] == "done" || j["status"] == "failed") return j;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
    ADD_FAILURE() << "job did not finish";
    return {};
  }

  Config cfg_;
  hwtest::TempDir root_;
  std::unique_ptr<ApiServer> server_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
  std::vector<std::string> bodies_;
};

class SmallUploadServiceTest : public ServiceTest {
 protected:
  SmallUploadServiceTest() : ServiceTest(small()) {}
  static Config small() {
    Config c;
    c.server.max_upload_mb = 0.01;  // about 10 KB
    return c;
  }
};

}  // namespace

TEST_F(ServiceTest, UploadReturnsPseudonymAndValidation) {
  auto b = hwtest::example_house();
  auto r = post("/datasets", upload_body(year_series(), b));
  ASSERT_EQ(r->status, 200);
  const auto j = Json::parse(r->body);
  EXPECT_EQ(j["pseudonym"], hash_building_id("HOUSE-0001", "svc-salt"));
  EXPECT_EQ(j["validation"]["accepted_rows"], 365);
  EXPECT_EQ(j["cleaning"]["filled_days"], 0);
  EXPECT_TRUE(stdfs::exists(server_->session().uploads_dir() / (j["upload_id"].get<std::string>() + ".csv")));
}

TEST_F(ServiceTest, RawCsvUploadNeedsDescriptor) {
  auto r = post("/datasets", hwtest::meter_csv(hwtest::constant_series(Date(2024, 1, 1), 30, 4.0)), "text/csv");
  ASSERT_EQ(r->status, 400) << r->body;
  const auto j = Json::parse(r->body);
  EXPECT_EQ(j["code"], "MissingRequired");
  EXPECT_EQ(j["details"][0], "floor_area_m2");
}

TEST_F(ServiceTest, ProfileMatchesLibrary) {
  const auto id = upload();
  auto r = get("/datasets/" + id + "/profile");
  ASSERT_EQ(r->status, 200);
  const auto d = library_dataset();
  EXPECT_EQ(Json::parse(r->body), Json::parse(to_json(profile(d.series, d.building)).dump()));
}

TEST_F(ServiceTest, AnomaliesMatchLibrary) {
  const auto id = upload();
  const auto d = library_dataset();
  auto r = get("/datasets/" + id + "/anomalies?methods=iqr,zscore&seed=3");
  ASSERT_EQ(r->status, 200);
  const std::vector<AnomalyMethod> methods = {AnomalyMethod::Iqr, AnomalyMethod::Zscore};
  EXPECT_EQ(Json::parse(r->body), Json::parse(to_json(dataset_anomalies(d, methods, 3, cfg_)).dump()));
  auto all = get("/datasets/" + id + "/anomalies?seed=3");
  EXPECT_EQ(Json::parse(all->body),
            Json::parse(to_json(dataset_anomalies(d, all_anomaly_methods(), 3, cfg_)).dump()));
  EXPECT_EQ(get("/datasets/" + id + "/anomalies?methods=lof")->status, 400);
}

TEST_F(ServiceTest, ScenariosMatchLibrary) {
  const auto id = upload();
  const std::string body =
      R"({"scenarios":[{"kind":"led_retrofit","factor":0.7},{"kind":"thermostat_setback","setback_degc":2}]})";
  auto r = post("/datasets/" + id + "/scenarios?seed=5", body);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto j = Json::parse(r->body);
  const auto d = library_dataset();
  const auto specs = scenario_specs_from_json(Json::parse(body));
  const auto flags = dataset_anomalies(d, all_anomaly_methods(), 5, cfg_);
  const auto outcome = dataset_scenarios(d, specs, flags, cfg_);
  ASSERT_EQ(j["scenarios"].size(), 2u);
  EXPECT_EQ(j["scenarios"][0], Json::parse(to_json(outcome.results[0]).dump()));
  EXPECT_EQ(j["comparison"], Json::parse(to_json(outcome.table).dump()));
  EXPECT_EQ(post("/datasets/" + id + "/scenarios", R"([{"kind":"led_retrofit","factor":0.5}])")->status, 400);
  EXPECT_EQ(Json::parse(post("/datasets/" + id + "/scenarios", R"([{"kind":"led_retrofit","factor":0.5}])")->body)["code"],
            "FactorOutOfBand");
  auto empty = post("/datasets/" + id + "/scenarios", "[]");
  ASSERT_EQ(empty->status, 200);
  EXPECT_EQ(Json::parse(empty->body)["comparison"].size(), 1u);
}

TEST_F(ServiceTest, ReportFormatsMatchLibrary) {
  const auto id = upload();
  const auto d = library_dataset();
  const auto bundle = analyze_dataset(d, cfg_, 9);
  auto json = get("/datasets/" + id + "/report?format=json&seed=9");
  ASSERT_EQ(json->status, 200);
  EXPECT_EQ(normalize_timestamps(json->body), normalize_timestamps(export_json(bundle)));
  auto html = get("/datasets/" + id + "/report?format=html&seed=9");
  EXPECT_EQ(html->get_header_value("Content-Type"), "text/html; charset=utf-8");
  EXPECT_EQ(normalize_timestamps(html->body), normalize_timestamps(export_html_report(bundle)));
  auto csv = get("/datasets/" + id + "/report?format=csv&seed=9&file=anomalies.csv");
  EXPECT_EQ(csv->body, anomalies_csv(bundle.flags));
  EXPECT_EQ(get("/datasets/" + id + "/report?format=csv&seed=9")->body, profile_monthly_csv(bundle.profile));
  EXPECT_TRUE(stdfs::exists(server_->session().output_dirs().exports / id / "report.html"));
  EXPECT_EQ(get("/datasets/" + id + "/report?format=pdf")->status, 400);
  EXPECT_EQ(get("/datasets/" + id + "/report?format=csv&file=secrets.csv")->status, 400);
}

TEST_F(ServiceTest, ErrorStatuses) {
  auto missing = get("/datasets/abc123/profile");
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(Json::parse(missing->body)["code"], "NotFound");
  EXPECT_EQ(get("/nowhere")->status, 404);
  auto bad = post("/datasets", "date,energy\n2024-01-01,5\n", "text/csv");
  EXPECT_EQ(bad->status, 400);
  EXPECT_EQ(Json::parse(bad->body)["code"], "MissingColumn");
  EXPECT_EQ(post("/datasets", "{not json", "application/json")->status, 400);
  EXPECT_EQ(post("/batch", R"({"upload_ids":["ffff"]})")->status, 404);
  EXPECT_EQ(get("/batch/abcdef")->status, 404);
}

TEST_F(SmallUploadServiceTest, OversizedUploadRejected) {
  const std::string big = hwtest::meter_csv(hwtest::constant_series(Date(2020, 1, 1), 2000, 12.345678));
  ASSERT_GT(big.size(), 11000u);
  auto r = post("/datasets", big, "text/csv");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 413);
  EXPECT_EQ(Json::parse(r->body)["code"], "PayloadTooLarge");
}

TEST_F(ServiceTest, DeleteRemovesDataset) {
  const auto id = upload();
  get("/datasets/" + id + "/report?format=json");
  auto r = del("/datasets/" + id);
  ASSERT_EQ(r->status, 200);
  EXPECT_EQ(Json::parse(r->body)["deleted"], id);
  EXPECT_EQ(get("/datasets/" + id + "/profile")->status, 404);
  EXPECT_EQ(del("/datasets/" + id)->status, 404);
  EXPECT_FALSE(stdfs::exists(server_->session().uploads_dir() / (id + ".csv")));
  EXPECT_FALSE(stdfs::exists(server_->session().uploads_dir() / (id + ".building.json")));
}

TEST_F(ServiceTest, BatchPollingIsMonotone) {
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) ids.push_back(upload(10 + i, "HOUSE-" + std::to_string(i)));
  auto r = post("/batch", Json{{"upload_ids", ids}, {"seed", 7}, {"parallelism", 2}}.dump());
  ASSERT_EQ(r->status, 202) << r->body;
  const auto job_id = Json::parse(r->body)["job_id"].get<std::string>();
  std::vector<Json> history;
  const auto final_state = wait_for_job(job_id, &history);
  EXPECT_EQ(final_state["status"], "done");
  EXPECT_EQ(final_state["counts"]["done"], 4);
  ASSERT_TRUE(final_state["summary"].is_object());
  EXPECT_EQ(final_state["summary"]["dataset_count"], 4);
  int last_finished = 0;
  for (const auto& h : history) {
    const int finished = h["counts"]["done"].get<int>() + h["counts"]["failed"].get<int>();
    EXPECT_GE(finished, last_finished);
    last_finished = finished;
  }
  // Batch bundles equal the per-dataset report for the same seed.
  const auto& dirs = server_->session().output_dirs();
  const auto persisted = hwtest::read_file(dirs.exports / (ids[0] + ".csv") / "report.json");
  const auto lib = analyze_dataset(library_dataset(10, "HOUSE-0"), cfg_, 7);
  EXPECT_EQ(normalize_timestamps(persisted), normalize_timestamps(export_json(lib)));
}

TEST_F(ServiceTest, DeleteDuringBatch) {
  const auto a = upload(1, "HOUSE-A");
  const auto b = upload(2, "HOUSE-B");
  std::promise<void> reached, released;
  auto released_future = released.get_future().share();
  server_->session().batch_hooks.on_stage = [&, released_future](const DatasetRef& ref, std::string_view stage) {
    if (ref.name == b + ".csv" && stage == "analyze") {
      reached.set_value();
      released_future.wait();
    }
  };
  auto r = post("/batch", Json{{"upload_ids", {a, b}}, {"parallelism", 1}}.dump());
  ASSERT_EQ(r->status, 202);
  const auto job_id = Json::parse(r->body)["job_id"].get<std::string>();
  ASSERT_EQ(reached.get_future().wait_for(std::chrono::seconds(120)), std::future_status::ready);
  EXPECT_EQ(del("/datasets/" + b)->status, 200);
  released.set_value();
  const auto j = wait_for_job(job_id);
  EXPECT_EQ(j["counts"]["done"], 1);
  EXPECT_EQ(j["counts"]["failed"], 1);
  for (const auto& d : j["datasets"]) {
    if (d["name"] == b + ".csv") {
      EXPECT_EQ(d["reason"], "deleted");
    }
  }
}

TEST_F(ServiceTest, NoRawIdentifierInResponses) {
  const auto id = upload(1, "HOUSE-SECRET-77");
  get("/datasets/" + id + "/profile");
  get("/datasets/" + id + "/anomalies");
  post("/datasets/" + id + "/scenarios", "[]");
  for (const char* f : {"json", "html", "csv"}) get("/datasets/" + id + "/report?format=" + std::string(f));
  auto job = Json::parse(post("/batch", Json{{"upload_ids", {id}}}.dump())->body)["job_id"].get<std::string>();
  wait_for_job(job);
  ASSERT_GE(bodies_.size(), 8u);
  for (const auto& body : bodies_) {
    EXPECT_EQ(body.find("HOUSE-SECRET-77"), std::string::npos);
    EXPECT_EQ(body.find("svc-salt"), std::string::npos);
  }
  for (const auto& [path, content] : hwtest::tree_contents(server_->session().output_dirs().exports))
    EXPECT_EQ(content.find("HOUSE-SECRET-77"), std::string::npos) << path;
}

TEST_F(ServiceTest, BindsLoopback) { EXPECT_EQ(server_->host(), "127.0.0.1"); }
