#pragma once

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "homewise/logging.hpp"
#include "homewise/pipeline.hpp"
#include "homewise/store.hpp"

namespace homewise {

namespace fs = std::filesystem;

struct DatasetRef {
  std::string name;  // file name inside the uploads directory
  fs::path path;
  std::optional<fs::path> building_path;  // "<stem>.building.json" sidecar

  friend bool operator==(const DatasetRef&, const DatasetRef&) = default;
};

struct SkippedFile {
  std::string name;
  std::string reason;

  friend bool operator==(const SkippedFile&, const SkippedFile&) = default;
};

struct ScanResult {
  std::vector<DatasetRef> datasets;
  std::vector<SkippedFile> skipped;
};

inline constexpr std::string_view kSidecarSuffix = ".building.json";

/// Lists datasets in lexicographic file-name order. `.csv` and `.json` files
/// are datasets; `<stem>.building.json` files are descriptors attached to the
/// dataset with the same stem. Everything else is skipped with a reason.
inline ScanResult scan_uploads(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec))
    throw Error(ErrorCode::DirectoryNotFound, "uploads directory not found", {dir.string()});
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir, ec)) names.push_back(entry.path().filename().string());
  if (ec) throw Error(ErrorCode::IoFailure, "cannot list uploads directory", {dir.string()});
  std::sort(names.begin(), names.end());

  std::map<std::string, std::string> sidecars;  // stem -> file name
  for (const auto& n : names)
    if (n.size() > kSidecarSuffix.size() && n.ends_with(kSidecarSuffix))
      sidecars[n.substr(0, n.size() - kSidecarSuffix.size())] = n;

  ScanResult out;
  std::set<std::string> used_sidecars;
  for (const auto& n : names) {
    if (n.size() > kSidecarSuffix.size() && n.ends_with(kSidecarSuffix)) continue;
    const fs::path p = dir / n;
    if (!fs::is_regular_file(p, ec)) {
      out.skipped.push_back({n, "not a regular file"});
      continue;
    }
    const auto ext = detail::lower(p.extension().string());
    if (ext != ".csv" && ext != ".json") {
      out.skipped.push_back({n, "unsupported extension"});
      continue;
    }
    DatasetRef ref{n, p, std::nullopt};
    const auto it = sidecars.find(p.stem().string());
    if (it != sidecars.end()) {
      ref.building_path = dir / it->second;
      used_sidecars.insert(it->second);
    }
    out.datasets.push_back(std::move(ref));
  }
  for (const auto& [stem, name] : sidecars)
    if (!used_sidecars.count(name)) out.skipped.push_back({name, "building descriptor without a matching dataset"});
  std::sort(out.skipped.begin(), out.skipped.end(),
            [](const SkippedFile& a, const SkippedFile& b) { return a.name < b.name; });
  return out;
}

inline std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot read " + path.filename().string(), {path.filename().string()});
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Reads a building descriptor document (a flat JSON object).
inline RawFields building_fields_from_json_text(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "building descriptor is not valid JSON", {e.what()});
  }
  if (!doc.is_object()) throw Error(ErrorCode::InvalidArgument, "building descriptor must be a JSON object");
  return fields_from_json(doc);
}

inline DatasetInput load_dataset_input(const DatasetRef& ref) {
  DatasetInput in;
  in.source_name = ref.name;
  in.content = read_text_file(ref.path);
  if (ref.building_path) in.building_fields = building_fields_from_json_text(read_text_file(*ref.building_path));
  return in;
}

enum class RunState { Pending, Running, Done, Failed };

inline std::string_view to_string(RunState s) {
  switch (s) {
    case RunState::Pending: return "pending";
    case RunState::Running: return "running";
    case RunState::Done: return "done";
    case RunState::Failed: return "failed";
  }
  return "failed";
}

struct DatasetStatus {
  std::string name;
  RunState state = RunState::Pending;
  std::string reason;  // failure reason code
  std::string pseudonym;
};

struct BatchJobRecord {
  std::string job_id;
  RunState state = RunState::Pending;
  std::vector<DatasetStatus> datasets;
  std::string started_at;
  std::string finished_at;
  unsigned parallelism = 1;

  std::size_t count(RunState s) const {
    return static_cast<std::size_t>(
        std::count_if(datasets.begin(), datasets.end(), [s](const DatasetStatus& d) { return d.state == s; }));
  }
};

/// Job record with a single writer (the batch run) and any number of
/// concurrent readers taking snapshots.
class BatchJob {
 public:
  BatchJob(std::string job_id, const std::vector<DatasetRef>& refs) {
    record_.job_id = std::move(job_id);
    for (const auto& r : refs) record_.datasets.push_back({r.name, RunState::Pending, {}, {}});
  }

  BatchJobRecord snapshot() const {
    std::lock_guard lock(mutex_);
    return record_;
  }

  void start(unsigned parallelism, std::string started_at) {
    std::lock_guard lock(mutex_);
    record_.state = RunState::Running;
    record_.parallelism = parallelism;
    record_.started_at = std::move(started_at);
  }

  void set(std::size_t i, RunState s, std::string reason = {}, std::string pseudonym = {}) {
    std::lock_guard lock(mutex_);
    auto& d = record_.datasets.at(i);
    d.state = s;
    d.reason = std::move(reason);
    if (!pseudonym.empty()) d.pseudonym = std::move(pseudonym);
  }

  void finish(std::string finished_at) {
    std::lock_guard lock(mutex_);
    record_.finished_at = std::move(finished_at);
    const bool any_done = record_.count(RunState::Done) > 0;
    record_.state = any_done || record_.datasets.empty() ? RunState::Done : RunState::Failed;
  }

 private:
  mutable std::mutex mutex_;
  BatchJobRecord record_;
};

struct PortfolioRow {
  std::string name;
  std::string pseudonym;
  double kwh_per_m2_annualized = 0.0;
  std::size_t flag_count = 0;
  std::optional<std::string> best_kind;
  std::optional<double> best_payback_years;
  double best_kwh_saved_yr = 0.0;
  double best_cost_saved_yr = 0.0;
};

struct PortfolioSummary {
  std::size_t dataset_count = 0;  // successfully analyzed
  std::size_t failed_count = 0;
  std::vector<PortfolioRow> rows;
  std::optional<double> median_intensity;
  double total_kwh_saved_yr = 0.0;
  double total_cost_saved_yr = 0.0;
};

/// Headline metrics for one bundle. The best scenario is the first
/// comparison row that saves energy.
inline PortfolioRow portfolio_row(const std::string& name, const ReportBundle& b) {
  PortfolioRow row;
  row.name = name;
  row.pseudonym = b.building.building_id.value_or("");
  row.kwh_per_m2_annualized = b.profile.kwh_per_m2_annualized;
  row.flag_count = b.flags.size();
  for (const auto& r : b.table.rows) {
    if (r.is_baseline || !(r.kwh_saved_yr > 0.0)) continue;
    row.best_kind = r.kind;
    row.best_payback_years = r.payback_years;
    row.best_kwh_saved_yr = r.kwh_saved_yr;
    row.best_cost_saved_yr = r.cost_saved_yr;
    break;
  }
  return row;
}

/// Aggregates computed from the per-building rows only.
inline PortfolioSummary summarize_portfolio(std::vector<PortfolioRow> rows, std::size_t failed_count) {
  PortfolioSummary s;
  s.rows = std::move(rows);
  s.dataset_count = s.rows.size();
  s.failed_count = failed_count;
  std::vector<double> intensity;
  for (const auto& r : s.rows) {
    intensity.push_back(r.kwh_per_m2_annualized);
    s.total_kwh_saved_yr += r.best_kwh_saved_yr;
    s.total_cost_saved_yr += r.best_cost_saved_yr;
  }
  if (!intensity.empty()) s.median_intensity = stats::median(intensity);
  return s;
}

struct BatchHooks {
  /// Called by the worker at "load", "analyze" and "commit" for each dataset.
  std::function<void(const DatasetRef&, std::string_view stage)> on_stage;
};

struct BatchResult {
  std::map<std::string, ReportBundle> bundles;  // by dataset name
  PortfolioSummary summary;
  BatchJobRecord job;
};

inline unsigned effective_parallelism(unsigned requested, std::size_t datasets) {
  unsigned n = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (datasets > 0) n = static_cast<unsigned>(std::min<std::size_t>(n, datasets));
  return std::max(1u, n);
}

inline std::string failure_reason(const Error& e) { return std::string(to_string(e.code())); }

/// Runs the full per-dataset pipeline on a worker pool. Each dataset uses a
/// seed derived from (seed, pseudonym), so results do not depend on worker
/// count or order. A dataset whose upload disappears mid-run is marked
/// failed("deleted"). Throws AllDatasetsFailed when nothing succeeds.
inline BatchResult run_batch(const std::vector<DatasetRef>& refs, const Config& cfg, std::uint64_t seed,
                             unsigned parallelism = 0, const BatchHooks& hooks = {},
                             std::shared_ptr<BatchJob> job = nullptr) {
  if (refs.empty()) throw Error(ErrorCode::EmptyList, "batch needs at least one dataset");
  if (!job) job = std::make_shared<BatchJob>(random_token(), refs);
  const unsigned workers = effective_parallelism(parallelism ? parallelism : cfg.batch.parallelism, refs.size());
  const std::string generated_at = utc_timestamp_now();
  job->start(workers, generated_at);

  std::vector<std::optional<ReportBundle>> bundles(refs.size());
  std::atomic<std::size_t> next{0};
  auto stage = [&](const DatasetRef& ref, std::string_view s) {
    if (hooks.on_stage) hooks.on_stage(ref, s);
  };
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= refs.size()) return;
      const auto& ref = refs[i];
      job->set(i, RunState::Running);
      try {
        stage(ref, "load");
        if (!fs::exists(ref.path)) {
          job->set(i, RunState::Failed, "deleted");
          continue;
        }
        const auto prepared = prepare_dataset(load_dataset_input(ref), cfg);
        stage(ref, "analyze");
        auto bundle = analyze_dataset(prepared, cfg, seed, generated_at);
        stage(ref, "commit");
        if (!fs::exists(ref.path)) {
          job->set(i, RunState::Failed, "deleted", prepared.pseudonym);
          continue;
        }
        bundles[i] = std::move(bundle);
        job->set(i, RunState::Done, {}, prepared.pseudonym);
      } catch (const Error& e) {
        job->set(i, RunState::Failed, e.code() == ErrorCode::NotFound ? "deleted" : failure_reason(e));
      } catch (const std::exception&) {
        job->set(i, RunState::Failed, std::string(to_string(ErrorCode::Internal)));
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  job->finish(utc_timestamp_now());

  BatchResult result;
  result.job = job->snapshot();
  std::vector<PortfolioRow> rows;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (!bundles[i]) continue;
    rows.push_back(portfolio_row(refs[i].name, *bundles[i]));
    result.bundles.emplace(refs[i].name, std::move(*bundles[i]));
  }
  std::sort(rows.begin(), rows.end(), [](const PortfolioRow& a, const PortfolioRow& b) { return a.name < b.name; });
  const std::size_t failed = result.job.count(RunState::Failed);
  result.summary = summarize_portfolio(std::move(rows), failed);
  Log::info("batch finished: " + std::to_string(refs.size()) + " datasets, " +
            std::to_string(result.summary.dataset_count) + " done, " + std::to_string(failed) + " failed");
  if (result.bundles.empty())
    throw Error(ErrorCode::AllDatasetsFailed, "every dataset in the batch failed", {std::to_string(failed)});
  return result;
}

inline Json to_json(const BatchJobRecord& j) {
  Json datasets = Json::array();
  for (const auto& d : j.datasets) {
    Json row{{"name", d.name}, {"status", to_string(d.state)}};
    row["reason"] = d.reason.empty() ? Json(nullptr) : Json(d.reason);
    row["pseudonym"] = d.pseudonym.empty() ? Json(nullptr) : Json(d.pseudonym);
    datasets.push_back(row);
  }
  return Json{{"job_id", j.job_id},
              {"status", to_string(j.state)},
              {"parallelism", j.parallelism},
              {"started_at", j.started_at},
              {"finished_at", j.finished_at},
              {"counts",
               {{"pending", j.count(RunState::Pending)},
                {"running", j.count(RunState::Running)},
                {"done", j.count(RunState::Done)},
                {"failed", j.count(RunState::Failed)}}},
              {"datasets", datasets}};
}

inline Json to_json(const PortfolioSummary& s) {
  Json rows = Json::array();
  for (const auto& r : s.rows)
    rows.push_back({{"name", r.name},
                    {"pseudonym", r.pseudonym},
                    {"kwh_per_m2_annualized", r.kwh_per_m2_annualized},
                    {"flag_count", r.flag_count},
                    {"best_kind", detail::opt(r.best_kind)},
                    {"best_payback_years", detail::opt(r.best_payback_years)},
                    {"best_kwh_saved_yr", r.best_kwh_saved_yr},
                    {"best_cost_saved_yr", r.best_cost_saved_yr}});
  return Json{{"dataset_count", s.dataset_count},
              {"failed_count", s.failed_count},
              {"median_intensity", detail::opt(s.median_intensity)},
              {"total_kwh_saved_yr", s.total_kwh_saved_yr},
              {"total_cost_saved_yr", s.total_cost_saved_yr},
              {"rows", rows}};
}

inline std::string portfolio_csv(const PortfolioSummary& s) {
  csv::Writer w({"name", "pseudonym", "kwh_per_m2_annualized", "flag_count", "best_kind", "best_payback_years",
                 "best_kwh_saved_yr", "best_cost_saved_yr"});
  for (const auto& r : s.rows)
    w.row({r.name, r.pseudonym, csv::number(r.kwh_per_m2_annualized), std::to_string(r.flag_count),
           r.best_kind.value_or(""), r.best_payback_years ? csv::number(*r.best_payback_years) : "",
           csv::number(r.best_kwh_saved_yr), csv::number(r.best_cost_saved_yr)});
  return w.str();
}

struct OutputDirs {
  fs::path exports = "exports";
  fs::path results = "results";

  static OutputDirs from(const Config& cfg, const fs::path& root = {}) {
    return {root / cfg.batch.exports_dir, root / cfg.batch.results_dir};
  }
  fs::path store_path() const { return results / "homewise.db"; }
};

/// Writes every bundle (json, html, csv) under exports/<name>/, the bundle
/// documents under results/, the portfolio summary, and the store rows.
inline void persist_batch(const BatchResult& r, const OutputDirs& dirs) {
  for (const auto& [name, bundle] : r.bundles) {
    const auto dir = dirs.exports / name;
    write_report(bundle, dir, ExportFormat::Json);
    write_report(bundle, dir, ExportFormat::Html);
    write_report(bundle, dir, ExportFormat::Csv);
    write_text_file(dirs.results / (name + ".report.json"), export_json(bundle));
  }
  write_text_file(dirs.exports / "portfolio_summary.json", to_json(r.summary).dump(2) + "\n");
  write_text_file(dirs.exports / "portfolio_summary.csv", portfolio_csv(r.summary));

  ResultStore store(dirs.store_path());
  store.put_job({r.job.job_id, std::string(to_string(r.job.state)), r.job.started_at, r.job.finished_at,
                 static_cast<int>(r.job.parallelism), static_cast<int>(r.job.datasets.size()),
                 static_cast<int>(r.job.count(RunState::Failed))});
  std::map<std::string, const PortfolioRow*> by_name;
  for (const auto& row : r.summary.rows) by_name[row.name] = &row;
  for (const auto& d : r.job.datasets) {
    StoredDataset sd{r.job.job_id, d.name, d.pseudonym, std::string(to_string(d.state)), d.reason, {}, 0, {}, 0.0};
    if (auto it = by_name.find(d.name); it != by_name.end()) {
      sd.kwh_per_m2 = it->second->kwh_per_m2_annualized;
      sd.flag_count = static_cast<int>(it->second->flag_count);
      sd.best_payback_years = it->second->best_payback_years;
      sd.best_kwh_saved_yr = it->second->best_kwh_saved_yr;
    }
    store.put_dataset(sd);
  }
}

/// Removes an uploaded dataset, its descriptor sidecar and all derived
/// results. Throws NotFound when the upload does not exist.
inline void delete_dataset(const std::string& name, const fs::path& uploads_dir, const OutputDirs& dirs) {
  if (name.empty() || name.find('/') != std::string::npos || name.find('\\') != std::string::npos || name == "." ||
      name == "..")
    throw Error(ErrorCode::NotFound, "no such dataset", {name});
  const fs::path upload = uploads_dir / name;
  std::error_code ec;
  if (!fs::is_regular_file(upload, ec)) throw Error(ErrorCode::NotFound, "no such dataset", {name});
  if (!fs::remove(upload, ec) || ec) throw Error(ErrorCode::IoFailure, "cannot remove upload", {name});
  fs::remove(uploads_dir / (fs::path(name).stem().string() + std::string(kSidecarSuffix)), ec);
  fs::remove_all(dirs.exports / name, ec);
  fs::remove(dirs.results / (name + ".report.json"), ec);
  if (fs::exists(dirs.store_path(), ec)) {
    ResultStore store(dirs.store_path());
    store.delete_dataset(name);
  }
  Log::info("deleted 1 dataset");
}

}  // namespace homewise
