#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include "homewise/batch.hpp"
#include "homewise/logging.hpp"
#include "homewise/pipeline.hpp"

// After Eigen: <resolv.h> defines a `_res` macro that collides with Eigen.
#include <httplib.h>

namespace homewise {

inline int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::IoFailure:
    case ErrorCode::Internal: return 500;
    default: return 400;
  }
}

inline std::uint64_t parse_seed(std::string_view text) {
  std::uint64_t v = 0;
  const auto t = detail::trim(text);
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || p != t.data() + t.size())
    throw Error(ErrorCode::InvalidArgument, "seed must be a non-negative integer", {std::string(text)});
  return v;
}

/// Dataset and job registries behind the HTTP API. Uploaded files live under
/// <root>/uploads as "<upload_id>.<ext>" so batch runs and deletion see them.
class ApiSession {
 public:
  ApiSession(Config cfg, const fs::path& root)
      : cfg_(std::move(cfg)),
        uploads_(root / cfg_.batch.uploads_dir),
        dirs_(OutputDirs::from(cfg_, root)) {
    fs::create_directories(uploads_);
  }

  ~ApiSession() {
    std::vector<std::thread> threads;
    {
      std::lock_guard lock(jobs_mutex_);
      for (auto& [id, j] : jobs_)
        if (j->thread.joinable()) threads.push_back(std::move(j->thread));
    }
    for (auto& t : threads) t.join();
  }

  const Config& config() const { return cfg_; }
  const fs::path& uploads_dir() const { return uploads_; }
  const OutputDirs& output_dirs() const { return dirs_; }
  BatchHooks batch_hooks;

  struct Upload {
    std::string upload_id;
    PreparedDataset prepared;
  };

  /// Validates, cleans and stores a dataset. Returns the registry entry.
  std::shared_ptr<const Upload> add_dataset(DatasetInput in) {
    auto prepared = prepare_dataset(in, cfg_);
    const auto format = in.format.value_or(detect_format(in.source_name, in.content));
    auto up = std::make_shared<Upload>(Upload{random_token(), std::move(prepared)});
    const std::string file = up->upload_id + (format == DataFormat::Json ? ".json" : ".csv");
    write_text_file(uploads_ / file, in.content);
    if (in.building_fields) {
      nlohmann::json b = nlohmann::json::object();
      for (const auto& [k, v] : *in.building_fields) b[k] = v;
      write_text_file(uploads_ / (up->upload_id + std::string(kSidecarSuffix)), b.dump());
    }
    std::unique_lock lock(datasets_mutex_);
    datasets_[up->upload_id] = {up, file};
    Log::info("dataset stored: " + std::to_string(up->prepared.validation.accepted_rows) + " rows accepted");
    return up;
  }

  std::shared_ptr<const Upload> dataset(const std::string& id) const {
    std::shared_lock lock(datasets_mutex_);
    const auto it = datasets_.find(id);
    if (it == datasets_.end()) throw Error(ErrorCode::NotFound, "unknown dataset id", {id});
    return it->second.upload;
  }

  void delete_dataset(const std::string& id) {
    std::string file;
    {
      std::unique_lock lock(datasets_mutex_);
      const auto it = datasets_.find(id);
      if (it == datasets_.end()) throw Error(ErrorCode::NotFound, "unknown dataset id", {id});
      file = it->second.file;
      datasets_.erase(it);
    }
    homewise::delete_dataset(file, uploads_, dirs_);
  }

  struct Job {
    std::shared_ptr<BatchJob> job;
    std::optional<PortfolioSummary> summary;
    std::optional<Error> error;
    std::thread thread;
  };

  /// Starts an asynchronous batch over the given uploads (all when empty).
  std::string start_batch(const std::vector<std::string>& ids, std::uint64_t seed, unsigned parallelism) {
    std::vector<DatasetRef> refs;
    {
      std::shared_lock lock(datasets_mutex_);
      if (ids.empty()) {
        for (const auto& [id, e] : datasets_) refs.push_back(ref_for(e.file));
      } else {
        for (const auto& id : ids) {
          const auto it = datasets_.find(id);
          if (it == datasets_.end()) throw Error(ErrorCode::NotFound, "unknown dataset id", {id});
          refs.push_back(ref_for(it->second.file));
        }
      }
    }
    if (refs.empty()) throw Error(ErrorCode::EmptyList, "no datasets to process");
    std::sort(refs.begin(), refs.end(), [](const DatasetRef& a, const DatasetRef& b) { return a.name < b.name; });

    auto entry = std::make_shared<Job>();
    entry->job = std::make_shared<BatchJob>(random_token(), refs);
    const std::string job_id = entry->job->snapshot().job_id;
    {
      std::lock_guard lock(jobs_mutex_);
      jobs_[job_id] = entry;
    }
    std::weak_ptr<Job> weak = entry;
    std::lock_guard lock(jobs_mutex_);
    entry->thread = std::thread([this, weak, refs, seed, parallelism] {
      auto e = weak.lock();
      if (!e) return;
      try {
        auto result = run_batch(refs, cfg_, seed, parallelism, batch_hooks, e->job);
        persist_batch(result, dirs_);
        std::lock_guard l(jobs_mutex_);
        e->summary = std::move(result.summary);
      } catch (const Error& err) {
        std::lock_guard l(jobs_mutex_);
        e->error = err;
      } catch (const std::exception& ex) {
        std::lock_guard l(jobs_mutex_);
        e->error = Error(ErrorCode::Internal, ex.what());
      }
    });
    return job_id;
  }

  /// Job record, plus the portfolio summary once the job has finished.
  Json batch_status(const std::string& job_id) const {
    std::shared_ptr<Job> e;
    {
      std::lock_guard lock(jobs_mutex_);
      const auto it = jobs_.find(job_id);
      if (it == jobs_.end()) throw Error(ErrorCode::NotFound, "unknown job id", {job_id});
      e = it->second;
    }
    const auto record = e->job->snapshot();
    Json j = to_json(record);
    std::lock_guard lock(jobs_mutex_);
    const bool terminal = record.state == RunState::Done || record.state == RunState::Failed;
    if (terminal && !e->summary && !e->error) {
      // Persisting has not finished yet; report as still running.
      j["status"] = to_string(RunState::Running);
    }
    j["summary"] = e->summary ? to_json(*e->summary) : Json(nullptr);
    j["error"] = e->error ? to_json(*e->error) : Json(nullptr);
    return j;
  }

 private:
  DatasetRef ref_for(const std::string& file) const {
    DatasetRef r{file, uploads_ / file, std::nullopt};
    const auto sidecar = uploads_ / (fs::path(file).stem().string() + std::string(kSidecarSuffix));
    std::error_code ec;
    if (fs::exists(sidecar, ec)) r.building_path = sidecar;
    return r;
  }

  struct Entry {
    std::shared_ptr<const Upload> upload;
    std::string file;
  };

  Config cfg_;
  fs::path uploads_;
  OutputDirs dirs_;
  mutable std::shared_mutex datasets_mutex_;
  std::map<std::string, Entry> datasets_;
  mutable std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
};

namespace detail {

inline void send_json(httplib::Response& res, const Json& j, int status = 200) {
  res.status = status;
  res.set_content(j.dump(2) + "\n", "application/json");
}

inline void send_error(httplib::Response& res, const Error& e) { send_json(res, to_json(e), http_status(e.code())); }

template <typename F>
auto guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const nlohmann::json::exception& e) {
      send_error(res, Error(ErrorCode::InvalidArgument, "malformed JSON body", {e.what()}));
    } catch (const std::exception& e) {
      send_error(res, Error(ErrorCode::Internal, e.what()));
    }
  };
}

inline Json parse_body_json(const httplib::Request& req) {
  try {
    return Json::parse(req.body);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidArgument, "request body is not valid JSON", {e.what()});
  }
}

inline std::uint64_t query_seed(const httplib::Request& req) {
  return req.has_param("seed") ? parse_seed(req.get_param_value("seed")) : 0;
}

inline RawFields building_from_json(const Json& j) {
  nlohmann::json plain = nlohmann::json::parse(j.dump());
  return fields_from_json(plain);
}

/// Upload body: multipart ("file" plus optional "building" JSON), a JSON
/// envelope {"content", "filename"?, "format"?, "building"?}, a meter JSON
/// document, or raw CSV text.
inline DatasetInput upload_input(const httplib::Request& req) {
  DatasetInput in;
  if (req.is_multipart_form_data()) {
    if (!req.has_file("file")) throw Error(ErrorCode::MissingRequired, "multipart upload needs a 'file' part", {"file"});
    const auto f = req.get_file_value("file");
    in.source_name = f.filename.empty() ? "upload.csv" : fs::path(f.filename).filename().string();
    in.content = f.content;
    if (req.has_file("building")) {
      const auto b = req.get_file_value("building");
      in.building_fields = building_fields_from_json_text(b.content);
    }
    return in;
  }
  const auto type = req.get_header_value("Content-Type");
  const auto body = trim(req.body);
  if (type.find("json") != std::string::npos || (!body.empty() && (body.front() == '{' || body.front() == '['))) {
    const Json j = parse_body_json(req);
    if (j.is_object() && j.contains("content")) {
      if (!j["content"].is_string()) throw Error(ErrorCode::InvalidArgument, "content must be a string", {"content"});
      in.content = j["content"].get<std::string>();
      in.source_name = j.value("filename", std::string("upload.csv"));
      if (j.contains("format")) {
        const auto f = enum_from_string<DataFormat>(j["format"].get<std::string>());
        if (!f) throw Error(ErrorCode::UnknownFormat, "unknown data format", {j["format"].get<std::string>()});
        in.format = *f;
      }
      if (j.contains("building") && !j["building"].is_null()) in.building_fields = building_from_json(j["building"]);
      return in;
    }
    in.content = req.body;
    in.source_name = "upload.json";
    in.format = DataFormat::Json;
    return in;
  }
  in.content = req.body;
  in.source_name = "upload.csv";
  in.format = DataFormat::Csv;
  return in;
}

inline const char* content_type_for(const std::string& file) {
  if (file.ends_with(".json")) return "application/json";
  if (file.ends_with(".html")) return "text/html; charset=utf-8";
  return "text/csv";
}

}  // namespace detail

/// Registers every API route on `server`.
inline void register_routes(httplib::Server& server, ApiSession& session) {
  using detail::guarded;
  using detail::send_json;

  server.set_payload_max_length(static_cast<std::size_t>(session.config().server.max_upload_mb * 1024.0 * 1024.0));
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto code = res.status == 404 ? ErrorCode::NotFound : ErrorCode::InvalidArgument;
    std::string message = res.status == 413 ? "request body exceeds the configured upload limit"
                                            : std::string(httplib::status_message(res.status));
    Json j{{"code", res.status == 413 ? "PayloadTooLarge" : std::string(to_string(code))},
           {"message", message},
           {"details", Json::array()}};
    res.set_content(j.dump(2) + "\n", "application/json");
  });

  server.Post("/datasets", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto up = session.add_dataset(detail::upload_input(req));
    send_json(res, Json{{"upload_id", up->upload_id},
                        {"pseudonym", up->prepared.pseudonym},
                        {"validation", to_json(up->prepared.validation)},
                        {"cleaning",
                         {{"filled_days", up->prepared.filled_days}, {"warnings", up->prepared.cleaning_warnings}}}});
  }));

  server.Get(R"(/datasets/([0-9a-f]+)/profile)", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto up = session.dataset(req.matches[1]);
    send_json(res, to_json(profile(up->prepared.series, up->prepared.building)));
  }));

  server.Get(R"(/datasets/([0-9a-f]+)/anomalies)", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto up = session.dataset(req.matches[1]);
    const auto methods =
        req.has_param("methods") ? parse_methods(req.get_param_value("methods")) : all_anomaly_methods();
    send_json(res, to_json(dataset_anomalies(up->prepared, methods, detail::query_seed(req), session.config())));
  }));

  server.Post(R"(/datasets/([0-9a-f]+)/scenarios)", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto up = session.dataset(req.matches[1]);
    const auto specs = detail::trim(req.body).empty() ? std::vector<ScenarioSpec>{}
                                                      : scenario_specs_from_json(detail::parse_body_json(req));
    const auto methods = all_anomaly_methods();
    const auto flags = dataset_anomalies(up->prepared, methods, detail::query_seed(req), session.config());
    const auto outcome = dataset_scenarios(up->prepared, specs, flags, session.config());
    Json results = Json::array();
    for (const auto& r : outcome.results) results.push_back(to_json(r));
    const Json recs = to_json(outcome.recommendations);
    send_json(res, Json{{"scenarios", results},
                        {"comparison", to_json(outcome.table)},
                        {"recommendations", recs["recommendations"]},
                        {"advisories", recs["advisories"]}});
  }));

  server.Get(R"(/datasets/([0-9a-f]+)/report)", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const auto format = parse_export_format(req.has_param("format") ? req.get_param_value("format") : "json");
    const auto up = session.dataset(req.matches[1]);
    const auto bundle = analyze_dataset(up->prepared, session.config(), detail::query_seed(req));
    const auto files = export_files(bundle, format);
    write_files(session.output_dirs().exports / up->upload_id, files);
    std::string wanted = files.front().name;
    if (format == ExportFormat::Csv && req.has_param("file")) wanted = req.get_param_value("file");
    for (const auto& f : files) {
      if (f.name != wanted) continue;
      res.set_content(f.content, detail::content_type_for(f.name));
      return;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown export file", {wanted});
  }));

  server.Delete(R"(/datasets/([0-9a-f]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    session.delete_dataset(id);
    send_json(res, Json{{"deleted", id}});
  }));

  server.Post("/batch", guarded([&](const httplib::Request& req, httplib::Response& res) {
    std::vector<std::string> ids;
    std::uint64_t seed = detail::query_seed(req);
    unsigned parallelism = 0;
    if (!detail::trim(req.body).empty()) {
      const Json j = detail::parse_body_json(req);
      if (!j.is_object()) throw Error(ErrorCode::InvalidArgument, "batch request must be an object");
      if (j.contains("upload_ids")) ids = j["upload_ids"].get<std::vector<std::string>>();
      if (j.contains("seed")) seed = j["seed"].get<std::uint64_t>();
      if (j.contains("parallelism")) parallelism = j["parallelism"].get<unsigned>();
    }
    const auto job_id = session.start_batch(ids, seed, parallelism);
    send_json(res, session.batch_status(job_id), 202);
  }));

  server.Get(R"(/batch/([0-9a-f]+))", guarded([&](const httplib::Request& req, httplib::Response& res) {
    send_json(res, session.batch_status(req.matches[1]));
  }));

  if (const auto& dir = session.config().server.static_dir; !dir.empty()) server.set_mount_point("/", dir);
}

/// HTTP server bound to loopback unless configured otherwise.
class ApiServer {
 public:
  ApiServer(Config cfg, const fs::path& root) : session_(std::move(cfg), root) { register_routes(server_, session_); }
  ~ApiServer() { stop(); }

  ApiSession& session() { return session_; }

  std::string host() const { return session_.config().server.loopback_only ? "127.0.0.1" : "0.0.0.0"; }

  /// Blocks serving requests on the configured port.
  bool listen() { return server_.listen(host(), session_.config().server.port); }

  /// Binds an ephemeral port and serves on a background thread.
  int start_background() {
    const int port = server_.bind_to_any_port(host());
    if (port < 0) throw Error(ErrorCode::IoFailure, "cannot bind server socket");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return port;
  }

  void stop() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  ApiSession session_;
  httplib::Server server_;
  std::thread thread_;
};

}  // namespace homewise
