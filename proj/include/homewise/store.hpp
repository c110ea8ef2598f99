#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <sqlite3.h>

#include "homewise/error.hpp"

namespace homewise {

struct StoredJob {
  std::string job_id;
  std::string state;
  std::string started_at;
  std::string finished_at;
  int parallelism = 1;
  int dataset_count = 0;
  int failed_count = 0;
};

struct StoredDataset {
  std::string job_id;
  std::string name;
  std::string pseudonym;
  std::string state;
  std::string reason;
  std::optional<double> kwh_per_m2;
  int flag_count = 0;
  std::optional<double> best_payback_years;
  double best_kwh_saved_yr = 0.0;
};

/// Embedded relational store for batch jobs and per-dataset headline metrics.
class ResultStore {
 public:
  explicit ResultStore(const std::filesystem::path& db_path) {
    std::error_code ec;
    if (db_path.has_parent_path()) std::filesystem::create_directories(db_path.parent_path(), ec);
    if (sqlite3_open(db_path.string().c_str(), &db_) != SQLITE_OK) {
      const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
      sqlite3_close(db_);
      db_ = nullptr;
      throw Error(ErrorCode::IoFailure, "cannot open results store: " + msg, {db_path.string()});
    }
    sqlite3_busy_timeout(db_, 5000);
    exec(R"(CREATE TABLE IF NOT EXISTS jobs (
              job_id TEXT PRIMARY KEY, state TEXT NOT NULL, started_at TEXT, finished_at TEXT,
              parallelism INTEGER, dataset_count INTEGER, failed_count INTEGER);
            CREATE TABLE IF NOT EXISTS datasets (
              job_id TEXT NOT NULL, name TEXT NOT NULL, pseudonym TEXT, state TEXT NOT NULL, reason TEXT,
              kwh_per_m2 REAL, flag_count INTEGER, best_payback_years REAL, best_kwh_saved_yr REAL,
              PRIMARY KEY (job_id, name));)");
  }

  ~ResultStore() { sqlite3_close(db_); }
  ResultStore(const ResultStore&) = delete;
  ResultStore& operator=(const ResultStore&) = delete;

  void put_job(const StoredJob& j) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "INSERT OR REPLACE INTO jobs VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");
    st.text(1, j.job_id).text(2, j.state).text(3, j.started_at).text(4, j.finished_at);
    st.integer(5, j.parallelism).integer(6, j.dataset_count).integer(7, j.failed_count);
    st.run();
  }

  void put_dataset(const StoredDataset& d) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "INSERT OR REPLACE INTO datasets VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8, ?9)");
    st.text(1, d.job_id).text(2, d.name).text(3, d.pseudonym).text(4, d.state).text(5, d.reason);
    st.real(6, d.kwh_per_m2).integer(7, d.flag_count).real(8, d.best_payback_years).real(9, d.best_kwh_saved_yr);
    st.run();
  }

  std::optional<StoredJob> job(const std::string& job_id) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT job_id, state, started_at, finished_at, parallelism, dataset_count, failed_count "
                      "FROM jobs WHERE job_id = ?1");
    st.text(1, job_id);
    if (!st.step()) return std::nullopt;
    return StoredJob{st.col_text(0), st.col_text(1), st.col_text(2), st.col_text(3),
                     st.col_int(4),  st.col_int(5),  st.col_int(6)};
  }

  std::vector<StoredDataset> datasets(const std::string& job_id) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "SELECT job_id, name, pseudonym, state, reason, kwh_per_m2, flag_count, best_payback_years, "
                      "best_kwh_saved_yr FROM datasets WHERE job_id = ?1 ORDER BY name");
    st.text(1, job_id);
    std::vector<StoredDataset> out;
    while (st.step())
      out.push_back({st.col_text(0), st.col_text(1), st.col_text(2), st.col_text(3), st.col_text(4),
                     st.col_real(5), st.col_int(6), st.col_real(7), st.col_real(8).value_or(0.0)});
    return out;
  }

  /// Removes every stored row for a dataset name; returns the row count.
  int delete_dataset(const std::string& name) {
    std::lock_guard lock(mutex_);
    Statement st(db_, "DELETE FROM datasets WHERE name = ?1");
    st.text(1, name);
    st.run();
    return sqlite3_changes(db_);
  }

 private:
  class Statement {
   public:
    Statement(sqlite3* db, const char* sql) : db_(db) {
      if (sqlite3_prepare_v2(db, sql, -1, &st_, nullptr) != SQLITE_OK)
        throw Error(ErrorCode::IoFailure, std::string("results store: ") + sqlite3_errmsg(db));
    }
    ~Statement() { sqlite3_finalize(st_); }
    Statement(const Statement&) = delete;
    Statement& operator=(const Statement&) = delete;

    Statement& text(int i, const std::string& v) {
      sqlite3_bind_text(st_, i, v.c_str(), static_cast<int>(v.size()), SQLITE_TRANSIENT);
      return *this;
    }
    Statement& integer(int i, long long v) {
      sqlite3_bind_int64(st_, i, v);
      return *this;
    }
    Statement& real(int i, std::optional<double> v) {
      if (v) sqlite3_bind_double(st_, i, *v);
      else sqlite3_bind_null(st_, i);
      return *this;
    }
    bool step() {
      const int rc = sqlite3_step(st_);
      if (rc == SQLITE_ROW) return true;
      if (rc == SQLITE_DONE) return false;
      throw Error(ErrorCode::IoFailure, std::string("results store: ") + sqlite3_errmsg(db_));
    }
    void run() {
      while (step()) {
      }
    }
    std::string col_text(int i) {
      const auto* p = sqlite3_column_text(st_, i);
      return p ? reinterpret_cast<const char*>(p) : "";
    }
    int col_int(int i) { return sqlite3_column_int(st_, i); }
    std::optional<double> col_real(int i) {
      if (sqlite3_column_type(st_, i) == SQLITE_NULL) return std::nullopt;
      return sqlite3_column_double(st_, i);
    }

   private:
    sqlite3* db_;
    sqlite3_stmt* st_ = nullptr;
  };

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      const std::string msg = err ? err : "unknown error";
      sqlite3_free(err);
      throw Error(ErrorCode::IoFailure, "results store: " + msg);
    }
  }

  sqlite3* db_ = nullptr;
  std::mutex mutex_;
};

}  // namespace homewise
