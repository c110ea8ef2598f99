#pragma once

#include <cstdio>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

namespace homewise {

enum class LogLevel { Debug, Info, Warn, Error };

inline std::string_view to_string(LogLevel level) {
  switch (level) {
    case LogLevel::Debug: return "debug";
    case LogLevel::Info: return "info";
    case LogLevel::Warn: return "warn";
    case LogLevel::Error: return "error";
  }
  return "info";
}

/// Process-wide log sink. Messages carry aggregate counts only; callers
/// never pass readings or raw identifiers.
class Log {
 public:
  using Sink = std::function<void(LogLevel, std::string_view)>;

  static void set_sink(Sink sink) {
    std::lock_guard lock(state().mutex);
    state().sink = std::move(sink);
  }

  static void set_min_level(LogLevel level) {
    std::lock_guard lock(state().mutex);
    state().min_level = level;
  }

  static void write(LogLevel level, std::string_view message) {
    std::lock_guard lock(state().mutex);
    if (level < state().min_level) return;
    if (state().sink) {
      state().sink(level, message);
    } else {
      std::fprintf(stderr, "[homewise] %.*s %.*s\n", static_cast<int>(to_string(level).size()),
                   to_string(level).data(), static_cast<int>(message.size()), message.data());
    }
  }

  static void info(std::string_view m) { write(LogLevel::Info, m); }
  static void warn(std::string_view m) { write(LogLevel::Warn, m); }

 private:
  struct State {
    std::mutex mutex;
    Sink sink;
    LogLevel min_level = LogLevel::Warn;
  };
  static State& state() {
    static State s;
    return s;
  }
};

/// Captures log lines for the lifetime of the object.
class ScopedLogCapture {
 public:
  ScopedLogCapture() {
    Log::set_min_level(LogLevel::Debug);
    Log::set_sink([this](LogLevel level, std::string_view m) {
      lines_ += std::string(to_string(level)) + " " + std::string(m) + "\n";
    });
  }
  ~ScopedLogCapture() {
    Log::set_sink(nullptr);
    Log::set_min_level(LogLevel::Warn);
  }
  ScopedLogCapture(const ScopedLogCapture&) = delete;
  ScopedLogCapture& operator=(const ScopedLogCapture&) = delete;

  const std::string& text() const { return lines_; }

 private:
  std::string lines_;
};

}  // namespace homewise
