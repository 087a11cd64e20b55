#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include <json.hpp>

namespace evotext::telemetry {

enum class LogLevel { error = 0, warn = 1, info = 2, debug = 3, trace = 4 };

const char* to_string(LogLevel level);
LogLevel log_level_from_string(const std::string& s);

// One structured event. Payload keys are event-kind specific; the kinds used
// by the engine are: run-start, generation-start, generation-end,
// evaluation-done, offspring-created, constraint-violation, provider-call,
// checkpoint, termination.
struct LogEvent {
  LogLevel level = LogLevel::info;
  std::string kind;
  int generation = -1;  // -1 when not generation-scoped
  std::optional<int> individual_id;
  nlohmann::ordered_json payload = nlohmann::ordered_json::object();
};

// Level-filtered sink: line-delimited JSON to a file, optionally mirrored to
// stderr. Events are sequenced by one writer so lines never interleave. A
// failing file sink degrades to a one-time console warning; it never aborts
// the run.
class Logger {
 public:
  explicit Logger(LogLevel min_level = LogLevel::info, bool console = false)
      : min_level_(min_level), console_(console) {}

  void open_file(const std::string& path);
  void emit(const LogEvent& event);

  LogLevel min_level() const { return min_level_; }
  void set_min_level(LogLevel level) { min_level_ = level; }

  // Shared no-output logger for callers that do not care.
  static Logger& quiet();

 private:
  LogLevel min_level_;
  bool console_;
  std::mutex mutex_;
  std::string file_path_;
  bool file_enabled_ = false;
  bool file_failed_ = false;
};

// Truncation for solution snippets in debug logs.
std::string snippet(const std::string& text, size_t max_chars = 500);

}  // namespace evotext::telemetry
