#include "evotext/telemetry.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>

namespace evotext::telemetry {

namespace {

std::string iso_timestamp() {
  using namespace std::chrono;
  auto now = system_clock::now();
  std::time_t t = system_clock::to_time_t(now);
  auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm_utc.tm_year + 1900,
                tm_utc.tm_mon + 1, tm_utc.tm_mday, tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec,
                static_cast<int>(ms));
  return buf;
}

}  // namespace

const char* to_string(LogLevel level) {
  switch (level) {
    case LogLevel::error: return "error";
    case LogLevel::warn: return "warn";
    case LogLevel::info: return "info";
    case LogLevel::debug: return "debug";
    case LogLevel::trace: return "trace";
  }
  return "unknown";
}

LogLevel log_level_from_string(const std::string& s) {
  if (s == "error") return LogLevel::error;
  if (s == "warn") return LogLevel::warn;
  if (s == "info") return LogLevel::info;
  if (s == "debug") return LogLevel::debug;
  if (s == "trace") return LogLevel::trace;
  throw std::invalid_argument("unknown log level: '" + s + "'");
}

void Logger::open_file(const std::string& path) {
  std::lock_guard lock(mutex_);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "warning: cannot open log file " << path << "; file logging disabled\n";
    file_failed_ = true;
    return;
  }
  file_path_ = path;
  file_enabled_ = true;
}

void Logger::emit(const LogEvent& event) {
  if (static_cast<int>(event.level) > static_cast<int>(min_level_)) return;

  nlohmann::ordered_json line;
  line["ts"] = iso_timestamp();
  line["level"] = to_string(event.level);
  line["event"] = event.kind;
  if (event.generation >= 0) line["generation"] = event.generation;
  if (event.individual_id) line["individual"] = *event.individual_id;
  if (!event.payload.empty()) line["payload"] = event.payload;

  std::lock_guard lock(mutex_);
  if (file_enabled_) {
    std::ofstream out(file_path_, std::ios::binary | std::ios::app);
    if (out) {
      out << line.dump() << '\n';
    } else if (!file_failed_) {
      std::cerr << "warning: log file " << file_path_ << " became unwritable\n";
      file_failed_ = true;
      file_enabled_ = false;
    }
  }
  if (console_) {
    std::cerr << "[" << to_string(event.level) << "] " << event.kind;
    if (event.generation >= 0) std::cerr << " gen=" << event.generation;
    if (!event.payload.empty()) std::cerr << " " << event.payload.dump();
    std::cerr << "\n";
  }
}

Logger& Logger::quiet() {
  static Logger logger(LogLevel::error, false);
  return logger;
}

std::string snippet(const std::string& text, size_t max_chars) {
  if (text.size() <= max_chars) return text;
  return text.substr(0, max_chars) + "...";
}

}  // namespace evotext::telemetry
