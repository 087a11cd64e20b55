#include "evotext/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "evotext/checkpoint.hpp"

namespace evotext {

namespace {

std::string iso_timestamp() {
  using namespace std::chrono;
  std::time_t t = system_clock::to_time_t(system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", tm_utc.tm_year + 1900,
                tm_utc.tm_mon + 1, tm_utc.tm_mday, tm_utc.tm_hour, tm_utc.tm_min, tm_utc.tm_sec);
  return buf;
}

}  // namespace

json run_report_json(const RunResult& result, const TaskDefinition& task,
                     const ReportOptions& options) {
  json history = json::array();
  for (const auto& rec : result.history) history.push_back(generation_record_to_json(rec));

  json report{
      {"generated_at", iso_timestamp()},
      {"partial", options.partial},
      {"checkpoint", options.partial && !options.checkpoint_ref.empty()
                         ? json(options.checkpoint_ref)
                         : json(nullptr)},
      {"resumed_from_generation",
       result.resumed ? json(result.resumed_from_generation) : json(nullptr)},
      {"task",
       {{"name", result.task_name}, {"kind", result.task_kind}, {"manifest", task.manifest_path}}},
      {"seed", result.config.rng_seed},
      {"config", engine_config_to_json(result.config)},
      {"termination_reason", options.partial ? json(nullptr) : json(to_string(result.reason))},
      {"total_provider_calls", result.total_provider_calls},
      {"usage",
       {{"input_tokens", result.total_usage.input_tokens},
        {"output_tokens", result.total_usage.output_tokens}}},
      {"history", history},
      {"best", result.best ? individual_to_json(*result.best, *task.codec) : json(nullptr)},
  };
  return report;
}

void write_run_report(const RunResult& result, const TaskDefinition& task, const std::string& path,
                      const ReportOptions& options) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write run report: " + path);
  out << run_report_json(result, task, options).dump(2) << '\n';
}

}  // namespace evotext
