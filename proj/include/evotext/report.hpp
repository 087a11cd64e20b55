#pragma once

#include <string>

#include "evotext/engine.hpp"

namespace evotext {

struct ReportOptions {
  bool partial = false;           // run aborted before a termination rule fired
  std::string checkpoint_ref;     // where to resume from, when partial
};

// Structured run report. Self-contained: the best solution's canonical text is
// embedded, so the report plus the task manifest reconstruct it exactly.
// Deterministic except for the generated_at header and wall-clock fields.
json run_report_json(const RunResult& result, const TaskDefinition& task,
                     const ReportOptions& options = {});

void write_run_report(const RunResult& result, const TaskDefinition& task, const std::string& path,
                      const ReportOptions& options = {});

}  // namespace evotext
