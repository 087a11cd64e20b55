#pragma once

#include <optional>
#include <string>

#include "evotext/engine.hpp"
#include "evotext/provider.hpp"

namespace evotext::cli {

// Exit codes (stable API):
//   0  success
//   1  configuration error (bad file, bad values, unset auth env var)
//   2  population extinct
//   3  provider abort (checkpoint written when available)
//   4  validate: hard constraint violation
//   5  validate: parse failure
enum ExitCode {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitExtinct = 2,
  kExitProviderAbort = 3,
  kExitHardViolation = 4,
  kExitParseFailure = 5,
};

// A run configuration file plus command-line overrides, resolved into one
// effective configuration. Override precedence: flags beat file values beat
// built-in defaults.
struct RunConfig {
  std::string task_manifest;
  EngineConfig engine;
  ProviderConfig provider;
  std::string report_path;
  std::string log_path;
  std::string checkpoint_path;
  std::string cassette_path;
  telemetry::LogLevel log_level = telemetry::LogLevel::info;
};

struct RunOverrides {
  std::optional<uint64_t> seed;
  std::optional<std::string> backend;
  std::optional<int> generations;
  std::optional<int> population;
  std::optional<std::string> report_path;
  std::optional<std::string> log_level;
  std::optional<std::string> cassette_path;
};

// Parses and validates a run config file; throws std::invalid_argument /
// std::runtime_error with a message suitable for stderr.
RunConfig load_run_config(const std::string& path);
void apply_overrides(RunConfig& config, const RunOverrides& overrides);

// Subcommand bodies; each returns an exit code and writes diagnostics to
// stderr. `record` forces cassette capture; `replay` forces the replay
// backend.
int cmd_run(const std::string& config_path, const RunOverrides& overrides, bool record = false,
            bool replay = false);
int cmd_resume(const std::string& checkpoint_path, const std::optional<std::string>& config_path,
               const RunOverrides& overrides);
int cmd_validate(const std::string& task_manifest, const std::string& candidate_path);

// Full argv entry point.
int run_main(int argc, char** argv);

}  // namespace evotext::cli
