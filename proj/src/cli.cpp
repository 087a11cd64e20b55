#include "evotext/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evotext/checkpoint.hpp"
#include "evotext/report.hpp"
#include "evotext/tasks/scripted.hpp"

namespace evotext::cli {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct BuiltProvider {
  std::unique_ptr<Provider> owned;
  std::unique_ptr<Provider> recorder;  // wraps owned when recording
  Provider* active = nullptr;
};

BuiltProvider build_provider(const RunConfig& config, const TaskDefinition& task, bool record) {
  BuiltProvider built;
  switch (config.provider.backend) {
    case Backend::scripted:
      built.owned = tasks::make_scripted_provider(task, config.engine.rng_seed,
                                                  config.provider.max_in_flight);
      break;
    case Backend::replay:
      built.owned = std::make_unique<ReplayProvider>(config.cassette_path,
                                                     config.provider.max_in_flight);
      break;
    case Backend::live: {
      // Fail before any network activity when the token is missing.
      LiveProvider::auth_token_or_throw(config.provider);
      ProviderConfig live_cfg = config.provider;
      live_cfg.cassette_path = config.cassette_path;
      built.owned = std::make_unique<LiveProvider>(live_cfg, config.engine.rng_seed ^ 0x9e3779b9ull);
      break;
    }
  }
  built.active = built.owned.get();
  if (record) {
    if (config.cassette_path.empty())
      throw std::invalid_argument("recording needs an output cassette path");
    auto writer = std::make_shared<CassetteWriter>(config.cassette_path);
    built.recorder = std::make_unique<RecordingProvider>(*built.owned, writer,
                                                         config.provider.max_in_flight);
    built.active = built.recorder.get();
  }
  return built;
}

int finish_run(const RunResult& result, const TaskDefinition& task, const RunConfig& config) {
  if (!config.report_path.empty()) write_run_report(result, task, config.report_path);
  if (result.best && result.best->gene) {
    std::cout << task.codec->render_human(result.best->gene->payload());
  }
  if (result.reason == TerminationReason::population_extinct) {
    std::cerr << "population extinct: no usable candidates survived\n";
    return kExitExtinct;
  }
  return kExitOk;
}

int run_with_engine(const RunConfig& config, const TaskDefinition& task, Provider& provider,
                    telemetry::Logger& logger, const std::optional<std::string>& resume_checkpoint) {
  EvolutionEngine engine(task, config.engine, provider, logger);
  if (!config.checkpoint_path.empty()) engine.set_checkpoint_path(config.checkpoint_path);
  engine.set_provider_config_echo(provider_config_to_json(config.provider));
  try {
    RunResult result =
        resume_checkpoint ? engine.resume_from(*resume_checkpoint) : engine.run();
    return finish_run(result, task, config);
  } catch (const RunAborted& aborted) {
    std::cerr << "run aborted: " << aborted.what() << "\n";
    if (aborted.checkpoint_written)
      std::cerr << "checkpoint available at " << aborted.checkpoint_path << "\n";
    if (!config.report_path.empty()) {
      ReportOptions options;
      options.partial = true;
      options.checkpoint_ref = aborted.checkpoint_written ? aborted.checkpoint_path : "";
      write_run_report(aborted.partial, task, config.report_path, options);
    }
    return kExitProviderAbort;
  }
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::invalid_argument("run config is not a JSON object: " + path);
  for (const auto& [key, value] : j.items()) {
    if (key != "task_manifest" && key != "engine" && key != "provider" && key != "output" &&
        key != "log_level") {
      throw std::invalid_argument("unknown run config key: '" + key + "'");
    }
  }
  if (!j.contains("task_manifest"))
    throw std::invalid_argument("run config needs 'task_manifest': " + path);

  RunConfig config;
  config.task_manifest = j["task_manifest"].get<std::string>();
  // Task manifests are looked up next to the config file; output paths stay
  // relative to the working directory.
  {
    std::filesystem::path manifest(config.task_manifest);
    if (manifest.is_relative()) {
      config.task_manifest = (std::filesystem::path(path).parent_path() / manifest).string();
    }
  }
  if (j.contains("engine")) config.engine = engine_config_from_json(j["engine"]);
  if (j.contains("provider")) config.provider = provider_config_from_json(j["provider"]);
  if (j.contains("output")) {
    const json& out = j["output"];
    for (const auto& [key, value] : out.items()) {
      if (key != "report" && key != "log" && key != "checkpoint" && key != "cassette")
        throw std::invalid_argument("unknown run config output key: '" + key + "'");
    }
    config.report_path = out.value("report", std::string());
    config.log_path = out.value("log", std::string());
    config.checkpoint_path = out.value("checkpoint", std::string());
    config.cassette_path = out.value("cassette", std::string());
  }
  if (j.contains("log_level"))
    config.log_level = telemetry::log_level_from_string(j["log_level"].get<std::string>());

  check_engine_config(config.engine);
  if (config.provider.backend == Backend::replay && config.cassette_path.empty())
    throw std::invalid_argument("replay backend needs output.cassette in " + path);
  return config;
}

void apply_overrides(RunConfig& config, const RunOverrides& overrides) {
  if (overrides.seed) config.engine.rng_seed = *overrides.seed;
  if (overrides.backend) config.provider.backend = backend_from_string(*overrides.backend);
  if (overrides.generations) config.engine.max_generations = *overrides.generations;
  if (overrides.population) config.engine.population_size = *overrides.population;
  if (overrides.report_path) config.report_path = *overrides.report_path;
  if (overrides.log_level)
    config.log_level = telemetry::log_level_from_string(*overrides.log_level);
  if (overrides.cassette_path) config.cassette_path = *overrides.cassette_path;
  check_engine_config(config.engine);
}

int cmd_run(const std::string& config_path, const RunOverrides& overrides, bool record,
            bool replay) {
  RunConfig config;
  TaskDefinition task;
  try {
    config = load_run_config(config_path);
    apply_overrides(config, overrides);
    if (replay) config.provider.backend = Backend::replay;
    task = load_task_manifest(config.task_manifest);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  telemetry::Logger logger(config.log_level, config.log_path.empty());
  if (!config.log_path.empty()) logger.open_file(config.log_path);

  try {
    BuiltProvider provider = build_provider(config, task, record);
    return run_with_engine(config, task, *provider.active, logger, std::nullopt);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_resume(const std::string& checkpoint_path, const std::optional<std::string>& config_path,
               const RunOverrides& overrides) {
  try {
    json cj = load_checkpoint_json(checkpoint_path);
    const std::string manifest = cj.at("task").at("manifest").get<std::string>();
    TaskDefinition task = load_task_manifest(manifest);

    RunConfig config;
    config.task_manifest = manifest;
    config.engine = engine_config_from_json(cj.at("config"));
    config.provider = provider_config_from_json(cj.value("provider", json::object()));
    config.checkpoint_path = checkpoint_path;

    if (config_path) {
      // The run config file must still describe the same run.
      RunConfig from_file = load_run_config(*config_path);
      if (config_digest(from_file.engine, task) != cj.at("config_digest").get<std::string>()) {
        std::cerr << "config error: config file does not match the checkpointed run\n";
        return kExitConfigError;
      }
      config.report_path = from_file.report_path;
      config.log_path = from_file.log_path;
      config.cassette_path = from_file.cassette_path;
      config.log_level = from_file.log_level;
    }
    if (overrides.backend) config.provider.backend = backend_from_string(*overrides.backend);
    if (overrides.report_path) config.report_path = *overrides.report_path;
    if (overrides.log_level)
      config.log_level = telemetry::log_level_from_string(*overrides.log_level);
    if (overrides.cassette_path) config.cassette_path = *overrides.cassette_path;

    telemetry::Logger logger(config.log_level, config.log_path.empty());
    if (!config.log_path.empty()) logger.open_file(config.log_path);

    BuiltProvider provider = build_provider(config, task, false);
    return run_with_engine(config, task, *provider.active, logger, checkpoint_path);
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_validate(const std::string& task_manifest, const std::string& candidate_path) {
  TaskDefinition task;
  std::string candidate;
  try {
    task = load_task_manifest(task_manifest);
    candidate = read_file(candidate_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  auto parsed = parse_from_text(candidate, *task.codec);
  if (!parsed_ok(parsed)) {
    const auto& failure = parse_failure(parsed);
    json out{{"parse_failure",
              {{"reason", to_string(failure.reason)}, {"message", failure.message}}}};
    std::cout << out.dump(2) << "\n";
    return kExitParseFailure;
  }

  auto violations = validate(parsed_gene(parsed), task.constraints);
  json list = json::array();
  for (const auto& v : violations) list.push_back(violation_to_json(v));
  json out{{"violations", list}, {"feasible", !has_hard_violation(violations)}};
  std::cout << out.dump(2) << "\n";
  return has_hard_violation(violations) ? kExitHardViolation : kExitOk;
}

int run_main(int argc, char** argv) {
  CLI::App app{"Evolves structured documents against task constraints with an LLM in the loop"};
  app.require_subcommand(1);

  std::string config_path;
  std::string checkpoint_path;
  std::string task_manifest;
  std::string candidate_path;
  std::optional<std::string> resume_config;
  RunOverrides overrides;

  auto add_override_flags = [&overrides](CLI::App* cmd) {
    cmd->add_option("--seed", overrides.seed, "Engine rng seed");
    cmd->add_option("--backend", overrides.backend, "Provider backend: live|scripted|replay")
        ->check(CLI::IsMember({"live", "scripted", "replay"}));
    cmd->add_option("--generations", overrides.generations, "Maximum generations");
    cmd->add_option("--population", overrides.population, "Population size");
    cmd->add_option("--report", overrides.report_path, "Run report output path");
    cmd->add_option("--log-level", overrides.log_level,
                    "Log level: error|warn|info|debug|trace");
    cmd->add_option("--cassette", overrides.cassette_path, "Cassette path");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "Run the evolutionary loop");
  run_cmd->add_option("--config", config_path, "Run config JSON")->required();
  add_override_flags(run_cmd);

  CLI::App* resume_cmd = app.add_subcommand("resume", "Continue a checkpointed run");
  resume_cmd->add_option("--checkpoint", checkpoint_path, "Checkpoint file")->required();
  resume_cmd->add_option("--config", resume_config, "Run config JSON (digest-checked)");
  add_override_flags(resume_cmd);

  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Parse and constraint-check a candidate file");
  validate_cmd->add_option("--task", task_manifest, "Task manifest JSON")->required();
  validate_cmd->add_option("--candidate", candidate_path, "Candidate text file")->required();

  CLI::App* record_cmd = app.add_subcommand("record", "Run while capturing a provider cassette");
  record_cmd->add_option("--config", config_path, "Run config JSON")->required();
  add_override_flags(record_cmd);

  CLI::App* replay_cmd = app.add_subcommand("replay", "Re-run from a recorded cassette");
  replay_cmd->add_option("--config", config_path, "Run config JSON")->required();
  add_override_flags(replay_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfigError;
  }

  if (run_cmd->parsed()) return cmd_run(config_path, overrides);
  if (resume_cmd->parsed()) return cmd_resume(checkpoint_path, resume_config, overrides);
  if (validate_cmd->parsed()) return cmd_validate(task_manifest, candidate_path);
  if (record_cmd->parsed()) return cmd_run(config_path, overrides, /*record=*/true);
  if (replay_cmd->parsed()) return cmd_run(config_path, overrides, /*record=*/false, /*replay=*/true);
  return kExitConfigError;
}

}  // namespace evotext::cli
