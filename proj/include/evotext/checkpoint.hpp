#pragma once

#include <optional>
#include <string>

#include "evotext/engine.hpp"

namespace evotext {

// JSON round-trips for run state. Genes are stored as canonical text and
// re-parsed on load, so a checkpoint is readable with nothing but the task
// manifest.

json violation_to_json(const ConstraintViolation& v);
ConstraintViolation violation_from_json(const json& j);

json fitness_report_to_json(const FitnessReport& r);
FitnessReport fitness_report_from_json(const json& j);

json individual_to_json(const Individual& ind, const GeneCodec& codec);
Individual individual_from_json(const json& j, const GeneCodec& codec);

json generation_record_to_json(const GenerationRecord& r);
GenerationRecord generation_record_from_json(const json& j);

// Full run state between generations.
struct Checkpoint {
  std::string config_digest;
  EngineConfig config;
  json provider_config = json::object();  // echo (env var names only, no secrets)
  std::string task_manifest;
  std::string task_kind;
  std::string task_name;
  bool complete = false;
  std::optional<TerminationReason> reason;
  std::string rng_state;
  int next_id = 0;
  Population population;
  std::vector<GenerationRecord> history;
  std::optional<Individual> best;
  long pending_creation_calls = 0;
  long total_calls = 0;
  Usage usage;
  int resumed_from = -1;
};

json checkpoint_to_json(const Checkpoint& cp, const GeneCodec& codec);
Checkpoint checkpoint_from_json(const json& j, const GeneCodec& codec);

void save_checkpoint_file(const std::string& path, const Checkpoint& cp, const GeneCodec& codec);
json load_checkpoint_json(const std::string& path);

}  // namespace evotext
