#include "evotext/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace evotext {

namespace {

json optional_double(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> double_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

json violation_to_json(const ConstraintViolation& v) {
  return json{{"constraint", v.constraint_id},
              {"severity", to_string(v.severity)},
              {"message", v.message},
              {"measured", optional_double(v.measured)},
              {"limit", optional_double(v.limit)},
              {"penalty", v.penalty}};
}

ConstraintViolation violation_from_json(const json& j) {
  ConstraintViolation v;
  v.constraint_id = j["constraint"].get<std::string>();
  v.severity = j["severity"].get<std::string>() == "hard" ? Severity::hard : Severity::soft;
  v.message = j["message"].get<std::string>();
  v.measured = double_or_null(j["measured"]);
  v.limit = double_or_null(j["limit"]);
  v.penalty = j["penalty"].get<double>();
  return v;
}

json fitness_report_to_json(const FitnessReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) violations.push_back(violation_to_json(v));
  return json{{"raw_score", optional_double(r.raw_score)},
              {"normalized", optional_double(r.normalized)},
              {"effective", optional_double(r.effective)},
              {"filtered", r.filtered},
              {"explanation", r.explanation},
              {"samples_used", r.samples_used},
              {"violations", violations}};
}

FitnessReport fitness_report_from_json(const json& j) {
  FitnessReport r;
  r.raw_score = double_or_null(j["raw_score"]);
  r.normalized = double_or_null(j["normalized"]);
  r.effective = double_or_null(j["effective"]);
  r.filtered = j["filtered"].get<bool>();
  r.explanation = j["explanation"].get<std::string>();
  r.samples_used = j["samples_used"].get<int>();
  for (const auto& v : j["violations"]) r.violations.push_back(violation_from_json(v));
  return r;
}

json individual_to_json(const Individual& ind, const GeneCodec& codec) {
  json parents = json::array();
  for (int p : ind.lineage.parent_ids) parents.push_back(p);
  json out{{"id", ind.id},
           {"gene_text", ind.gene ? json(to_text(*ind.gene, codec)) : json(nullptr)},
           {"fingerprint", ind.gene ? json(fingerprint(*ind.gene, codec)) : json(nullptr)},
           {"validity", to_string(ind.validity)},
           {"fitness", optional_double(ind.fitness)},
           {"raw_score", optional_double(ind.raw_score)},
           {"report", ind.report ? fitness_report_to_json(*ind.report) : json(nullptr)},
           {"lineage",
            {{"generation_born", ind.lineage.generation_born},
             {"parent_ids", parents},
             {"operator", to_string(ind.lineage.op)},
             {"structural_fallback", ind.lineage.structural_fallback},
             {"repaired", ind.lineage.repaired}}}};
  return out;
}

Individual individual_from_json(const json& j, const GeneCodec& codec) {
  Individual ind;
  ind.id = j["id"].get<int>();
  if (!j["gene_text"].is_null()) {
    auto parsed = parse_from_text(j["gene_text"].get<std::string>(), codec);
    if (!parsed_ok(parsed)) {
      throw std::runtime_error("checkpoint gene text does not parse: " +
                               parse_failure(parsed).message);
    }
    ind.gene = parsed_gene(parsed);
  }
  ind.validity = validity_from_string(j["validity"].get<std::string>());
  ind.fitness = double_or_null(j["fitness"]);
  ind.raw_score = double_or_null(j["raw_score"]);
  if (!j["report"].is_null()) ind.report = fitness_report_from_json(j["report"]);
  const json& lin = j["lineage"];
  ind.lineage.generation_born = lin["generation_born"].get<int>();
  for (const auto& p : lin["parent_ids"]) ind.lineage.parent_ids.push_back(p.get<int>());
  ind.lineage.op = operator_kind_from_string(lin["operator"].get<std::string>());
  ind.lineage.structural_fallback = lin["structural_fallback"].get<bool>();
  ind.lineage.repaired = lin["repaired"].get<bool>();
  return ind;
}

json generation_record_to_json(const GenerationRecord& r) {
  json ops = json::object();
  for (const auto& [op, count] : r.operator_counts) ops[op] = count;
  return json{{"generation", r.generation},
              {"best", optional_double(r.best)},
              {"mean", optional_double(r.mean)},
              {"worst", optional_double(r.worst)},
              {"hard_violations", r.hard_violations},
              {"parse_failures", r.parse_failures},
              {"operator_counts", ops},
              {"provider_calls", r.provider_calls},
              {"wall_ms", r.wall_ms}};
}

GenerationRecord generation_record_from_json(const json& j) {
  GenerationRecord r;
  r.generation = j["generation"].get<int>();
  r.best = double_or_null(j["best"]);
  r.mean = double_or_null(j["mean"]);
  r.worst = double_or_null(j["worst"]);
  r.hard_violations = j["hard_violations"].get<int>();
  r.parse_failures = j["parse_failures"].get<int>();
  for (const auto& [op, count] : j["operator_counts"].items())
    r.operator_counts[op] = count.get<int>();
  r.provider_calls = j["provider_calls"].get<long>();
  r.wall_ms = j["wall_ms"].get<double>();
  return r;
}

json checkpoint_to_json(const Checkpoint& cp, const GeneCodec& codec) {
  json members = json::array();
  for (const auto& ind : cp.population.members) members.push_back(individual_to_json(ind, codec));
  json history = json::array();
  for (const auto& r : cp.history) history.push_back(generation_record_to_json(r));
  return json{
      {"version", 1},
      {"config_digest", cp.config_digest},
      {"config", engine_config_to_json(cp.config)},
      {"provider", cp.provider_config},
      {"task", {{"manifest", cp.task_manifest}, {"kind", cp.task_kind}, {"name", cp.task_name}}},
      {"complete", cp.complete},
      {"termination_reason", cp.reason ? json(to_string(*cp.reason)) : json(nullptr)},
      {"rng_state", cp.rng_state},
      {"next_id", cp.next_id},
      {"generation", cp.population.generation},
      {"population", members},
      {"history", history},
      {"best", cp.best ? individual_to_json(*cp.best, codec) : json(nullptr)},
      {"pending_creation_calls", cp.pending_creation_calls},
      {"total_calls", cp.total_calls},
      {"usage", {{"input_tokens", cp.usage.input_tokens}, {"output_tokens", cp.usage.output_tokens}}},
      {"resumed_from", cp.resumed_from},
  };
}

Checkpoint checkpoint_from_json(const json& j, const GeneCodec& codec) {
  if (!j.is_object() || j.value("version", 0) != 1)
    throw std::runtime_error("unsupported checkpoint format");
  Checkpoint cp;
  cp.config_digest = j["config_digest"].get<std::string>();
  cp.config = engine_config_from_json(j["config"]);
  cp.provider_config = j.value("provider", json::object());
  cp.task_manifest = j["task"]["manifest"].get<std::string>();
  cp.task_kind = j["task"]["kind"].get<std::string>();
  cp.task_name = j["task"]["name"].get<std::string>();
  cp.complete = j["complete"].get<bool>();
  if (!j["termination_reason"].is_null())
    cp.reason = termination_from_string(j["termination_reason"].get<std::string>());
  cp.rng_state = j["rng_state"].get<std::string>();
  cp.next_id = j["next_id"].get<int>();
  cp.population.generation = j["generation"].get<int>();
  for (const auto& m : j["population"]) cp.population.members.push_back(individual_from_json(m, codec));
  for (const auto& r : j["history"]) cp.history.push_back(generation_record_from_json(r));
  if (!j["best"].is_null()) cp.best = individual_from_json(j["best"], codec);
  cp.pending_creation_calls = j["pending_creation_calls"].get<long>();
  cp.total_calls = j["total_calls"].get<long>();
  cp.usage.input_tokens = j["usage"]["input_tokens"].get<long>();
  cp.usage.output_tokens = j["usage"]["output_tokens"].get<long>();
  cp.resumed_from = j["resumed_from"].get<int>();
  return cp;
}

void save_checkpoint_file(const std::string& path, const Checkpoint& cp, const GeneCodec& codec) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + tmp);
    out << checkpoint_to_json(cp, codec).dump(2) << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

json load_checkpoint_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  json j = json::parse(buf.str(), nullptr, false);
  if (j.is_discarded()) throw std::runtime_error("checkpoint is not valid JSON: " + path);
  return j;
}

}  // namespace evotext
