#include "evotext/task.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "evotext/tasks/knapsack.hpp"
#include "evotext/tasks/proposal.hpp"
#include "evotext/tasks/travel.hpp"

namespace evotext {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> known,
                         const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known)
      if (key == k) ok = true;
    if (!ok) throw std::invalid_argument("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

TaskDefinition load_task_manifest(const std::string& path) {
  json manifest = json::parse(read_file(path), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object())
    throw std::invalid_argument("task manifest is not a JSON object: " + path);
  reject_unknown_keys(manifest, {"name", "kind", "templates", "rubric", "task_description", "params"},
                      "task manifest " + path);

  for (const char* required : {"name", "kind", "templates", "rubric", "task_description"}) {
    if (!manifest.contains(required))
      throw std::invalid_argument("task manifest missing '" + std::string(required) + "': " + path);
  }
  const std::string declared_kind = manifest["kind"].get<std::string>();
  if (declared_kind != "travel" && declared_kind != "proposal" && declared_kind != "knapsack") {
    throw std::invalid_argument("unknown gene kind '" + declared_kind + "' in " + path);
  }

  const fs::path base = fs::path(path).parent_path();
  TaskDefinition task;
  task.manifest_path = path;
  task.name = manifest["name"].get<std::string>();
  task.task_description = manifest["task_description"].get<std::string>();
  task.rubric = read_file((base / manifest["rubric"].get<std::string>()).string());
  task.params = manifest.value("params", json::object());

  const std::string kind = manifest["kind"].get<std::string>();
  using namespace tasks;
  if (kind == "travel") {
    std::vector<CatalogActivity> catalog;
    for (const auto& a : task.params.value("activity_catalog", json::array())) {
      catalog.push_back({a.at("location").get<std::string>(), a.value("description", std::string()),
                         parse_money(a.at("cost").get<std::string>()).value_or(0)});
    }
    task.codec = std::make_shared<TravelCodec>(
        task.params.value("currency_symbol", std::string("¥")), std::move(catalog));
    auto budget = parse_money(task.params.value("budget", std::string()));
    if (!budget) throw std::invalid_argument("travel task needs params.budget like \"5000.00\"");
    if (!task.params.contains("required_days"))
      throw std::invalid_argument("travel task needs params.required_days");
    task.constraints = travel_constraints(*budget, task.params["required_days"].get<int>());
  } else if (kind == "proposal") {
    task.codec = std::make_shared<ProposalCodec>();
    task.constraints = proposal_constraints(task.params.value("word_cap", 1200));
  } else if (kind == "knapsack") {
    KnapsackTables tables = knapsack_tables_from_json(task.params);
    task.constraints = knapsack_constraints(tables);
    task.codec = std::make_shared<KnapsackCodec>(std::move(tables));
  } else {
    throw std::invalid_argument("unknown gene kind '" + kind + "' in " + path);
  }

  task.templates =
      load_template_set((base / manifest["templates"].get<std::string>()).string(), task.name);
  return task;
}

}  // namespace evotext
