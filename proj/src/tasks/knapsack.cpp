#include "evotext/tasks/knapsack.hpp"

#include <algorithm>

namespace evotext::tasks {

std::vector<int> knapsack_choices(const json& payload) {
  std::vector<int> out;
  for (const auto& c : payload["choices"]) out.push_back(c.get<int>());
  return out;
}

json knapsack_payload(const std::vector<int>& choices) {
  return json{{"choices", choices}};
}

long knapsack_cost(const KnapsackTables& tables, const std::vector<int>& choices) {
  long total = 0;
  for (size_t i = 0; i < choices.size(); ++i)
    total += tables.slots[i][static_cast<size_t>(choices[i])].cost;
  return total;
}

long knapsack_value(const KnapsackTables& tables, const std::vector<int>& choices) {
  long total = 0;
  for (size_t i = 0; i < choices.size(); ++i)
    total += tables.slots[i][static_cast<size_t>(choices[i])].value;
  return total;
}

KnapsackOptimum brute_force_optimum(const KnapsackTables& tables) {
  unsigned long long space = 1;
  for (const auto& slot : tables.slots) {
    if (slot.empty()) throw std::invalid_argument("knapsack slot with no options");
    space *= slot.size();
    if (space > 1000000ull)
      throw SearchSpaceTooLarge("knapsack space exceeds 10^6 assignments");
  }

  KnapsackOptimum best;
  std::vector<int> current(tables.slots.size(), 0);
  // Odometer enumeration is lexicographic, so the first assignment reaching a
  // given value is the lexicographically smallest tie.
  for (;;) {
    long cost = knapsack_cost(tables, current);
    if (cost <= tables.budget) {
      long value = knapsack_value(tables, current);
      if (!best.feasible_exists || value > best.value) {
        best.feasible_exists = true;
        best.value = value;
        best.choices = current;
      }
    }
    size_t i = current.size();
    while (i > 0) {
      --i;
      if (current[i] + 1 < static_cast<int>(tables.slots[i].size())) {
        ++current[i];
        std::fill(current.begin() + static_cast<long>(i) + 1, current.end(), 0);
        break;
      }
      if (i == 0) return best;
    }
    if (tables.slots.empty()) return best;
  }
}

double synthetic_fitness(const KnapsackTables& tables, long max_value,
                         const std::vector<int>& choices) {
  if (max_value <= 0) return 0.0;
  double score = static_cast<double>(knapsack_value(tables, choices)) /
                 static_cast<double>(max_value);
  return std::clamp(score, 0.0, 1.0);
}

std::variant<json, ParseFailure> KnapsackCodec::normalize_payload(const json& raw) const {
  if (!raw.is_object())
    return ParseFailure{ParseFailureReason::type_mismatch, "knapsack payload must be a JSON object"};
  if (!raw.contains("choices"))
    return ParseFailure{ParseFailureReason::missing_field, "missing required field: choices"};
  if (!raw["choices"].is_array())
    return ParseFailure{ParseFailureReason::type_mismatch, "choices must be an array"};
  if (raw["choices"].size() != tables_.slots.size()) {
    return ParseFailure{ParseFailureReason::type_mismatch,
                        "expected " + std::to_string(tables_.slots.size()) + " choices, got " +
                            std::to_string(raw["choices"].size())};
  }
  std::vector<int> choices;
  for (size_t i = 0; i < raw["choices"].size(); ++i) {
    const auto& c = raw["choices"][i];
    if (!c.is_number_integer())
      return ParseFailure{ParseFailureReason::type_mismatch, "choices must be integers"};
    int idx = c.get<int>();
    if (idx < 0 || idx >= static_cast<int>(tables_.slots[i].size())) {
      return ParseFailure{ParseFailureReason::type_mismatch,
                          "choice " + std::to_string(idx) + " out of range for slot " +
                              std::to_string(i)};
    }
    choices.push_back(idx);
  }
  return knapsack_payload(choices);
}

std::string KnapsackCodec::render_human(const json& payload) const {
  std::vector<int> choices = knapsack_choices(payload);
  std::string out = "Selection plan:\n";
  for (size_t i = 0; i < choices.size(); ++i) {
    const auto& opt = tables_.slots[i][static_cast<size_t>(choices[i])];
    out += "- slot " + std::to_string(i) + ": option " + std::to_string(choices[i]) + " (cost " +
           std::to_string(opt.cost) + ", value " + std::to_string(opt.value) + ")\n";
  }
  out += "Total cost " + std::to_string(knapsack_cost(tables_, choices)) + ", total value " +
         std::to_string(knapsack_value(tables_, choices)) + "\n";
  return out;
}

std::string KnapsackCodec::format_spec() const {
  std::string shape = "[";
  for (size_t i = 0; i < tables_.slots.size(); ++i) {
    if (i) shape += ", ";
    shape += "<0.." + std::to_string(tables_.slots[i].size() - 1) + ">";
  }
  shape += "]";
  return
      "Reply with exactly one machine block of this shape:\n"
      "===GENE-BEGIN kind=knapsack v=1===\n"
      "{\"choices\": " + shape + "}\n"
      "===GENE-END===\n"
      "One option index per slot. Any prose outside the block is ignored.";
}

json KnapsackCodec::structural_crossover(const json& a, const json& b, SeededRng& rng) const {
  std::vector<int> ca = knapsack_choices(a);
  std::vector<int> cb = knapsack_choices(b);
  std::vector<int> child(ca.size());
  for (size_t i = 0; i < ca.size(); ++i) child[i] = rng.below(2) == 0 ? ca[i] : cb[i];
  return knapsack_payload(child);
}

MutationResult KnapsackCodec::structural_mutate(const json& payload, SeededRng& rng) const {
  std::vector<int> choices = knapsack_choices(payload);
  std::vector<size_t> mutable_slots;
  for (size_t i = 0; i < choices.size(); ++i) {
    if (tables_.slots[i].size() >= 2) mutable_slots.push_back(i);
  }
  if (mutable_slots.empty()) return {payload, false};
  size_t slot = mutable_slots[rng.below(mutable_slots.size())];
  size_t option_count = tables_.slots[slot].size();
  // Draw among the other options only, so the slot always changes.
  uint64_t pick = rng.below(option_count - 1);
  int next = static_cast<int>(pick);
  if (next >= choices[slot]) ++next;
  choices[slot] = next;
  return {knapsack_payload(choices), true};
}

std::vector<ConstraintSpec> knapsack_constraints(const KnapsackTables& tables) {
  ConstraintSpec budget;
  budget.id = "budget";
  budget.severity = Severity::hard;
  budget.description = "total cost must not exceed " + std::to_string(tables.budget);
  budget.penalty = ConstraintSpec::kDefaultHardPenalty;
  budget.check = [tables](const Gene& g) {
    std::vector<int> choices = knapsack_choices(g.payload());
    long cost = knapsack_cost(tables, choices);
    std::vector<ConstraintViolation> vs;
    if (cost > tables.budget) {
      ConstraintViolation v;
      v.message = "cost " + std::to_string(cost) + " exceeds budget " +
                  std::to_string(tables.budget);
      v.measured = static_cast<double>(cost);
      v.limit = static_cast<double>(tables.budget);
      vs.push_back(std::move(v));
    }
    return vs;
  };
  return {std::move(budget)};
}

KnapsackTables knapsack_tables_from_json(const json& params) {
  KnapsackTables tables;
  if (!params.contains("budget") || !params["budget"].is_number_integer())
    throw std::invalid_argument("knapsack params need an integer 'budget'");
  tables.budget = params["budget"].get<long>();
  if (!params.contains("slots") || !params["slots"].is_array() || params["slots"].empty())
    throw std::invalid_argument("knapsack params need a non-empty 'slots' array");
  for (const auto& slot : params["slots"]) {
    std::vector<KnapsackOption> options;
    for (const auto& opt : slot) {
      options.push_back({opt.at("cost").get<long>(), opt.at("value").get<long>()});
    }
    if (options.empty()) throw std::invalid_argument("knapsack slot with no options");
    tables.slots.push_back(std::move(options));
  }
  return tables;
}

json knapsack_tables_to_json(const KnapsackTables& tables) {
  json slots = json::array();
  for (const auto& slot : tables.slots) {
    json options = json::array();
    for (const auto& opt : slot) options.push_back({{"cost", opt.cost}, {"value", opt.value}});
    slots.push_back(options);
  }
  return json{{"budget", tables.budget}, {"slots", slots}};
}

}  // namespace evotext::tasks
