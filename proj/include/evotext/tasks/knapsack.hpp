#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evotext/constraints.hpp"
#include "evotext/gene.hpp"

namespace evotext::tasks {

// Synthetic slot-choice knapsack: one option per slot, maximize total value
// under a cost budget. The optimum is brute-force computable, which makes the
// task an offline oracle for engine convergence.

struct KnapsackOption {
  long cost = 0;
  long value = 0;
};

struct KnapsackTables {
  std::vector<std::vector<KnapsackOption>> slots;  // options per slot
  long budget = 0;
};

std::vector<int> knapsack_choices(const json& payload);
json knapsack_payload(const std::vector<int>& choices);

long knapsack_cost(const KnapsackTables& tables, const std::vector<int>& choices);
long knapsack_value(const KnapsackTables& tables, const std::vector<int>& choices);

struct KnapsackOptimum {
  std::vector<int> choices;
  long value = 0;
  bool feasible_exists = false;
};

struct SearchSpaceTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Exact optimum by exhaustive enumeration; ties resolve to the
// lexicographically smallest assignment. Refuses spaces above 10^6 points.
KnapsackOptimum brute_force_optimum(const KnapsackTables& tables);

// Normalized quality in [0,1]: total value over the best attainable value.
// Budget feasibility is the constraint checker's business, not the score's.
double synthetic_fitness(const KnapsackTables& tables, long max_value,
                         const std::vector<int>& choices);

class KnapsackCodec : public GeneCodec {
 public:
  explicit KnapsackCodec(KnapsackTables tables) : tables_(std::move(tables)) {}

  std::string kind() const override { return "knapsack"; }
  std::variant<json, ParseFailure> normalize_payload(const json& raw) const override;
  std::string render_human(const json& payload) const override;
  std::string format_spec() const override;
  json structural_crossover(const json& a, const json& b, SeededRng& rng) const override;
  MutationResult structural_mutate(const json& payload, SeededRng& rng) const override;

  const KnapsackTables& tables() const { return tables_; }

 private:
  KnapsackTables tables_;
};

// Hard: total cost within budget.
std::vector<ConstraintSpec> knapsack_constraints(const KnapsackTables& tables);

KnapsackTables knapsack_tables_from_json(const json& params);
json knapsack_tables_to_json(const KnapsackTables& tables);

}  // namespace evotext::tasks
