#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evotext/evaluation.hpp"
#include "evotext/gene.hpp"

namespace evotext {

enum class Validity { unevaluated, valid, hard_violation, parse_failure };

enum class OperatorKind { seed, crossover, mutation, elite, repair };

const char* to_string(Validity v);
const char* to_string(OperatorKind k);
Validity validity_from_string(const std::string& s);
OperatorKind operator_kind_from_string(const std::string& s);

struct Lineage {
  int generation_born = 0;
  std::vector<int> parent_ids;  // 0 for seeds, 2 for crossover, 1 otherwise
  OperatorKind op = OperatorKind::seed;
  bool structural_fallback = false;  // offspring came from the model-free operator
  bool repaired = false;             // parse succeeded only via the repair prompt
};

struct Individual {
  int id = 0;
  std::optional<Gene> gene;  // absent exactly when validity == parse_failure
  std::optional<double> fitness;    // selectable (effective) normalized score
  std::optional<double> raw_score;  // rubric-scale score
  Validity validity = Validity::unevaluated;
  std::optional<FitnessReport> report;
  Lineage lineage;

  bool selectable() const { return fitness.has_value(); }
};

struct Population {
  int generation = 0;
  std::vector<Individual> members;
};

// Apply one fitness report to an individual, deriving validity and the
// selectable fitness per the constraint mode semantics.
void apply_report(Individual& ind, FitnessReport report);

// Ranking used for elites, tournaments, and best tracking: higher fitness
// first, ties broken by lower id.
bool fitter_than(const Individual& a, const Individual& b);

// Preference order for the run's best solution: feasible individuals always
// outrank hard violators, then fitness, then lower id.
bool better_solution(const Individual& a, const Individual& b);

}  // namespace evotext
