#include "evotext/population.hpp"

#include <stdexcept>

namespace evotext {

const char* to_string(Validity v) {
  switch (v) {
    case Validity::unevaluated: return "unevaluated";
    case Validity::valid: return "valid";
    case Validity::hard_violation: return "hard-violation";
    case Validity::parse_failure: return "parse-failure";
  }
  return "unknown";
}

const char* to_string(OperatorKind k) {
  switch (k) {
    case OperatorKind::seed: return "seed";
    case OperatorKind::crossover: return "crossover";
    case OperatorKind::mutation: return "mutation";
    case OperatorKind::elite: return "elite";
    case OperatorKind::repair: return "repair";
  }
  return "unknown";
}

Validity validity_from_string(const std::string& s) {
  if (s == "unevaluated") return Validity::unevaluated;
  if (s == "valid") return Validity::valid;
  if (s == "hard-violation") return Validity::hard_violation;
  if (s == "parse-failure") return Validity::parse_failure;
  throw std::invalid_argument("unknown validity: '" + s + "'");
}

OperatorKind operator_kind_from_string(const std::string& s) {
  if (s == "seed") return OperatorKind::seed;
  if (s == "crossover") return OperatorKind::crossover;
  if (s == "mutation") return OperatorKind::mutation;
  if (s == "elite") return OperatorKind::elite;
  if (s == "repair") return OperatorKind::repair;
  throw std::invalid_argument("unknown operator: '" + s + "'");
}

void apply_report(Individual& ind, FitnessReport report) {
  ind.validity = has_hard_violation(report.violations) ? Validity::hard_violation : Validity::valid;
  ind.fitness = report.effective;
  ind.raw_score = report.raw_score;
  ind.report = std::move(report);
}

bool fitter_than(const Individual& a, const Individual& b) {
  double fa = a.fitness.value_or(-1.0);
  double fb = b.fitness.value_or(-1.0);
  if (fa != fb) return fa > fb;
  return a.id < b.id;
}

bool better_solution(const Individual& a, const Individual& b) {
  bool a_valid = a.validity == Validity::valid;
  bool b_valid = b.validity == Validity::valid;
  if (a_valid != b_valid) return a_valid;
  return fitter_than(a, b);
}

}  // namespace evotext
