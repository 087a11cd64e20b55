#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "evotext/gene.hpp"

namespace evotext {

enum class Severity { hard, soft };

const char* to_string(Severity s);

struct ConstraintViolation {
  std::string constraint_id;
  Severity severity = Severity::hard;
  std::string message;
  std::optional<double> measured;
  std::optional<double> limit;
  // Rubric-score units subtracted when the violation is penalty-scored.
  // Hard violations in filter mode carry 0 here.
  double penalty = 0.0;
};

// One feasibility or preference rule. check() must be pure and deterministic.
struct ConstraintSpec {
  std::string id;
  Severity severity = Severity::hard;
  std::string description;  // rendered into the {constraints} placeholder
  double penalty;           // rubric points subtracted per violation in penalty scoring
  std::function<std::vector<ConstraintViolation>(const Gene&)> check;

  static constexpr double kDefaultHardPenalty = 2.0;
  static constexpr double kDefaultSoftPenalty = 0.5;
};

// Runs every check in registration order and concatenates the violations.
// Each violation is stamped with its spec's severity and penalty. An empty
// result means the gene is fully feasible.
std::vector<ConstraintViolation> validate(const Gene& gene,
                                          const std::vector<ConstraintSpec>& constraints);

inline bool has_hard_violation(const std::vector<ConstraintViolation>& vs) {
  for (const auto& v : vs)
    if (v.severity == Severity::hard) return true;
  return false;
}

// Human-readable bullet list of constraint descriptions; bound to the
// {constraints} placeholder so prompts state the rules up front.
std::string describe_constraints(const std::vector<ConstraintSpec>& constraints);

}  // namespace evotext
