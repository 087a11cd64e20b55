#include "evotext/constraints.hpp"

namespace evotext {

const char* to_string(Severity s) {
  return s == Severity::hard ? "hard" : "soft";
}

std::vector<ConstraintViolation> validate(const Gene& gene,
                                          const std::vector<ConstraintSpec>& constraints) {
  std::vector<ConstraintViolation> out;
  for (const auto& spec : constraints) {
    auto found = spec.check(gene);
    for (auto& v : found) {
      v.constraint_id = spec.id;
      v.severity = spec.severity;
      v.penalty = spec.penalty;
      out.push_back(std::move(v));
    }
  }
  return out;
}

std::string describe_constraints(const std::vector<ConstraintSpec>& constraints) {
  std::string out;
  for (const auto& spec : constraints) {
    out += "- ";
    out += spec.severity == Severity::hard ? "[required] " : "[preferred] ";
    out += spec.description;
    out += '\n';
  }
  return out;
}

}  // namespace evotext
