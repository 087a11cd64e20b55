#pragma once

#include <array>
#include <string>
#include <vector>

#include "evotext/constraints.hpp"
#include "evotext/gene.hpp"

namespace evotext::tasks {

// The five mandatory proposal sections, in canonical order.
const std::array<std::string, 5>& proposal_headings();

struct ProposalSection {
  std::string heading;
  std::string body;
};

struct ProposalDraft {
  std::string topic;
  std::vector<ProposalSection> sections;  // document order; headings unique
};

ProposalDraft proposal_from_payload(const json& payload);
json proposal_to_payload(const ProposalDraft& draft);

// Whitespace-token count over all section bodies.
int proposal_word_count(const ProposalDraft& draft);

class ProposalCodec : public GeneCodec {
 public:
  std::string kind() const override { return "proposal"; }
  std::variant<json, ParseFailure> normalize_payload(const json& raw) const override;
  std::string render_human(const json& payload) const override;
  std::string format_spec() const override;
  json structural_crossover(const json& a, const json& b, SeededRng& rng) const override;
  // Prose sections have no alternatives pool, so this is always a flagged no-op.
  MutationResult structural_mutate(const json& payload, SeededRng& rng) const override;
};

// Hard: every mandatory heading present. Soft: word count within the cap.
std::vector<ConstraintSpec> proposal_constraints(int word_cap);

}  // namespace evotext::tasks
