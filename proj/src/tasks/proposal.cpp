#include "evotext/tasks/proposal.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace evotext::tasks {

namespace {

// Collapse runs of whitespace and trim the ends, so "Related  Work " still
// matches the canonical heading.
std::string normalize_heading(const std::string& s) {
  std::string out;
  bool in_space = true;
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!in_space && !out.empty()) out += ' ';
      in_space = true;
    } else {
      out += c;
      in_space = false;
    }
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

bool is_canonical_heading(const std::string& h) {
  for (const auto& known : proposal_headings())
    if (known == h) return true;
  return false;
}

}  // namespace

const std::array<std::string, 5>& proposal_headings() {
  static const std::array<std::string, 5> headings = {
      "Introduction", "Related Work", "Methodology", "Experiments", "Conclusion"};
  return headings;
}

ProposalDraft proposal_from_payload(const json& payload) {
  ProposalDraft draft;
  draft.topic = payload["topic"].get<std::string>();
  for (const auto& s : payload["sections"]) {
    draft.sections.push_back({s["heading"].get<std::string>(), s["body"].get<std::string>()});
  }
  return draft;
}

json proposal_to_payload(const ProposalDraft& draft) {
  json sections = json::array();
  for (const auto& s : draft.sections) {
    sections.push_back({{"heading", s.heading}, {"body", s.body}});
  }
  return json{{"topic", draft.topic}, {"sections", sections}};
}

int proposal_word_count(const ProposalDraft& draft) {
  int count = 0;
  for (const auto& s : draft.sections) {
    bool in_word = false;
    for (char c : s.body) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        in_word = false;
      } else if (!in_word) {
        in_word = true;
        ++count;
      }
    }
  }
  return count;
}

std::variant<json, ParseFailure> ProposalCodec::normalize_payload(const json& raw) const {
  if (!raw.is_object())
    return ParseFailure{ParseFailureReason::type_mismatch, "proposal payload must be a JSON object"};
  if (!raw.contains("topic"))
    return ParseFailure{ParseFailureReason::missing_field, "missing required field: topic"};
  if (!raw["topic"].is_string())
    return ParseFailure{ParseFailureReason::type_mismatch, "topic must be a string"};
  if (!raw.contains("sections"))
    return ParseFailure{ParseFailureReason::missing_field, "missing required field: sections"};
  if (!raw["sections"].is_array())
    return ParseFailure{ParseFailureReason::type_mismatch, "sections must be an array"};

  ProposalDraft draft;
  draft.topic = raw["topic"].get<std::string>();
  std::set<std::string> seen;
  for (const auto& s : raw["sections"]) {
    if (!s.is_object())
      return ParseFailure{ParseFailureReason::type_mismatch, "each section must be an object"};
    if (!s.contains("heading"))
      return ParseFailure{ParseFailureReason::missing_field, "missing required field: section heading"};
    if (!s["heading"].is_string())
      return ParseFailure{ParseFailureReason::type_mismatch, "section heading must be a string"};
    std::string heading = normalize_heading(s["heading"].get<std::string>());
    if (!is_canonical_heading(heading)) {
      return ParseFailure{ParseFailureReason::type_mismatch,
                          "unknown section heading: '" + heading + "'"};
    }
    if (!seen.insert(heading).second) {
      return ParseFailure{ParseFailureReason::type_mismatch,
                          "duplicate section heading: '" + heading + "'"};
    }
    if (!s.contains("body"))
      return ParseFailure{ParseFailureReason::missing_field, "missing required field: section body"};
    if (!s["body"].is_string())
      return ParseFailure{ParseFailureReason::type_mismatch, "section body must be a string"};
    draft.sections.push_back({std::move(heading), s["body"].get<std::string>()});
  }
  return proposal_to_payload(draft);
}

std::string ProposalCodec::render_human(const json& payload) const {
  ProposalDraft draft = proposal_from_payload(payload);
  std::string out = "Research Proposal: " + draft.topic + "\n";
  for (const auto& s : draft.sections) {
    out += "\n## " + s.heading + "\n";
    out += s.body;
    if (!s.body.empty() && s.body.back() != '\n') out += '\n';
  }
  return out;
}

std::string ProposalCodec::format_spec() const {
  return
      "Reply with exactly one machine block of this shape:\n"
      "===GENE-BEGIN kind=proposal v=1===\n"
      "{\n"
      "  \"topic\": \"<short topic statement>\",\n"
      "  \"sections\": [\n"
      "    {\"heading\": \"Introduction\", \"body\": \"<prose>\"},\n"
      "    {\"heading\": \"Related Work\", \"body\": \"<prose>\"}\n"
      "  ]\n"
      "}\n"
      "===GENE-END===\n"
      "Valid headings are exactly: Introduction, Related Work, Methodology,\n"
      "Experiments, Conclusion. Each heading may appear at most once. Any prose\n"
      "outside the block is ignored.";
}

json ProposalCodec::structural_crossover(const json& a, const json& b, SeededRng& rng) const {
  ProposalDraft pa = proposal_from_payload(a);
  ProposalDraft pb = proposal_from_payload(b);

  auto find_section = [](const ProposalDraft& d, const std::string& heading) -> const ProposalSection* {
    for (const auto& s : d.sections)
      if (s.heading == heading) return &s;
    return nullptr;
  };

  ProposalDraft child;
  child.topic = pa.topic;
  for (const auto& heading : proposal_headings()) {
    const bool prefer_a = rng.below(2) == 0;
    const ProposalSection* s = find_section(prefer_a ? pa : pb, heading);
    if (!s) s = find_section(prefer_a ? pb : pa, heading);
    if (s) child.sections.push_back(*s);
  }
  return proposal_to_payload(child);
}

MutationResult ProposalCodec::structural_mutate(const json& payload, SeededRng&) const {
  return {payload, false};
}

std::vector<ConstraintSpec> proposal_constraints(int word_cap) {
  std::vector<ConstraintSpec> out;

  ConstraintSpec sections;
  sections.id = "required-sections";
  sections.severity = Severity::hard;
  {
    std::string list;
    for (const auto& h : proposal_headings()) {
      if (!list.empty()) list += ", ";
      list += h;
    }
    sections.description = "the draft must contain all five sections: " + list;
  }
  sections.penalty = ConstraintSpec::kDefaultHardPenalty;
  sections.check = [](const Gene& g) {
    ProposalDraft draft = proposal_from_payload(g.payload());
    std::vector<ConstraintViolation> vs;
    for (const auto& heading : proposal_headings()) {
      bool present = std::any_of(draft.sections.begin(), draft.sections.end(),
                                 [&](const ProposalSection& s) { return s.heading == heading; });
      if (!present) {
        ConstraintViolation v;
        v.message = "missing section: " + heading;
        vs.push_back(std::move(v));
      }
    }
    return vs;
  };
  out.push_back(std::move(sections));

  ConstraintSpec length;
  length.id = "length-cap";
  length.severity = Severity::soft;
  length.description = "the draft should stay within " + std::to_string(word_cap) + " words";
  length.penalty = ConstraintSpec::kDefaultSoftPenalty;
  length.check = [word_cap](const Gene& g) {
    int words = proposal_word_count(proposal_from_payload(g.payload()));
    std::vector<ConstraintViolation> vs;
    if (words > word_cap) {
      ConstraintViolation v;
      v.message = "draft runs to " + std::to_string(words) + " words, cap is " +
                  std::to_string(word_cap);
      v.measured = static_cast<double>(words);
      v.limit = static_cast<double>(word_cap);
      vs.push_back(std::move(v));
    }
    return vs;
  };
  out.push_back(std::move(length));

  return out;
}

}  // namespace evotext::tasks
