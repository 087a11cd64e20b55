#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "evotext/rng.hpp"

namespace evotext {

using json = nlohmann::ordered_json;

// A candidate solution: a task kind plus its canonical structured payload.
// Genes are immutable values; all per-kind behavior lives in a GeneCodec.
class Gene {
 public:
  Gene(std::string kind, json payload)
      : kind_(std::move(kind)), payload_(std::move(payload)) {}

  const std::string& kind() const { return kind_; }
  const json& payload() const { return payload_; }

  friend bool operator==(const Gene& a, const Gene& b) {
    return a.kind_ == b.kind_ && a.payload_ == b.payload_;
  }
  friend bool operator!=(const Gene& a, const Gene& b) { return !(a == b); }

 private:
  std::string kind_;
  json payload_;
};

enum class ParseFailureReason {
  no_block,         // no delimited gene block in the text
  malformed_block,  // block present but markers or JSON are broken
  missing_field,    // required field absent
  type_mismatch,    // field present with the wrong type or an illegal value
};

struct ParseFailure {
  ParseFailureReason reason;
  std::string message;
};

const char* to_string(ParseFailureReason r);

using GeneOrFailure = std::variant<Gene, ParseFailure>;

inline bool parsed_ok(const GeneOrFailure& r) { return std::holds_alternative<Gene>(r); }
inline const Gene& parsed_gene(const GeneOrFailure& r) { return std::get<Gene>(r); }
inline const ParseFailure& parse_failure(const GeneOrFailure& r) {
  return std::get<ParseFailure>(r);
}

struct MutationResult {
  json payload;
  bool changed;  // false when no alternative component exists (no-op)
};

// Per-kind behavior: payload validation/normalization, human rendering, the
// prompt-facing format description, and the model-free structural operators.
// Codecs are stateless with respect to genes and safe to share across threads.
class GeneCodec {
 public:
  virtual ~GeneCodec() = default;

  virtual std::string kind() const = 0;

  // Validates a raw decoded block payload and returns the canonical payload,
  // or the reason it cannot be a gene of this kind.
  virtual std::variant<json, ParseFailure> normalize_payload(const json& raw) const = 0;

  // Human-readable rendering placed above the machine block. May be empty.
  virtual std::string render_human(const json& payload) const = 0;

  // Plain-text description of the block schema, bound to {format_spec} in
  // prompts so the model knows how to emit a parseable candidate.
  virtual std::string format_spec() const = 0;

  // Offspring built purely from components of the two parents. No model call.
  virtual json structural_crossover(const json& a, const json& b, SeededRng& rng) const = 0;

  // Alters exactly one component using kind-specific alternatives, or reports
  // a no-op when none exist.
  virtual MutationResult structural_mutate(const json& payload, SeededRng& rng) const = 0;
};

// --- Delimited machine block ------------------------------------------------
//
// Canonical text carries exactly one block:
//   ===GENE-BEGIN kind=<kind> v=1===
//   { ...payload JSON... }
//   ===GENE-END===
// Parsing scans for the first BEGIN marker and the next END marker; any
// surrounding prose is ignored.

std::string render_block(const std::string& kind, const json& payload);

struct ExtractedBlock {
  std::string kind;
  std::string body;  // raw text between the markers
};

std::variant<ExtractedBlock, ParseFailure> extract_block(const std::string& text);

// Every well-formed block in the text, in order. Used by scripted provider
// rules that transform candidates embedded in a prompt.
std::vector<ExtractedBlock> extract_all_blocks(const std::string& text);

// --- Gene <-> text ------------------------------------------------------------

// Canonical text: optional human rendering followed by the machine block.
// Deterministic: equal genes produce byte-identical text.
std::string to_text(const Gene& gene, const GeneCodec& codec);

// Parses untrusted model output into a gene of the codec's kind. Failures are
// values, not exceptions: they mark an invalid candidate, not a program fault.
GeneOrFailure parse_from_text(const std::string& text, const GeneCodec& codec);

// Content hash of the canonical text, as 16 hex digits. Used for duplicate
// detection and lineage.
std::string fingerprint(const Gene& gene, const GeneCodec& codec);

Gene structural_crossover(const Gene& a, const Gene& b, const GeneCodec& codec, SeededRng& rng);

struct GeneMutation {
  Gene gene;
  bool changed;
};

GeneMutation structural_mutate(const Gene& g, const GeneCodec& codec, SeededRng& rng);

}  // namespace evotext
