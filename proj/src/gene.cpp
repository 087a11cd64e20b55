#include "evotext/gene.hpp"

#include <stdexcept>

namespace evotext {

namespace {

constexpr const char* kBeginPrefix = "===GENE-BEGIN kind=";
constexpr const char* kBeginSuffix = " v=1===";
constexpr const char* kEndMarker = "===GENE-END===";

std::string trim_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

const char* to_string(ParseFailureReason r) {
  switch (r) {
    case ParseFailureReason::no_block: return "no-block";
    case ParseFailureReason::malformed_block: return "malformed-block";
    case ParseFailureReason::missing_field: return "missing-field";
    case ParseFailureReason::type_mismatch: return "type-mismatch";
  }
  return "unknown";
}

std::string render_block(const std::string& kind, const json& payload) {
  std::string out;
  out += kBeginPrefix;
  out += kind;
  out += kBeginSuffix;
  out += '\n';
  out += payload.dump(2);
  out += '\n';
  out += kEndMarker;
  out += '\n';
  return out;
}

std::variant<ExtractedBlock, ParseFailure> extract_block(const std::string& text) {
  size_t pos = 0;
  std::optional<std::string> kind;
  size_t body_start = 0;
  // Scan line by line for the first BEGIN marker.
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = trim_cr(text.substr(pos, eol == std::string::npos ? eol : eol - pos));
    if (line.rfind(kBeginPrefix, 0) == 0) {
      const std::string rest = line.substr(std::string(kBeginPrefix).size());
      const std::string suffix = kBeginSuffix;
      if (rest.size() <= suffix.size() || rest.compare(rest.size() - suffix.size(), suffix.size(), suffix) != 0) {
        return ParseFailure{ParseFailureReason::malformed_block,
                            "BEGIN marker is not of the form '===GENE-BEGIN kind=<kind> v=1==='"};
      }
      kind = rest.substr(0, rest.size() - suffix.size());
      if (kind->empty() || kind->find_first_of(" \t=") != std::string::npos) {
        return ParseFailure{ParseFailureReason::malformed_block, "empty or malformed kind in BEGIN marker"};
      }
      body_start = (eol == std::string::npos) ? text.size() : eol + 1;
      break;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  if (!kind) {
    return ParseFailure{ParseFailureReason::no_block, "no ===GENE-BEGIN=== marker found"};
  }
  // Scan for the next END marker.
  pos = body_start;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = trim_cr(text.substr(pos, eol == std::string::npos ? eol : eol - pos));
    if (line == kEndMarker) {
      size_t body_end = pos;
      std::string body = text.substr(body_start, body_end - body_start);
      return ExtractedBlock{*kind, body};
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  return ParseFailure{ParseFailureReason::malformed_block, "BEGIN marker without a matching ===GENE-END==="};
}

std::vector<ExtractedBlock> extract_all_blocks(const std::string& text) {
  std::vector<ExtractedBlock> out;
  size_t offset = 0;
  while (offset < text.size()) {
    size_t begin_pos = text.find(kBeginPrefix, offset);
    if (begin_pos == std::string::npos) break;
    if (begin_pos != 0 && text[begin_pos - 1] != '\n') {  // markers start a line
      offset = begin_pos + 1;
      continue;
    }
    auto found = extract_block(text.substr(begin_pos));
    if (!std::holds_alternative<ExtractedBlock>(found)) break;
    out.push_back(std::get<ExtractedBlock>(std::move(found)));
    size_t end_pos = text.find(kEndMarker, begin_pos);
    if (end_pos == std::string::npos) break;
    offset = end_pos + std::string(kEndMarker).size();
  }
  return out;
}

std::string to_text(const Gene& gene, const GeneCodec& codec) {
  std::string human = codec.render_human(gene.payload());
  std::string out;
  if (!human.empty()) {
    out = human;
    if (out.back() != '\n') out += '\n';
    out += '\n';
  }
  out += render_block(gene.kind(), gene.payload());
  return out;
}

GeneOrFailure parse_from_text(const std::string& text, const GeneCodec& codec) {
  auto extracted = extract_block(text);
  if (std::holds_alternative<ParseFailure>(extracted)) {
    return std::get<ParseFailure>(extracted);
  }
  const auto& block = std::get<ExtractedBlock>(extracted);
  if (block.kind != codec.kind()) {
    return ParseFailure{ParseFailureReason::type_mismatch,
                        "block kind '" + block.kind + "' does not match task kind '" + codec.kind() + "'"};
  }
  json raw = json::parse(block.body, nullptr, /*allow_exceptions=*/false);
  if (raw.is_discarded()) {
    return ParseFailure{ParseFailureReason::malformed_block, "block body is not valid JSON"};
  }
  auto normalized = codec.normalize_payload(raw);
  if (std::holds_alternative<ParseFailure>(normalized)) {
    return std::get<ParseFailure>(normalized);
  }
  return Gene(codec.kind(), std::get<json>(std::move(normalized)));
}

std::string fingerprint(const Gene& gene, const GeneCodec& codec) {
  return hash_hex(fnv1a64(to_text(gene, codec)));
}

Gene structural_crossover(const Gene& a, const Gene& b, const GeneCodec& codec, SeededRng& rng) {
  if (a.kind() != b.kind()) {
    throw std::invalid_argument("structural_crossover: incompatible kinds '" + a.kind() + "' and '" +
                                b.kind() + "'");
  }
  return Gene(codec.kind(), codec.structural_crossover(a.payload(), b.payload(), rng));
}

GeneMutation structural_mutate(const Gene& g, const GeneCodec& codec, SeededRng& rng) {
  MutationResult r = codec.structural_mutate(g.payload(), rng);
  return GeneMutation{Gene(codec.kind(), std::move(r.payload)), r.changed};
}

}  // namespace evotext
