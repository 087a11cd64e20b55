#include "evotext/template.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace evotext {

namespace {

std::string read_file_or_throw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError("cannot read template file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Role-mandatory placeholders.
std::vector<std::string> mandatory_for(PromptRole role) {
  switch (role) {
    case PromptRole::crossover: return {"parent_a", "parent_b"};
    case PromptRole::mutation: return {"candidate"};
    case PromptRole::repair: return {"candidate"};
    case PromptRole::evaluation: return {"candidate", "rubric"};
    case PromptRole::generation: return {};
  }
  return {};
}

}  // namespace

const char* to_string(PromptRole r) {
  switch (r) {
    case PromptRole::generation: return "generation";
    case PromptRole::crossover: return "crossover";
    case PromptRole::mutation: return "mutation";
    case PromptRole::evaluation: return "evaluation";
    case PromptRole::repair: return "repair";
  }
  return "unknown";
}

PromptRole prompt_role_from_string(const std::string& s) {
  if (s == "generation") return PromptRole::generation;
  if (s == "crossover") return PromptRole::crossover;
  if (s == "mutation") return PromptRole::mutation;
  if (s == "evaluation") return PromptRole::evaluation;
  if (s == "repair") return PromptRole::repair;
  throw TemplateError("unknown template role: '" + s + "'");
}

const std::set<std::string>& placeholder_vocabulary() {
  static const std::set<std::string> vocab = {
      "task_description", "constraints", "candidate",      "parent_a",
      "parent_b",         "rubric",      "variation_hint", "format_spec",
  };
  return vocab;
}

PromptTemplate make_template(std::string name, PromptRole role, std::string body) {
  PromptTemplate t;
  t.name = std::move(name);
  t.role = role;
  t.body = std::move(body);

  // Scan for placeholders; {{ and }} are escapes.
  for (size_t i = 0; i < t.body.size(); ++i) {
    char c = t.body[i];
    if (c == '{') {
      if (i + 1 < t.body.size() && t.body[i + 1] == '{') {
        ++i;
        continue;
      }
      size_t close = t.body.find('}', i + 1);
      if (close == std::string::npos) {
        throw TemplateError("template '" + t.name + "': unterminated '{' at offset " +
                            std::to_string(i));
      }
      std::string token = t.body.substr(i + 1, close - i - 1);
      if (!placeholder_vocabulary().count(token)) {
        throw TemplateError("template '" + t.name + "': unknown placeholder {" + token + "}");
      }
      t.required_placeholders.insert(token);
      i = close;
    } else if (c == '}') {
      if (i + 1 < t.body.size() && t.body[i + 1] == '}') {
        ++i;
        continue;
      }
      throw TemplateError("template '" + t.name + "': stray '}' at offset " + std::to_string(i) +
                          " (write }} for a literal brace)");
    }
  }

  for (const auto& needed : mandatory_for(role)) {
    if (!t.required_placeholders.count(needed)) {
      throw TemplateError("template '" + t.name + "' (role " + to_string(role) +
                          ") must use the {" + needed + "} placeholder");
    }
  }
  return t;
}

PromptTemplate parse_template_file(const std::string& contents) {
  std::istringstream in(contents);
  std::string name_line, role_line, blank;
  if (!std::getline(in, name_line) || name_line.rfind("name:", 0) != 0)
    throw TemplateError("template file must start with a 'name:' line");
  if (!std::getline(in, role_line) || role_line.rfind("role:", 0) != 0)
    throw TemplateError("template file must have a 'role:' line second");
  if (!std::getline(in, blank) || !blank.empty())
    throw TemplateError("template header must end with one blank line");

  auto strip = [](std::string s) {
    size_t b = s.find_first_not_of(" \t\r");
    size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::string name = strip(name_line.substr(5));
  PromptRole role = prompt_role_from_string(strip(role_line.substr(5)));

  std::string body;
  std::string line;
  while (std::getline(in, line)) {
    body += line;
    body += '\n';
  }
  return make_template(name, role, body);
}

PromptTemplate load_template_file(const std::string& path) {
  return parse_template_file(read_file_or_throw(path));
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  std::string out;
  out.reserve(tmpl.body.size());
  const std::string& body = tmpl.body;
  for (size_t i = 0; i < body.size(); ++i) {
    char c = body[i];
    if (c == '{') {
      if (i + 1 < body.size() && body[i + 1] == '{') {
        out += '{';
        ++i;
        continue;
      }
      size_t close = body.find('}', i + 1);
      std::string token = body.substr(i + 1, close - i - 1);
      auto it = bindings.find(token);
      if (it == bindings.end()) throw MissingBinding(token);
      out += it->second;
      i = close;
    } else if (c == '}' && i + 1 < body.size() && body[i + 1] == '}') {
      out += '}';
      ++i;
    } else {
      out += c;
    }
  }
  return out;
}

void check_template_set(const TemplateSet& set) {
  if (set.generation.empty())
    throw TemplateError("template set '" + set.task + "' has no generation templates");
  auto expect_role = [&](const PromptTemplate& t, PromptRole role) {
    if (t.role != role)
      throw TemplateError("template '" + t.name + "' has role " + to_string(t.role) +
                          ", expected " + to_string(role));
  };
  for (const auto& g : set.generation) expect_role(g, PromptRole::generation);
  expect_role(set.crossover, PromptRole::crossover);
  expect_role(set.mutation, PromptRole::mutation);
  expect_role(set.evaluation, PromptRole::evaluation);
  if (set.repair) expect_role(*set.repair, PromptRole::repair);
}

const PromptTemplate& pick_generation_template(const TemplateSet& set, size_t index) {
  return set.generation[index % set.generation.size()];
}

TemplateSet load_template_set(const std::string& manifest_path, const std::string& task) {
  namespace fs = std::filesystem;
  std::string raw = read_file_or_throw(manifest_path);
  nlohmann::json manifest = nlohmann::json::parse(raw, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object())
    throw TemplateError("template manifest is not a JSON object: " + manifest_path);

  fs::path base = fs::path(manifest_path).parent_path();
  auto load_rel = [&](const std::string& rel) { return load_template_file((base / rel).string()); };

  TemplateSet set;
  set.task = task;
  if (!manifest.contains("generation") || !manifest["generation"].is_array())
    throw TemplateError("template manifest needs a 'generation' array");
  for (const auto& item : manifest["generation"]) set.generation.push_back(load_rel(item.get<std::string>()));
  for (const char* role : {"crossover", "mutation", "evaluation"}) {
    if (!manifest.contains(role) || !manifest[role].is_string())
      throw TemplateError(std::string("template manifest needs a '") + role + "' entry");
  }
  set.crossover = load_rel(manifest["crossover"].get<std::string>());
  set.mutation = load_rel(manifest["mutation"].get<std::string>());
  set.evaluation = load_rel(manifest["evaluation"].get<std::string>());
  if (manifest.contains("repair")) set.repair = load_rel(manifest["repair"].get<std::string>());
  check_template_set(set);
  return set;
}

}  // namespace evotext
