#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace evotext {

enum class PromptRole { generation, crossover, mutation, evaluation, repair };

const char* to_string(PromptRole r);
PromptRole prompt_role_from_string(const std::string& s);

// A named prompt body with {placeholder} tokens. Templates are validated at
// load time: every token must come from the fixed placeholder vocabulary and
// role-mandatory placeholders must be present. Literal braces are written as
// {{ and }}.
struct PromptTemplate {
  std::string name;
  PromptRole role = PromptRole::generation;
  std::string body;
  std::set<std::string> required_placeholders;  // derived by scanning body
};

// Thrown for template definition problems (unknown token, missing mandatory
// placeholder, malformed file). Never thrown by render on validated inputs
// with complete bindings.
struct TemplateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by render when a required placeholder has no binding.
struct MissingBinding : TemplateError {
  explicit MissingBinding(const std::string& placeholder)
      : TemplateError("missing binding for placeholder {" + placeholder + "}"),
        placeholder(placeholder) {}
  std::string placeholder;
};

// The full placeholder vocabulary. Any other token is rejected at load.
const std::set<std::string>& placeholder_vocabulary();

// Validates the body and derives required_placeholders. Throws TemplateError.
PromptTemplate make_template(std::string name, PromptRole role, std::string body);

// Parses the on-disk template format: a `name:` line, a `role:` line, one
// blank line, then the body.
PromptTemplate parse_template_file(const std::string& contents);
PromptTemplate load_template_file(const std::string& path);

using Bindings = std::map<std::string, std::string>;

// Substitutes every placeholder. Bound values are inserted verbatim and never
// rescanned. Pure: same template and bindings give identical output.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

// The per-task prompt kit: one or more generation templates (seeding cycles
// through them), exactly one crossover/mutation/evaluation template, and an
// optional repair template.
struct TemplateSet {
  std::string task;
  std::vector<PromptTemplate> generation;
  PromptTemplate crossover;
  PromptTemplate mutation;
  PromptTemplate evaluation;
  std::optional<PromptTemplate> repair;
};

void check_template_set(const TemplateSet& set);  // throws TemplateError

// Deterministic round-robin over the generation templates: index mod size.
const PromptTemplate& pick_generation_template(const TemplateSet& set, size_t index);

// Loads a template set from a manifest JSON file that names one template file
// per role (a list for "generation"), paths relative to the manifest.
TemplateSet load_template_set(const std::string& manifest_path, const std::string& task);

}  // namespace evotext
