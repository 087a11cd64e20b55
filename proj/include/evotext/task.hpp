#pragma once

#include <memory>
#include <string>
#include <vector>

#include "evotext/constraints.hpp"
#include "evotext/gene.hpp"
#include "evotext/template.hpp"

namespace evotext {

// Everything the engine needs to evolve one kind of document: the codec, the
// feasibility rules, the prompt kit, and the scoring rubric. Immutable after
// registration; all members are safe to share across evaluation workers.
struct TaskDefinition {
  std::string name;
  std::shared_ptr<const GeneCodec> codec;
  std::vector<ConstraintSpec> constraints;
  TemplateSet templates;
  std::string rubric;
  std::string task_description;
  json params;                // kind-specific parameters from the manifest
  std::string manifest_path;  // where this task was loaded from ("" if built in code)

  std::string kind() const { return codec->kind(); }

  // Bindings shared by every prompt for this task.
  Bindings base_bindings() const {
    return {
        {"task_description", task_description},
        {"constraints", describe_constraints(constraints)},
        {"format_spec", codec->format_spec()},
    };
  }
};

// Loads a task from its registration manifest: JSON naming the gene kind, the
// template manifest, the rubric file, and kind-specific constraint parameters.
// Knows the built-in kinds (travel, proposal, knapsack). Throws
// std::runtime_error on unreadable files and std::invalid_argument on bad
// content.
TaskDefinition load_task_manifest(const std::string& path);

}  // namespace evotext
