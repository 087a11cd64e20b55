#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evotext/constraints.hpp"
#include "evotext/provider.hpp"
#include "evotext/task.hpp"

namespace evotext {

enum class ConstraintMode { filter, penalty };
enum class ScoreAggregation { mean, median };

const char* to_string(ConstraintMode m);
ConstraintMode constraint_mode_from_string(const std::string& s);

struct EvalSettings {
  int eval_samples = 1;
  ConstraintMode mode = ConstraintMode::filter;
  ScoreAggregation aggregation = ScoreAggregation::mean;
  int max_output_tokens = 2048;
};

// Rubric score extracted from model replies, with penalty accounting.
// Normalization maps the 1..10 rubric onto [0,1]. `effective` is the
// selectable fitness: normalized minus penalties, or absent when the
// candidate was filtered out for a hard violation.
struct FitnessReport {
  std::optional<double> raw_score;   // mean/median of extracted samples, in [1,10]
  std::optional<double> normalized;  // (raw - 1) / 9
  std::optional<double> effective;   // after penalties; absent when filtered out
  bool filtered = false;             // hard violation in filter mode; no model call made
  std::string explanation;           // first sample's reply text
  int samples_used = 0;
  std::vector<ConstraintViolation> violations;
};

inline double normalize_score(double raw) { return (raw - 1.0) / 9.0; }

struct ScoreParseFailure {
  std::string message;
};

// Pulls the numeric score out of an evaluation reply.
// Primary rule: the last line of the form `SCORE: <x>` with x numeric; x is
// clamped to [1,10] when it lies in (0,11) and rejected otherwise.
// Fallback (only when no SCORE line exists): the first standalone number in
// [1,10] anywhere in the text.
std::variant<double, ScoreParseFailure> extract_score(const std::string& text);

// Renders the task's evaluation template for one candidate. The template
// carries the instruction to end with a `SCORE: <number>` line.
std::string build_score_prompt(const Gene& gene, const TaskDefinition& task);

struct EvaluationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using CompletionFn = std::function<CompletionResponse(const CompletionRequest&)>;

// Scores one gene: runs the constraint validator, then (unless a hard
// violation short-circuits in filter mode) asks the provider for
// eval_samples scores and aggregates them. Each sample that fails score
// extraction is retried once; the evaluation fails when more than half the
// samples stay unusable.
FitnessReport evaluate_gene(const Gene& gene, const TaskDefinition& task,
                            const EvalSettings& settings, const CompletionFn& complete);

inline FitnessReport evaluate_gene(const Gene& gene, const TaskDefinition& task,
                                   const EvalSettings& settings, Provider& provider) {
  return evaluate_gene(gene, task, settings,
                       [&provider](const CompletionRequest& req) { return provider.complete(req); });
}

}  // namespace evotext
