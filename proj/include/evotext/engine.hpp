#pragma once

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evotext/evaluation.hpp"
#include "evotext/population.hpp"
#include "evotext/provider.hpp"
#include "evotext/rng.hpp"
#include "evotext/task.hpp"
#include "evotext/telemetry.hpp"

namespace evotext {

enum class SelectionStrategy { tournament, rank };

const char* to_string(SelectionStrategy s);
SelectionStrategy selection_from_string(const std::string& s);

enum class TerminationReason { max_generations, threshold_reached, stagnation, population_extinct };

const char* to_string(TerminationReason r);
TerminationReason termination_from_string(const std::string& s);

struct EngineConfig {
  int population_size = 12;                           // N >= 2
  int elite_count = 2;                                // 0 <= E < N
  SelectionStrategy selection = SelectionStrategy::tournament;
  int tournament_size = 3;                            // k >= 2, k <= N
  double crossover_rate = 0.9;                        // [0,1]
  double mutation_rate = 0.3;                         // p_m in [0,1]
  int max_generations = 8;                            // G_max >= 1
  std::optional<double> fitness_threshold;            // normalized, [0,1]
  std::optional<int> stagnation_window;               // S >= 1
  int eval_samples = 1;
  ConstraintMode constraint_mode = ConstraintMode::filter;
  ScoreAggregation aggregation = ScoreAggregation::mean;
  int max_parse_retries = 2;                          // R: fresh completions per parse failure
  bool repair_enabled = true;
  bool mutate_elite_clones = false;                   // add mutated copies of elites to offspring
  uint64_t rng_seed = 1;
  int concurrency = 4;                                // engine-side worker cap, >= 1
  int max_output_tokens = 2048;
};

void check_engine_config(const EngineConfig& cfg);  // throws std::invalid_argument

json engine_config_to_json(const EngineConfig& cfg);
EngineConfig engine_config_from_json(const json& j, bool reject_unknown = true);

// Digest over the effective config plus the task identity; resume refuses a
// checkpoint whose digest disagrees.
std::string config_digest(const EngineConfig& cfg, const TaskDefinition& task);

struct GenerationRecord {
  int generation = 0;
  std::optional<double> best;   // normalized fitness over feasible members
  std::optional<double> mean;
  std::optional<double> worst;
  int hard_violations = 0;
  int parse_failures = 0;
  std::map<std::string, int> operator_counts;  // seed/crossover/mutation/elite/repair
  long provider_calls = 0;                     // creation + evaluation calls for this generation
  double wall_ms = 0.0;                        // volatile
};

struct RunResult {
  std::optional<Individual> best;  // highest-preference individual seen across all generations
  std::vector<GenerationRecord> history;
  TerminationReason reason = TerminationReason::max_generations;
  long total_provider_calls = 0;
  Usage total_usage;
  EngineConfig config;
  std::string task_name;
  std::string task_kind;
  bool resumed = false;
  int resumed_from_generation = -1;
};

// Termination rules over completed generation records, in precedence order:
// threshold, then stagnation (no improvement of the running best by more than
// 1e-9 across the last S generations), then max generations. Returns nullopt
// while the run should continue.
std::optional<TerminationReason> check_termination(const std::vector<GenerationRecord>& history,
                                                   const EngineConfig& cfg);

// Raised when an unrecoverable provider failure stops a run. Whatever was
// completed is in `partial`; if a checkpoint exists the run can be resumed.
struct RunAborted : std::runtime_error {
  RunAborted(const std::string& message, RunResult partial, bool checkpoint_written,
             std::string checkpoint_path)
      : std::runtime_error(message),
        partial(std::move(partial)),
        checkpoint_written(checkpoint_written),
        checkpoint_path(std::move(checkpoint_path)) {}
  RunResult partial;
  bool checkpoint_written;
  std::string checkpoint_path;
};

// The evolutionary loop: seed the population with generation prompts, then
// evaluate / select / recombine / mutate with elitist carryover until a
// termination rule fires. All randomness is drawn from one seeded generator in
// a fixed program order before any concurrent work begins, so results do not
// depend on the concurrency limit.
class EvolutionEngine {
 public:
  EvolutionEngine(const TaskDefinition& task, EngineConfig config, Provider& provider,
                  telemetry::Logger& logger = telemetry::Logger::quiet());

  // When set, the full run state is serialized after every completed
  // generation and the run becomes resumable.
  void set_checkpoint_path(std::string path) { checkpoint_path_ = std::move(path); }

  // Provider config echo carried into checkpoints so a resume can rebuild the
  // same backend. Names of env vars only; never secrets.
  void set_provider_config_echo(json echo) { provider_echo_ = std::move(echo); }

  RunResult run();
  RunResult resume_from(const std::string& checkpoint_path);

  // Building blocks, exposed for targeted tests.
  Population initialize_population();
  void evaluate_population(Population& pop);
  Population step_generation(const Population& pop);

  // Indices of the top-E selectable members, fitness descending, ties by id.
  static std::vector<size_t> elite_indices(const Population& pop, int elite_count);

  // Parent pool of `count` indices over selectable members, by k-tournament
  // (winner = fittest of k uniform draws with replacement, ties by lower id)
  // or linear rank weighting (weight = n - rank + 1).
  static std::vector<size_t> select_parent_indices(const Population& pop,
                                                   const EngineConfig& config, size_t count,
                                                   SeededRng& rng);

  long provider_calls_made() const { return calls_total_.load(); }

 private:
  struct OffspringPlan;

  CompletionResponse call_provider(const CompletionRequest& req);
  std::optional<Gene> parse_ladder(const CompletionRequest& req, bool& repaired);
  Individual make_seed_individual(int id, size_t variant);
  Individual make_offspring_individual(const OffspringPlan& plan, const Population& pop);
  void record_generation(const Population& pop, double wall_ms);
  void note_best(const Population& pop);
  void write_checkpoint(bool complete, std::optional<TerminationReason> reason);
  RunResult build_result(TerminationReason reason) const;
  RunResult run_loop(bool resumed_pending_step);
  void step_evaluate_record(Population& pop);

  const TaskDefinition& task_;
  EngineConfig config_;
  Provider& provider_;
  telemetry::Logger& logger_;
  std::string checkpoint_path_;
  json provider_echo_ = json::object();

  SeededRng rng_;
  Population population_;
  std::vector<GenerationRecord> history_;
  std::optional<Individual> best_;
  int next_id_ = 0;
  long pending_creation_calls_ = 0;
  std::atomic<long> calls_total_{0};
  std::atomic<long> usage_input_{0};
  std::atomic<long> usage_output_{0};
  bool resumed_ = false;
  int resumed_from_generation_ = -1;
};

// Runs fn(0..n-1) on up to `limit` workers; rethrows the lowest-index
// exception after all workers finish.
void parallel_for(size_t n, int limit, const std::function<void(size_t)>& fn);

}  // namespace evotext
