#include "evotext/engine.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <thread>

#include "evotext/checkpoint.hpp"
#include "evotext/tasks/scripted.hpp"

namespace evotext {

namespace {

constexpr double kVariationTemperature = 0.9;  // generation / crossover / mutation
constexpr double kRepairTemperature = 0.0;
constexpr double kStagnationEpsilon = 1e-9;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

const char* to_string(SelectionStrategy s) {
  return s == SelectionStrategy::tournament ? "tournament" : "rank";
}

SelectionStrategy selection_from_string(const std::string& s) {
  if (s == "tournament") return SelectionStrategy::tournament;
  if (s == "rank") return SelectionStrategy::rank;
  throw std::invalid_argument("unknown selection strategy: '" + s + "'");
}

const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::max_generations: return "max_generations";
    case TerminationReason::threshold_reached: return "threshold_reached";
    case TerminationReason::stagnation: return "stagnation";
    case TerminationReason::population_extinct: return "population_extinct";
  }
  return "unknown";
}

TerminationReason termination_from_string(const std::string& s) {
  if (s == "max_generations") return TerminationReason::max_generations;
  if (s == "threshold_reached") return TerminationReason::threshold_reached;
  if (s == "stagnation") return TerminationReason::stagnation;
  if (s == "population_extinct") return TerminationReason::population_extinct;
  throw std::invalid_argument("unknown termination reason: '" + s + "'");
}

void check_engine_config(const EngineConfig& cfg) {
  if (cfg.population_size < 2) throw std::invalid_argument("population_size must be >= 2");
  if (cfg.elite_count < 0 || cfg.elite_count >= cfg.population_size)
    throw std::invalid_argument("elite_count must satisfy 0 <= E < population_size");
  if (cfg.selection == SelectionStrategy::tournament &&
      (cfg.tournament_size < 2 || cfg.tournament_size > cfg.population_size))
    throw std::invalid_argument("tournament_size must satisfy 2 <= k <= population_size");
  if (cfg.crossover_rate < 0.0 || cfg.crossover_rate > 1.0)
    throw std::invalid_argument("crossover_rate must be in [0,1]");
  if (cfg.mutation_rate < 0.0 || cfg.mutation_rate > 1.0)
    throw std::invalid_argument("mutation_rate must be in [0,1]");
  if (cfg.max_generations < 1) throw std::invalid_argument("max_generations must be >= 1");
  if (cfg.fitness_threshold && (*cfg.fitness_threshold < 0.0 || *cfg.fitness_threshold > 1.0))
    throw std::invalid_argument("fitness_threshold must be a normalized score in [0,1]");
  if (cfg.stagnation_window && *cfg.stagnation_window < 1)
    throw std::invalid_argument("stagnation_window must be >= 1");
  if (cfg.eval_samples < 1) throw std::invalid_argument("eval_samples must be >= 1");
  if (cfg.max_parse_retries < 0) throw std::invalid_argument("max_parse_retries must be >= 0");
  if (cfg.concurrency < 1) throw std::invalid_argument("concurrency must be >= 1");
  if (cfg.max_output_tokens < 1) throw std::invalid_argument("max_output_tokens must be >= 1");
}

json engine_config_to_json(const EngineConfig& cfg) {
  return json{{"population_size", cfg.population_size},
              {"elite_count", cfg.elite_count},
              {"selection", to_string(cfg.selection)},
              {"tournament_size", cfg.tournament_size},
              {"crossover_rate", cfg.crossover_rate},
              {"mutation_rate", cfg.mutation_rate},
              {"max_generations", cfg.max_generations},
              {"fitness_threshold",
               cfg.fitness_threshold ? json(*cfg.fitness_threshold) : json(nullptr)},
              {"stagnation_window",
               cfg.stagnation_window ? json(*cfg.stagnation_window) : json(nullptr)},
              {"eval_samples", cfg.eval_samples},
              {"constraint_mode", to_string(cfg.constraint_mode)},
              {"aggregation", cfg.aggregation == ScoreAggregation::mean ? "mean" : "median"},
              {"max_parse_retries", cfg.max_parse_retries},
              {"repair_enabled", cfg.repair_enabled},
              {"mutate_elite_clones", cfg.mutate_elite_clones},
              {"rng_seed", cfg.rng_seed},
              {"concurrency", cfg.concurrency},
              {"max_output_tokens", cfg.max_output_tokens}};
}

EngineConfig engine_config_from_json(const json& j, bool reject_unknown) {
  static const std::set<std::string> known = {
      "population_size",  "elite_count",       "selection",
      "tournament_size",  "crossover_rate",    "mutation_rate",
      "max_generations",  "fitness_threshold", "stagnation_window",
      "eval_samples",     "constraint_mode",   "aggregation",
      "max_parse_retries", "repair_enabled",   "mutate_elite_clones",
      "rng_seed",         "concurrency",       "max_output_tokens"};
  if (!j.is_object()) throw std::invalid_argument("engine config must be a JSON object");
  if (reject_unknown) {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw std::invalid_argument("unknown engine config key: '" + key + "'");
    }
  }
  EngineConfig cfg;
  cfg.population_size = j.value("population_size", cfg.population_size);
  cfg.elite_count = j.value("elite_count", cfg.elite_count);
  if (j.contains("selection")) cfg.selection = selection_from_string(j["selection"].get<std::string>());
  cfg.tournament_size = j.value("tournament_size", cfg.tournament_size);
  cfg.crossover_rate = j.value("crossover_rate", cfg.crossover_rate);
  cfg.mutation_rate = j.value("mutation_rate", cfg.mutation_rate);
  cfg.max_generations = j.value("max_generations", cfg.max_generations);
  if (j.contains("fitness_threshold") && !j["fitness_threshold"].is_null())
    cfg.fitness_threshold = j["fitness_threshold"].get<double>();
  if (j.contains("stagnation_window") && !j["stagnation_window"].is_null())
    cfg.stagnation_window = j["stagnation_window"].get<int>();
  cfg.eval_samples = j.value("eval_samples", cfg.eval_samples);
  if (j.contains("constraint_mode"))
    cfg.constraint_mode = constraint_mode_from_string(j["constraint_mode"].get<std::string>());
  if (j.contains("aggregation")) {
    const std::string agg = j["aggregation"].get<std::string>();
    if (agg == "mean") cfg.aggregation = ScoreAggregation::mean;
    else if (agg == "median") cfg.aggregation = ScoreAggregation::median;
    else throw std::invalid_argument("aggregation must be 'mean' or 'median'");
  }
  cfg.max_parse_retries = j.value("max_parse_retries", cfg.max_parse_retries);
  cfg.repair_enabled = j.value("repair_enabled", cfg.repair_enabled);
  cfg.mutate_elite_clones = j.value("mutate_elite_clones", cfg.mutate_elite_clones);
  cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
  cfg.concurrency = j.value("concurrency", cfg.concurrency);
  cfg.max_output_tokens = j.value("max_output_tokens", cfg.max_output_tokens);
  return cfg;
}

std::string config_digest(const EngineConfig& cfg, const TaskDefinition& task) {
  const std::string blob =
      engine_config_to_json(cfg).dump() + "|" + task.kind() + "|" + task.name;
  return hash_hex(fnv1a64(blob));
}

std::optional<TerminationReason> check_termination(const std::vector<GenerationRecord>& history,
                                                   const EngineConfig& cfg) {
  if (history.empty()) return std::nullopt;

  // Running best-so-far series over per-generation bests.
  std::vector<std::optional<double>> best_so_far;
  std::optional<double> running;
  for (const auto& rec : history) {
    if (rec.best && (!running || *rec.best > *running)) running = rec.best;
    best_so_far.push_back(running);
  }

  const size_t n = history.size();
  if (cfg.fitness_threshold && history.back().best &&
      *history.back().best >= *cfg.fitness_threshold) {
    return TerminationReason::threshold_reached;
  }
  if (cfg.stagnation_window) {
    const size_t window = static_cast<size_t>(*cfg.stagnation_window);
    if (n >= window + 1) {
      const auto& cur = best_so_far[n - 1];
      const auto& old = best_so_far[n - 1 - window];
      const bool improved = cur && (!old || *cur - *old > kStagnationEpsilon);
      if (!improved) return TerminationReason::stagnation;
    }
  }
  if (n >= static_cast<size_t>(cfg.max_generations)) return TerminationReason::max_generations;
  return std::nullopt;
}

void parallel_for(size_t n, int limit, const std::function<void(size_t)>& fn) {
  if (n == 0) return;
  const size_t workers = std::min<size_t>(static_cast<size_t>(std::max(1, limit)), n);
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  // Lowest-index error wins so failures are deterministic.
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// --- engine ----------------------------------------------------------------------

struct EvolutionEngine::OffspringPlan {
  int id = 0;
  int generation_born = 0;
  bool elite_clone = false;
  size_t clone_source = 0;
  size_t parent_a = 0;
  size_t parent_b = 0;
  bool do_crossover = false;
  bool do_mutation = false;
  uint64_t child_seed = 0;
};

EvolutionEngine::EvolutionEngine(const TaskDefinition& task, EngineConfig config,
                                 Provider& provider, telemetry::Logger& logger)
    : task_(task),
      config_(config),
      provider_(provider),
      logger_(logger),
      rng_(config.rng_seed) {
  check_engine_config(config_);
  check_template_set(task_.templates);
}

CompletionResponse EvolutionEngine::call_provider(const CompletionRequest& req) {
  CompletionResponse resp = provider_.complete(req);
  calls_total_.fetch_add(1);
  usage_input_.fetch_add(resp.usage.input_tokens);
  usage_output_.fetch_add(resp.usage.output_tokens);
  logger_.emit({telemetry::LogLevel::trace,
                "provider-call",
                population_.generation,
                std::nullopt,
                {{"purpose", to_string(req.purpose)},
                 {"backend", to_string(resp.backend)},
                 {"latency_ms", resp.latency_ms}}});
  return resp;
}

std::optional<Gene> EvolutionEngine::parse_ladder(const CompletionRequest& req, bool& repaired) {
  repaired = false;
  std::string last_text;
  for (int attempt = 0; attempt <= config_.max_parse_retries; ++attempt) {
    CompletionResponse resp = call_provider(req);
    last_text = resp.text;
    auto parsed = parse_from_text(resp.text, *task_.codec);
    if (parsed_ok(parsed)) return parsed_gene(parsed);
  }
  if (config_.repair_enabled && task_.templates.repair) {
    Bindings bindings = task_.base_bindings();
    bindings["rubric"] = task_.rubric;
    bindings["variation_hint"] = "";
    bindings["candidate"] = last_text;
    CompletionRequest repair_req;
    repair_req.messages = {{"user", render(*task_.templates.repair, bindings)}};
    repair_req.temperature = kRepairTemperature;
    repair_req.max_output_tokens = config_.max_output_tokens;
    repair_req.purpose = Purpose::repair;
    CompletionResponse resp = call_provider(repair_req);
    auto parsed = parse_from_text(resp.text, *task_.codec);
    if (parsed_ok(parsed)) {
      repaired = true;
      return parsed_gene(parsed);
    }
  }
  return std::nullopt;
}

Individual EvolutionEngine::make_seed_individual(int id, size_t variant) {
  Bindings bindings = task_.base_bindings();
  bindings["rubric"] = task_.rubric;
  bindings["variation_hint"] = tasks::variation_hint_for(variant);
  const PromptTemplate& tmpl = pick_generation_template(task_.templates, variant);

  CompletionRequest req;
  req.messages = {{"user", render(tmpl, bindings)}};
  req.temperature = kVariationTemperature;
  req.max_output_tokens = config_.max_output_tokens;
  req.purpose = Purpose::generation;

  Individual ind;
  ind.id = id;
  ind.lineage.generation_born = 0;
  ind.lineage.op = OperatorKind::seed;

  bool repaired = false;
  if (auto gene = parse_ladder(req, repaired)) {
    ind.gene = std::move(*gene);
    ind.lineage.repaired = repaired;
  } else {
    ind.validity = Validity::parse_failure;
  }
  return ind;
}

Population EvolutionEngine::initialize_population() {
  Population pop;
  pop.generation = 0;
  pop.members.resize(static_cast<size_t>(config_.population_size));
  next_id_ = config_.population_size;
  parallel_for(pop.members.size(), config_.concurrency, [&](size_t i) {
    pop.members[i] = make_seed_individual(static_cast<int>(i), i);
  });
  return pop;
}

void EvolutionEngine::evaluate_population(Population& pop) {
  std::vector<size_t> jobs;
  for (size_t i = 0; i < pop.members.size(); ++i) {
    const Individual& m = pop.members[i];
    if (m.validity == Validity::unevaluated && m.gene) jobs.push_back(i);
  }
  EvalSettings settings{config_.eval_samples, config_.constraint_mode, config_.aggregation,
                        config_.max_output_tokens};
  CompletionFn completer = [this](const CompletionRequest& req) { return call_provider(req); };
  parallel_for(jobs.size(), config_.concurrency, [&](size_t j) {
    Individual& ind = pop.members[jobs[j]];
    try {
      FitnessReport report = evaluate_gene(*ind.gene, task_, settings, completer);
      apply_report(ind, std::move(report));
      for (const auto& v : ind.report->violations) {
        logger_.emit({telemetry::LogLevel::debug,
                      "constraint-violation",
                      pop.generation,
                      ind.id,
                      {{"constraint", v.constraint_id},
                       {"severity", to_string(v.severity)},
                       {"message", v.message}}});
      }
      logger_.emit({telemetry::LogLevel::debug,
                    "evaluation-done",
                    pop.generation,
                    ind.id,
                    {{"validity", to_string(ind.validity)},
                     {"fitness", ind.fitness ? json(*ind.fitness) : json(nullptr)}}});
    } catch (const EvaluationFailure& e) {
      logger_.emit({telemetry::LogLevel::warn,
                    "evaluation-failed",
                    pop.generation,
                    ind.id,
                    {{"error", e.what()}}});
    }
  });
}

std::vector<size_t> EvolutionEngine::elite_indices(const Population& pop, int elite_count) {
  std::vector<size_t> selectable;
  for (size_t i = 0; i < pop.members.size(); ++i) {
    if (pop.members[i].selectable()) selectable.push_back(i);
  }
  std::sort(selectable.begin(), selectable.end(), [&](size_t a, size_t b) {
    return fitter_than(pop.members[a], pop.members[b]);
  });
  if (selectable.size() > static_cast<size_t>(elite_count)) selectable.resize(elite_count);
  return selectable;
}

std::vector<size_t> EvolutionEngine::select_parent_indices(const Population& pop,
                                                           const EngineConfig& config, size_t count,
                                                           SeededRng& rng) {
  std::vector<size_t> selectable;
  for (size_t i = 0; i < pop.members.size(); ++i) {
    if (pop.members[i].selectable()) selectable.push_back(i);
  }
  if (selectable.empty()) throw std::logic_error("select_parent_indices: no selectable members");

  std::vector<size_t> pool;
  pool.reserve(count);
  if (config.selection == SelectionStrategy::tournament) {
    for (size_t slot = 0; slot < count; ++slot) {
      size_t best = selectable[rng.below(selectable.size())];
      for (int k = 1; k < config.tournament_size; ++k) {
        size_t challenger = selectable[rng.below(selectable.size())];
        if (fitter_than(pop.members[challenger], pop.members[best])) best = challenger;
      }
      pool.push_back(best);
    }
  } else {
    // Linear rank weights: best rank gets n, worst gets 1.
    std::vector<size_t> ranked = selectable;
    std::sort(ranked.begin(), ranked.end(), [&](size_t a, size_t b) {
      return fitter_than(pop.members[a], pop.members[b]);
    });
    const uint64_t n = ranked.size();
    const uint64_t total = n * (n + 1) / 2;
    for (size_t slot = 0; slot < count; ++slot) {
      uint64_t draw = rng.below(total);
      uint64_t cumulative = 0;
      for (size_t r = 0; r < ranked.size(); ++r) {
        cumulative += n - r;
        if (draw < cumulative) {
          pool.push_back(ranked[r]);
          break;
        }
      }
    }
  }
  return pool;
}

Individual EvolutionEngine::make_offspring_individual(const OffspringPlan& plan,
                                                      const Population& pop) {
  SeededRng child_rng(plan.child_seed);
  Individual out;
  out.id = plan.id;
  out.lineage.generation_born = plan.generation_born;

  Bindings base = task_.base_bindings();
  base["rubric"] = task_.rubric;
  // Distinct per offspring so identical candidates still yield distinct
  // variation prompts (and so replay digests stay unique).
  base["variation_hint"] = tasks::variation_hint_for(static_cast<size_t>(plan.id));

  auto llm_variation = [&](Purpose purpose, const PromptTemplate& tmpl,
                           Bindings bindings) -> std::optional<Gene> {
    CompletionRequest req;
    req.messages = {{"user", render(tmpl, bindings)}};
    req.temperature = kVariationTemperature;
    req.max_output_tokens = config_.max_output_tokens;
    req.purpose = purpose;
    bool repaired = false;
    auto gene = parse_ladder(req, repaired);
    if (repaired) out.lineage.repaired = true;
    return gene;
  };

  auto mutate_gene = [&](const Gene& current) -> Gene {
    Bindings bindings = base;
    bindings["candidate"] = to_text(current, *task_.codec);
    if (auto gene = llm_variation(Purpose::mutation, task_.templates.mutation, bindings)) {
      return *gene;
    }
    out.lineage.structural_fallback = true;
    return structural_mutate(current, *task_.codec, child_rng).gene;
  };

  if (plan.elite_clone) {
    const Individual& src = pop.members[plan.clone_source];
    out.gene = mutate_gene(*src.gene);
    out.lineage.op = OperatorKind::mutation;
    out.lineage.parent_ids = {src.id};
    return out;
  }

  const Individual& a = pop.members[plan.parent_a];
  const Individual& b = pop.members[plan.parent_b];
  const Individual& fitter = fitter_than(a, b) ? a : b;

  std::optional<Gene> current;
  if (plan.do_crossover) {
    Bindings bindings = base;
    bindings["parent_a"] = to_text(*a.gene, *task_.codec);
    bindings["parent_b"] = to_text(*b.gene, *task_.codec);
    current = llm_variation(Purpose::crossover, task_.templates.crossover, bindings);
    if (!current) {
      out.lineage.structural_fallback = true;
      SeededRng cross_rng(child_rng.fork_seed());
      current = structural_crossover(*a.gene, *b.gene, *task_.codec, cross_rng);
    }
    out.lineage.op = OperatorKind::crossover;
    out.lineage.parent_ids = {a.id, b.id};
  } else {
    current = *fitter.gene;
  }

  if (plan.do_mutation) {
    current = mutate_gene(*current);
    if (!plan.do_crossover) {
      out.lineage.op = OperatorKind::mutation;
      out.lineage.parent_ids = {fitter.id};
    }
  }

  if (!plan.do_crossover && !plan.do_mutation) {
    // Copy of the fitter parent: recorded as a degenerate crossover of the pair.
    out.lineage.op = OperatorKind::crossover;
    out.lineage.parent_ids = {a.id, b.id};
  }

  out.gene = std::move(*current);
  return out;
}

Population EvolutionEngine::step_generation(const Population& pop) {
  const int next_gen = pop.generation + 1;
  const std::vector<size_t> elites = elite_indices(pop, config_.elite_count);
  const size_t offspring_slots = static_cast<size_t>(config_.population_size) - elites.size();

  size_t clone_jobs = 0;
  if (config_.mutate_elite_clones) clone_jobs = std::min(elites.size(), offspring_slots);
  const size_t pair_slots = offspring_slots - clone_jobs;

  std::vector<size_t> pool;
  if (pair_slots > 0) pool = select_parent_indices(pop, config_, pair_slots, rng_);

  Population next;
  next.generation = next_gen;
  next.members.reserve(static_cast<size_t>(config_.population_size));

  // Elite carryover: gene and fitness retained, never re-scored.
  for (size_t idx : elites) {
    const Individual& src = pop.members[idx];
    Individual elite;
    elite.id = next_id_++;
    elite.gene = src.gene;
    elite.fitness = src.fitness;
    elite.raw_score = src.raw_score;
    elite.validity = src.validity;
    elite.report = src.report;
    elite.lineage.generation_born = next_gen;
    elite.lineage.parent_ids = {src.id};
    elite.lineage.op = OperatorKind::elite;
    next.members.push_back(std::move(elite));
  }

  // Draw the whole offspring plan before any concurrent work.
  std::vector<OffspringPlan> plans;
  plans.reserve(offspring_slots);
  for (size_t c = 0; c < clone_jobs; ++c) {
    OffspringPlan plan;
    plan.id = next_id_++;
    plan.generation_born = next_gen;
    plan.elite_clone = true;
    plan.clone_source = elites[c];
    plan.child_seed = rng_.fork_seed();
    plans.push_back(plan);
  }
  for (size_t j = 0; j < pair_slots; ++j) {
    OffspringPlan plan;
    plan.id = next_id_++;
    plan.generation_born = next_gen;
    plan.parent_a = pool[(2 * j) % pool.size()];
    plan.parent_b = pool[(2 * j + 1) % pool.size()];
    plan.do_crossover = rng_.chance(config_.crossover_rate);
    plan.do_mutation = rng_.chance(config_.mutation_rate);
    plan.child_seed = rng_.fork_seed();
    plans.push_back(plan);
  }

  std::vector<Individual> offspring(plans.size());
  parallel_for(plans.size(), config_.concurrency, [&](size_t i) {
    offspring[i] = make_offspring_individual(plans[i], pop);
  });
  for (auto& ind : offspring) {
    logger_.emit({telemetry::LogLevel::debug,
                  "offspring-created",
                  next_gen,
                  ind.id,
                  {{"operator", to_string(ind.lineage.op)},
                   {"parents", ind.lineage.parent_ids},
                   {"structural_fallback", ind.lineage.structural_fallback},
                   {"repaired", ind.lineage.repaired}}});
    next.members.push_back(std::move(ind));
  }
  return next;
}

void EvolutionEngine::record_generation(const Population& pop, double wall_ms) {
  GenerationRecord rec;
  rec.generation = pop.generation;
  rec.operator_counts = {{"seed", 0}, {"crossover", 0}, {"mutation", 0}, {"elite", 0}, {"repair", 0}};

  // Duplicates are allowed to stay in the population; telemetry counts them.
  std::map<std::string, int> fingerprints;
  int duplicates = 0;
  for (const auto& m : pop.members) {
    if (m.gene && ++fingerprints[fingerprint(*m.gene, *task_.codec)] > 1) ++duplicates;
  }

  double sum = 0.0;
  int valid_count = 0;
  for (const auto& m : pop.members) {
    rec.operator_counts[to_string(m.lineage.op)] += 1;
    if (m.lineage.repaired) rec.operator_counts["repair"] += 1;
    if (m.validity == Validity::parse_failure) rec.parse_failures += 1;
    if (m.validity == Validity::hard_violation) rec.hard_violations += 1;
    if (m.validity == Validity::valid && m.fitness) {
      ++valid_count;
      sum += *m.fitness;
      if (!rec.best || *m.fitness > *rec.best) rec.best = *m.fitness;
      if (!rec.worst || *m.fitness < *rec.worst) rec.worst = *m.fitness;
    }
  }
  if (valid_count > 0) rec.mean = sum / valid_count;
  rec.wall_ms = wall_ms;
  history_.push_back(rec);

  logger_.emit({telemetry::LogLevel::info,
                "generation-end",
                pop.generation,
                std::nullopt,
                {{"best", rec.best ? json(*rec.best) : json(nullptr)},
                 {"mean", rec.mean ? json(*rec.mean) : json(nullptr)},
                 {"worst", rec.worst ? json(*rec.worst) : json(nullptr)},
                 {"hard_violations", rec.hard_violations},
                 {"parse_failures", rec.parse_failures},
                 {"duplicate_fingerprints", duplicates}}});
  if (best_ && best_->gene) {
    logger_.emit({telemetry::LogLevel::debug,
                  "best-snippet",
                  pop.generation,
                  best_->id,
                  {{"text", telemetry::snippet(to_text(*best_->gene, *task_.codec))}}});
  }
}

void EvolutionEngine::note_best(const Population& pop) {
  for (const auto& m : pop.members) {
    if (m.validity != Validity::valid && m.validity != Validity::hard_violation) continue;
    if (!m.report) continue;
    if (!best_ || better_solution(m, *best_)) best_ = m;
  }
}

void EvolutionEngine::write_checkpoint(bool complete, std::optional<TerminationReason> reason) {
  if (checkpoint_path_.empty()) return;
  Checkpoint cp;
  cp.config = config_;
  cp.config_digest = config_digest(config_, task_);
  cp.provider_config = provider_echo_;
  cp.task_manifest = task_.manifest_path;
  cp.task_kind = task_.kind();
  cp.task_name = task_.name;
  cp.complete = complete;
  cp.reason = reason;
  cp.rng_state = rng_.save_state();
  cp.next_id = next_id_;
  cp.population = population_;
  cp.history = history_;
  cp.best = best_;
  cp.pending_creation_calls = pending_creation_calls_;
  cp.total_calls = calls_total_.load();
  cp.usage = {usage_input_.load(), usage_output_.load()};
  cp.resumed_from = resumed_from_generation_;
  save_checkpoint_file(checkpoint_path_, cp, *task_.codec);
  logger_.emit({telemetry::LogLevel::debug,
                "checkpoint",
                population_.generation,
                std::nullopt,
                {{"path", checkpoint_path_}, {"complete", complete}}});
}

RunResult EvolutionEngine::build_result(TerminationReason reason) const {
  RunResult result;
  result.best = best_;
  result.history = history_;
  result.reason = reason;
  result.total_provider_calls = calls_total_.load();
  result.total_usage = {usage_input_.load(), usage_output_.load()};
  result.config = config_;
  result.task_name = task_.name;
  result.task_kind = task_.kind();
  result.resumed = resumed_;
  result.resumed_from_generation = resumed_from_generation_;
  return result;
}

void EvolutionEngine::step_evaluate_record(Population& pop) {
  const double started = now_ms();
  logger_.emit({telemetry::LogLevel::info, "generation-start", pop.generation + 1, std::nullopt,
                json::object()});
  long before_step = calls_total_.load();
  Population next = step_generation(pop);
  pending_creation_calls_ += calls_total_.load() - before_step;
  population_ = std::move(next);

  long before_eval = calls_total_.load();
  evaluate_population(population_);
  long eval_calls = calls_total_.load() - before_eval;

  note_best(population_);
  record_generation(population_, now_ms() - started);
  history_.back().provider_calls = pending_creation_calls_ + eval_calls;
  pending_creation_calls_ = 0;
}

RunResult EvolutionEngine::run_loop(bool resumed_pending_step) {
  try {
    if (resumed_pending_step) step_evaluate_record(population_);
    for (;;) {
      bool any_selectable = false;
      for (const auto& m : population_.members) {
        if (m.selectable()) any_selectable = true;
      }
      std::optional<TerminationReason> reason;
      if (!any_selectable) {
        reason = TerminationReason::population_extinct;
      } else {
        reason = check_termination(history_, config_);
      }
      if (reason) {
        write_checkpoint(true, reason);
        logger_.emit({telemetry::LogLevel::info,
                      "termination",
                      population_.generation,
                      std::nullopt,
                      {{"reason", to_string(*reason)}}});
        return build_result(*reason);
      }
      write_checkpoint(false, std::nullopt);
      step_evaluate_record(population_);
    }
  } catch (const ProviderError& e) {
    logger_.emit({telemetry::LogLevel::error,
                  "provider-abort",
                  population_.generation,
                  std::nullopt,
                  {{"error", e.what()}, {"kind", to_string(e.kind)}}});
    const bool has_checkpoint = !checkpoint_path_.empty();
    throw RunAborted(std::string("provider failure: ") + e.what(),
                     build_result(TerminationReason::max_generations), has_checkpoint,
                     checkpoint_path_);
  }
}

RunResult EvolutionEngine::run() {
  logger_.emit({telemetry::LogLevel::info,
                "run-start",
                -1,
                std::nullopt,
                {{"task", task_.name}, {"kind", task_.kind()}, {"seed", config_.rng_seed}}});
  const double started = now_ms();
  try {
    long before = calls_total_.load();
    population_ = initialize_population();
    pending_creation_calls_ = calls_total_.load() - before;

    int parsed = 0;
    for (const auto& m : population_.members) {
      if (m.gene) ++parsed;
    }
    if (parsed < 2) {
      logger_.emit({telemetry::LogLevel::error, "termination", 0, std::nullopt,
                    {{"reason", "population_extinct"}, {"parsed", parsed}}});
      return build_result(TerminationReason::population_extinct);
    }

    long before_eval = calls_total_.load();
    evaluate_population(population_);
    long eval_calls = calls_total_.load() - before_eval;
    note_best(population_);
    record_generation(population_, now_ms() - started);
    history_.back().provider_calls = pending_creation_calls_ + eval_calls;
    pending_creation_calls_ = 0;
  } catch (const ProviderError& e) {
    throw RunAborted(std::string("provider failure during initialization: ") + e.what(),
                     build_result(TerminationReason::population_extinct), false, "");
  }
  return run_loop(false);
}

RunResult EvolutionEngine::resume_from(const std::string& checkpoint_path) {
  json cj = load_checkpoint_json(checkpoint_path);
  Checkpoint cp = checkpoint_from_json(cj, *task_.codec);
  if (cp.config_digest != config_digest(cp.config, task_)) {
    throw std::invalid_argument("checkpoint config digest mismatch: checkpoint was edited or "
                                "belongs to a different task");
  }
  if (cp.config_digest != config_digest(config_, task_)) {
    throw std::invalid_argument("engine config does not match the checkpointed run");
  }

  config_ = cp.config;
  rng_.restore_state(cp.rng_state);
  next_id_ = cp.next_id;
  population_ = cp.population;
  history_ = cp.history;
  best_ = cp.best;
  pending_creation_calls_ = cp.pending_creation_calls;
  calls_total_.store(cp.total_calls);
  usage_input_.store(cp.usage.input_tokens);
  usage_output_.store(cp.usage.output_tokens);

  if (cp.complete) {
    // Nothing to re-run; rebuild the finished result (keeping any resume
    // marker the completed run carried) so the report can be regenerated.
    resumed_ = cp.resumed_from >= 0;
    resumed_from_generation_ = cp.resumed_from;
    return build_result(cp.reason.value_or(TerminationReason::max_generations));
  }

  resumed_ = true;
  resumed_from_generation_ = cp.population.generation;
  logger_.emit({telemetry::LogLevel::info,
                "run-start",
                population_.generation,
                std::nullopt,
                {{"task", task_.name}, {"resumed_from", resumed_from_generation_}}});
  return run_loop(true);
}

}  // namespace evotext
