#include <doctest.h>

#include <set>

#include "evotext/checkpoint.hpp"
#include "evotext/report.hpp"
#include "helpers.hpp"

using namespace evotext;
using namespace evotext::tasks;
using namespace testutil;

namespace {

Population scored_population(std::vector<double> fitnesses) {
  Population pop;
  pop.generation = 0;
  int id = 0;
  for (double f : fitnesses) {
    Individual ind;
    ind.id = id++;
    ind.gene = Gene("knapsack", knapsack_payload({0, 0, 0, 0}));
    ind.validity = Validity::valid;
    ind.fitness = f;
    FitnessReport report;
    report.raw_score = 1.0 + 9.0 * f;
    report.normalized = f;
    report.effective = f;
    ind.report = report;
    pop.members.push_back(std::move(ind));
  }
  return pop;
}

EngineConfig desk_config(uint64_t seed) {
  EngineConfig cfg;
  cfg.population_size = 10;
  cfg.elite_count = 2;
  cfg.tournament_size = 3;
  cfg.crossover_rate = 0.9;
  cfg.mutation_rate = 0.5;
  cfg.max_generations = 5;
  cfg.rng_seed = seed;
  cfg.concurrency = 2;
  return cfg;
}

GenerationRecord rec(int g, std::optional<double> best) {
  GenerationRecord r;
  r.generation = g;
  r.best = best;
  return r;
}

}  // namespace

TEST_CASE("elites are the top-E by fitness, ties to the lower id") {
  Population pop = scored_population({0.9, 0.7, 0.5, 0.3});
  auto elites = EvolutionEngine::elite_indices(pop, 2);
  CHECK(elites == std::vector<size_t>{0, 1});

  Population shuffled = scored_population({0.5, 0.9, 0.3, 0.7});
  elites = EvolutionEngine::elite_indices(shuffled, 2);
  CHECK(elites == std::vector<size_t>{1, 3});

  Population equal = scored_population({0.6, 0.6, 0.6});
  elites = EvolutionEngine::elite_indices(equal, 1);
  CHECK(elites == std::vector<size_t>{0});  // lowest id wins the tie
}

TEST_CASE("tournament selection matches a straight-line replay of the same draws") {
  Population pop = scored_population({0.2, 0.9, 0.4, 0.7, 0.1});
  EngineConfig cfg = desk_config(0);
  cfg.tournament_size = 2;

  const uint64_t seed = 12345;
  SeededRng rng(seed);
  auto pool = EvolutionEngine::select_parent_indices(pop, cfg, 6, rng);

  // Independent reimplementation with an identical draw sequence.
  SeededRng replay(seed);
  std::vector<size_t> expected;
  for (int slot = 0; slot < 6; ++slot) {
    size_t best = replay.below(5);
    size_t other = replay.below(5);
    auto wins = [&](size_t a, size_t b) {
      double fa = *pop.members[a].fitness, fb = *pop.members[b].fitness;
      return fa != fb ? fa > fb : a < b;
    };
    expected.push_back(wins(other, best) ? other : best);
  }
  CHECK(pool == expected);
}

TEST_CASE("rank selection prefers better ranks and is deterministic") {
  Population pop = scored_population({0.1, 0.9, 0.5});
  EngineConfig cfg = desk_config(0);
  cfg.selection = SelectionStrategy::rank;

  SeededRng rng_a(7), rng_b(7);
  auto pool_a = EvolutionEngine::select_parent_indices(pop, cfg, 600, rng_a);
  auto pool_b = EvolutionEngine::select_parent_indices(pop, cfg, 600, rng_b);
  CHECK(pool_a == pool_b);

  int counts[3] = {};
  for (size_t idx : pool_a) counts[idx]++;
  // Weights are 3:2:1 for fitness ranks (idx 1 best, idx 2 middle, idx 0 worst).
  CHECK(counts[1] > counts[2]);
  CHECK(counts[2] > counts[0]);
}

TEST_CASE("termination precedence: threshold beats stagnation beats max generations") {
  EngineConfig cfg = desk_config(0);
  cfg.max_generations = 4;
  cfg.fitness_threshold = 1.0;
  cfg.stagnation_window = 3;

  // Flat at 1.0: every rule fires; threshold wins.
  std::vector<GenerationRecord> history{rec(0, 1.0), rec(1, 1.0), rec(2, 1.0), rec(3, 1.0)};
  CHECK(*check_termination(history, cfg) == TerminationReason::threshold_reached);

  // Flat below threshold: stagnation wins over max_generations.
  history = {rec(0, 0.7), rec(1, 0.7), rec(2, 0.7), rec(3, 0.7)};
  CHECK(*check_termination(history, cfg) == TerminationReason::stagnation);

  // Still improving, no threshold: runs to the generation cap.
  cfg.fitness_threshold.reset();
  history = {rec(0, 0.1), rec(1, 0.4), rec(2, 0.6), rec(3, 0.8)};
  CHECK(*check_termination(history, cfg) == TerminationReason::max_generations);

  // Improvement inside the window staves off stagnation.
  cfg.max_generations = 10;
  history = {rec(0, 0.5), rec(1, 0.5), rec(2, 0.5), rec(3, 0.6)};
  CHECK(!check_termination(history, cfg).has_value());

  // A perfect 10/10 normalizes to 1.0 and trips the threshold immediately.
  cfg.fitness_threshold = 1.0;
  history = {rec(0, 1.0)};
  CHECK(*check_termination(history, cfg) == TerminationReason::threshold_reached);
}

TEST_CASE("engine config validation") {
  EngineConfig cfg;
  cfg.elite_count = cfg.population_size;  // E >= N
  CHECK_THROWS_AS(check_engine_config(cfg), std::invalid_argument);
  cfg = EngineConfig{};
  cfg.population_size = 1;
  CHECK_THROWS_AS(check_engine_config(cfg), std::invalid_argument);
  cfg = EngineConfig{};
  cfg.tournament_size = cfg.population_size + 1;
  CHECK_THROWS_AS(check_engine_config(cfg), std::invalid_argument);
  cfg = EngineConfig{};
  cfg.crossover_rate = 1.5;
  CHECK_THROWS_AS(check_engine_config(cfg), std::invalid_argument);
  CHECK_NOTHROW(check_engine_config(EngineConfig{}));
}

TEST_CASE("engine config json round-trip rejects unknown keys") {
  EngineConfig cfg = desk_config(9);
  cfg.fitness_threshold = 0.95;
  json j = engine_config_to_json(cfg);
  EngineConfig back = engine_config_from_json(j);
  CHECK(engine_config_to_json(back) == j);
  j["mystery"] = true;
  CHECK_THROWS_AS(engine_config_from_json(j), std::invalid_argument);
}

TEST_CASE("a full scripted run conserves population size, ids, and lineage") {
  auto task = load_task("knapsack_demo/manifest.json");
  EngineConfig cfg = desk_config(11);
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);

  Population pop = engine.initialize_population();
  REQUIRE(pop.members.size() == 10);
  engine.evaluate_population(pop);

  std::set<int> seen_ids;
  for (const auto& m : pop.members) {
    CHECK(seen_ids.insert(m.id).second);
    CHECK(m.lineage.op == OperatorKind::seed);
    CHECK(m.lineage.parent_ids.empty());
  }

  Population next = engine.step_generation(pop);
  CHECK(next.generation == 1);
  REQUIRE(next.members.size() == 10);

  std::set<int> prev_ids;
  for (const auto& m : pop.members) prev_ids.insert(m.id);
  int elites = 0;
  for (const auto& m : next.members) {
    CHECK(seen_ids.insert(m.id).second);  // globally unique ids
    if (m.lineage.op == OperatorKind::elite) {
      ++elites;
      REQUIRE(m.lineage.parent_ids.size() == 1);
      CHECK(m.fitness.has_value());  // fitness carried, not re-scored
    }
    if (m.lineage.op == OperatorKind::crossover) REQUIRE(m.lineage.parent_ids.size() == 2);
    if (m.lineage.op == OperatorKind::mutation) REQUIRE(m.lineage.parent_ids.size() == 1);
    // Lineage integrity: parents live in the previous generation.
    for (int p : m.lineage.parent_ids) CHECK(prev_ids.count(p) == 1);
  }
  CHECK(elites == 2);
}

TEST_CASE("zero rates degenerate to copies of the fitter parent") {
  auto task = load_task("knapsack_demo/manifest.json");
  EngineConfig cfg = desk_config(13);
  cfg.crossover_rate = 0.0;
  cfg.mutation_rate = 0.0;
  cfg.elite_count = 0;
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);

  Population pop = engine.initialize_population();
  engine.evaluate_population(pop);
  Population next = engine.step_generation(pop);

  auto find_by_id = [&](int id) -> const Individual& {
    for (const auto& m : pop.members)
      if (m.id == id) return m;
    FAIL("missing parent");
    return pop.members[0];
  };
  for (const auto& child : next.members) {
    REQUIRE(child.lineage.parent_ids.size() == 2);
    const Individual& a = find_by_id(child.lineage.parent_ids[0]);
    const Individual& b = find_by_id(child.lineage.parent_ids[1]);
    const Individual& fitter = fitter_than(a, b) ? a : b;
    CHECK(*child.gene == *fitter.gene);
  }
}

TEST_CASE("E=0 replaces the whole population; N=2 E=1 is the minimal split") {
  auto task = load_task("knapsack_demo/manifest.json");

  EngineConfig cfg = desk_config(17);
  cfg.elite_count = 0;
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  Population pop = engine.initialize_population();
  engine.evaluate_population(pop);
  Population next = engine.step_generation(pop);
  for (const auto& m : next.members) CHECK(m.lineage.op != OperatorKind::elite);

  EngineConfig tiny = desk_config(18);
  tiny.population_size = 2;
  tiny.elite_count = 1;
  tiny.tournament_size = 2;
  auto provider2 = make_scripted_provider(task, tiny.rng_seed);
  EvolutionEngine engine2(task, tiny, *provider2);
  Population pop2 = engine2.initialize_population();
  engine2.evaluate_population(pop2);
  Population next2 = engine2.step_generation(pop2);
  REQUIRE(next2.members.size() == 2);
  CHECK(next2.members[0].lineage.op == OperatorKind::elite);
  CHECK(next2.members[1].lineage.op != OperatorKind::elite);
}

TEST_CASE("unparseable generation replies at known variants become parse failures") {
  auto task = load_task("knapsack_demo/manifest.json");
  // Variants 2 and 5 always babble; everything else uses the normal rules.
  std::vector<ScriptedRule> rules;
  rules.push_back(fixed_reply(Purpose::generation, "variant 2", "so sorry, no structure from me"));
  rules.push_back(fixed_reply(Purpose::generation, "variant 5", "still just prose"));
  ScriptedProvider bad_two(rules, 1);  // incomplete table on purpose

  EngineConfig cfg = desk_config(19);
  cfg.max_parse_retries = 1;
  cfg.repair_enabled = false;

  // Route matching requests to the bad rules, others to the standard script.
  auto standard = make_scripted_provider(task, cfg.rng_seed);
  struct Router : Provider {
    Router(Provider& a, Provider& b) : Provider(8), bad(a), good(b) {}
    CompletionResponse do_complete(const CompletionRequest& req) override {
      std::string prompt;
      for (const auto& m : req.messages) prompt += m.content;
      if (req.purpose == Purpose::generation &&
          (prompt.find("variant 2") != std::string::npos ||
           prompt.find("variant 5") != std::string::npos)) {
        return bad.complete(req);
      }
      return good.complete(req);
    }
    Provider& bad;
    Provider& good;
  } router(bad_two, *standard);

  EvolutionEngine engine(task, cfg, router);
  Population pop = engine.initialize_population();
  REQUIRE(pop.members.size() == 10);
  int failures = 0;
  for (const auto& m : pop.members) {
    if (m.validity == Validity::parse_failure) {
      ++failures;
      CHECK((m.id == 2 || m.id == 5));
      CHECK(!m.gene.has_value());
    }
  }
  CHECK(failures == 2);

  engine.evaluate_population(pop);
  for (const auto& m : pop.members) {
    if (m.validity == Validity::parse_failure) CHECK(!m.selectable());
  }
}

TEST_CASE("a provider that never yields structure extinguishes the population") {
  auto task = load_task("knapsack_demo/manifest.json");
  ScriptedProvider prose({fixed_reply(std::nullopt, "", "chatter with no block")}, 1);
  EngineConfig cfg = desk_config(23);
  cfg.max_parse_retries = 1;
  cfg.repair_enabled = false;
  EvolutionEngine engine(task, cfg, prose);
  RunResult result = engine.run();
  CHECK(result.reason == TerminationReason::population_extinct);
  CHECK(!result.best.has_value());
  CHECK(result.history.empty());
}

TEST_CASE("malformed crossover replies fall back to the structural operator") {
  auto task = load_task("knapsack_demo/manifest.json");
  auto standard = make_scripted_provider(task, 29);
  struct BreakCrossover : Provider {
    explicit BreakCrossover(Provider& inner) : Provider(8), inner(inner) {}
    CompletionResponse do_complete(const CompletionRequest& req) override {
      if (req.purpose == Purpose::crossover) {
        CompletionResponse resp;
        resp.text = "===GENE-BEGIN kind=knapsack v=1===\n{oops\n===GENE-END===";
        return resp;
      }
      if (req.purpose == Purpose::repair) {
        CompletionResponse resp;
        resp.text = "cannot help";
        return resp;
      }
      return inner.complete(req);
    }
    Provider& inner;
  } breaker(*standard);

  EngineConfig cfg = desk_config(29);
  cfg.max_parse_retries = 1;
  cfg.crossover_rate = 1.0;
  cfg.mutation_rate = 0.0;
  EvolutionEngine engine(task, cfg, breaker);
  Population pop = engine.initialize_population();
  engine.evaluate_population(pop);
  Population next = engine.step_generation(pop);

  auto gene_of = [&](int id) -> const Gene& {
    for (const auto& m : pop.members)
      if (m.id == id) return *m.gene;
    FAIL("missing parent");
    return *pop.members[0].gene;
  };
  int fallbacks = 0;
  for (const auto& m : next.members) {
    if (m.lineage.op != OperatorKind::crossover) continue;
    ++fallbacks;
    CHECK(m.lineage.structural_fallback);
    // Component closure: every slot choice comes from one of the parents.
    auto child = knapsack_choices(m.gene->payload());
    auto a = knapsack_choices(gene_of(m.lineage.parent_ids[0]).payload());
    auto b = knapsack_choices(gene_of(m.lineage.parent_ids[1]).payload());
    for (size_t i = 0; i < child.size(); ++i) CHECK((child[i] == a[i] || child[i] == b[i]));
  }
  CHECK(fallbacks == 8);
}

TEST_CASE("elitism keeps the per-generation best from ever dropping") {
  auto task = load_task("knapsack_demo/manifest.json");
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    EngineConfig cfg = desk_config(seed);
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    RunResult result = engine.run();
    REQUIRE(result.history.size() >= 2);
    for (size_t g = 1; g < result.history.size(); ++g) {
      REQUIRE(result.history[g].best.has_value());
      CHECK(*result.history[g].best >= *result.history[g - 1].best);
    }
  }
}

TEST_CASE("identical runs at concurrency 1 and 8 produce identical reports") {
  auto task = load_task("knapsack_demo/manifest.json");
  auto run_at = [&](int concurrency) {
    EngineConfig cfg = desk_config(37);
    cfg.concurrency = concurrency;
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    RunResult result = engine.run();
    json report = run_report_json(result, task);
    mask_volatile(report);
    report["config"]["concurrency"] = 0;  // the knob itself may differ
    return report.dump();
  };
  CHECK(run_at(1) == run_at(8));
}

TEST_CASE("engine call accounting reconciles with the provider counter") {
  auto task = load_task("knapsack_demo/manifest.json");
  EngineConfig cfg = desk_config(41);
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  RunResult result = engine.run();

  CHECK(result.total_provider_calls == provider->total_calls());
  long recorded = 0;
  for (const auto& rec_ : result.history) recorded += rec_.provider_calls;
  CHECK(recorded == result.total_provider_calls);
}

TEST_CASE("best-of-run is feasible whenever any feasible candidate was seen") {
  auto task = load_task("knapsack_demo/manifest.json");
  for (uint64_t seed = 100; seed < 110; ++seed) {
    EngineConfig cfg = desk_config(seed);
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    RunResult result = engine.run();
    bool any_valid = false;
    for (const auto& rec_ : result.history) {
      if (rec_.best.has_value()) any_valid = true;
    }
    if (any_valid) {
      REQUIRE(result.best.has_value());
      CHECK(result.best->validity == Validity::valid);
    }
  }
}

TEST_CASE("threshold and stagnation runs report their reasons") {
  auto task = load_task("knapsack_demo/manifest.json");

  EngineConfig cfg = desk_config(43);
  cfg.fitness_threshold = 0.2;  // trivially reached in generation 0
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  RunResult result = engine.run();
  CHECK(result.reason == TerminationReason::threshold_reached);
  CHECK(result.history.size() == 1);

  // A provider that scores everything identically stalls the run.
  struct FlatEval : Provider {
    explicit FlatEval(Provider& inner) : Provider(8), inner(inner) {}
    CompletionResponse do_complete(const CompletionRequest& req) override {
      if (req.purpose == Purpose::evaluation) {
        CompletionResponse resp;
        resp.text = "same as ever\nSCORE: 7";
        return resp;
      }
      return inner.complete(req);
    }
    Provider& inner;
  };
  EngineConfig stagnant = desk_config(47);
  stagnant.max_generations = 10;
  stagnant.stagnation_window = 3;
  auto inner = make_scripted_provider(task, stagnant.rng_seed);
  FlatEval flat(*inner);
  EvolutionEngine engine2(task, stagnant, flat);
  RunResult result2 = engine2.run();
  CHECK(result2.reason == TerminationReason::stagnation);
  CHECK(result2.history.size() == 4);  // window S=3 fills after generation 3
}

TEST_CASE("record and replay reproduce a run exactly") {
  auto task = load_task("knapsack_demo/manifest.json");
  const std::string cassette = temp_path("evotext_engine_cassette.jsonl");

  EngineConfig cfg = desk_config(53);
  cfg.max_generations = 2;
  cfg.concurrency = 1;

  json recorded_report;
  {
    auto inner = make_scripted_provider(task, cfg.rng_seed);
    RecordingProvider recorder(*inner, std::make_shared<CassetteWriter>(cassette));
    EvolutionEngine engine(task, cfg, recorder);
    RunResult result = engine.run();
    recorded_report = run_report_json(result, task);
    mask_volatile(recorded_report);
  }
  {
    ReplayProvider replay(cassette);
    EvolutionEngine engine(task, cfg, replay);
    RunResult result = engine.run();
    json replay_report = run_report_json(result, task);
    mask_volatile(replay_report);
    // Token usage is recorded per backend; replay does not re-estimate it.
    recorded_report["usage"] = nullptr;
    replay_report["usage"] = nullptr;
    CHECK(recorded_report.dump() == replay_report.dump());
  }
  {
    // Drop the final exchange: replay must miss at that step.
    std::string contents = read_file(cassette);
    size_t cut = contents.rfind('\n', contents.size() - 2);
    write_file(cassette, contents.substr(0, cut + 1));
    ReplayProvider replay(cassette);
    EvolutionEngine engine(task, cfg, replay);
    CHECK_THROWS_AS(engine.run(), RunAborted);
  }
}

TEST_CASE("a mid-run abort leaves a checkpoint that resumes to the uninterrupted result") {
  auto task = load_task("knapsack_demo/manifest.json");
  const std::string checkpoint = temp_path("evotext_resume_checkpoint.json");

  EngineConfig cfg = desk_config(59);
  cfg.max_generations = 5;

  // Reference: the uninterrupted run.
  json uninterrupted;
  long gen3_call_boundary = 0;
  {
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    RunResult result = engine.run();
    REQUIRE(result.history.size() == 5);
    uninterrupted = run_report_json(result, task);
    mask_volatile(uninterrupted);
    // Calls through generation 2, plus a little of generation 3.
    gen3_call_boundary = result.history[0].provider_calls +
                         result.history[1].provider_calls +
                         result.history[2].provider_calls + 3;
  }

  // Interrupted: the provider dies partway through generation 3.
  {
    auto inner = make_scripted_provider(task, cfg.rng_seed);
    FailAfterProvider failing(*inner, gen3_call_boundary);
    EvolutionEngine engine(task, cfg, failing);
    engine.set_checkpoint_path(checkpoint);
    try {
      engine.run();
      FAIL("expected RunAborted");
    } catch (const RunAborted& aborted) {
      CHECK(aborted.checkpoint_written);
      CHECK(aborted.partial.history.size() == 3);  // generations 0..2 completed
    }
  }

  // Resume with a healthy provider.
  {
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    engine.set_checkpoint_path(checkpoint);
    RunResult resumed = engine.resume_from(checkpoint);
    CHECK(resumed.resumed);
    CHECK(resumed.resumed_from_generation == 2);

    json resumed_report = run_report_json(resumed, task);
    mask_volatile(resumed_report);
    json expected = uninterrupted;
    expected["resumed_from_generation"] = 2;  // the only allowed difference
    CHECK(resumed_report.dump() == expected.dump());
  }

  // Resuming the now-complete checkpoint returns immediately with the result.
  {
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    RunResult again = engine.resume_from(checkpoint);
    CHECK(provider->total_calls() == 0);
    json report = run_report_json(again, task);
    mask_volatile(report);
    json expected = uninterrupted;
    expected["resumed_from_generation"] = 2;
    CHECK(report.dump() == expected.dump());
  }

  // A tampered config digest is refused.
  {
    json cj = load_checkpoint_json(checkpoint);
    cj["config"]["mutation_rate"] = 0.99;
    write_file(checkpoint, cj.dump());
    auto provider = make_scripted_provider(task, cfg.rng_seed);
    EvolutionEngine engine(task, cfg, *provider);
    CHECK_THROWS_AS(engine.resume_from(checkpoint), std::invalid_argument);
  }
}

TEST_CASE("a one-slot task seeded round-robin finds the optimum in generation 0") {
  // N >= option count and round-robin seeding enumerate every option.
  const std::string manifest = temp_path("evotext_one_slot.json");
  const std::string dir = tasks_dir() + std::string("/knapsack_demo/templates/manifest.json");
  json m = {
      {"name", "one_slot"},
      {"kind", "knapsack"},
      {"templates", dir},
      {"rubric", tasks_dir() + std::string("/knapsack_demo/rubric.txt")},
      {"task_description", "pick the best single option"},
      {"params",
       {{"budget", 3},
        {"slots", {{{{"cost", 1}, {"value", 1}},
                    {{"cost", 2}, {"value", 5}},
                    {{"cost", 3}, {"value", 2}},
                    {{"cost", 9}, {"value", 99}}}}}}},
  };
  write_file(manifest, m.dump());
  auto task = load_task_manifest(manifest);

  EngineConfig cfg;
  cfg.population_size = 6;  // >= 4 options
  cfg.elite_count = 1;
  cfg.tournament_size = 2;
  cfg.max_generations = 1;
  cfg.rng_seed = 3;
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  RunResult result = engine.run();
  REQUIRE(result.best.has_value());
  CHECK(knapsack_choices(result.best->gene->payload()) == std::vector<int>{1});
  CHECK(*result.history[0].best == doctest::Approx(1.0));
}

TEST_CASE("elite clone mutation adds mutated copies without touching the elites") {
  auto task = load_task("knapsack_demo/manifest.json");
  EngineConfig cfg = desk_config(61);
  cfg.mutate_elite_clones = true;
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  Population pop = engine.initialize_population();
  engine.evaluate_population(pop);
  Population next = engine.step_generation(pop);
  REQUIRE(next.members.size() == 10);

  // The first two offspring slots are mutation children of the two elites.
  CHECK(next.members[0].lineage.op == OperatorKind::elite);
  CHECK(next.members[1].lineage.op == OperatorKind::elite);
  CHECK(next.members[2].lineage.op == OperatorKind::mutation);
  CHECK(next.members[3].lineage.op == OperatorKind::mutation);
  CHECK(next.members[2].lineage.parent_ids[0] == next.members[0].lineage.parent_ids[0]);
  CHECK(next.members[3].lineage.parent_ids[0] == next.members[1].lineage.parent_ids[0]);
  // Elites themselves carry their genes unchanged.
  for (int i = 0; i < 2; ++i) {
    const auto& elite = next.members[i];
    for (const auto& m : pop.members) {
      if (m.id == elite.lineage.parent_ids[0]) CHECK(*m.gene == *elite.gene);
    }
  }
}

TEST_CASE("the travel task at paper scale lands a feasible plan with a full history") {
  auto task = load_task("travel_shanghai/manifest.json");
  EngineConfig cfg;
  cfg.population_size = 10;
  cfg.elite_count = 2;
  cfg.max_generations = 5;
  cfg.mutation_rate = 0.5;
  cfg.rng_seed = 404;
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  RunResult result = engine.run();

  REQUIRE(result.history.size() == 5);
  REQUIRE(result.best.has_value());
  CHECK(result.best->validity == Validity::valid);
  TravelPlan best = travel_from_payload(result.best->gene->payload());
  CHECK(computed_total_cents(best) <= 500000);
  CHECK(best.days.size() == 4);
}

TEST_CASE("a single-generation run returns the best of the initial evaluation") {
  auto task = load_task("knapsack_demo/manifest.json");
  EngineConfig cfg = desk_config(89);
  cfg.elite_count = 0;
  cfg.max_generations = 1;
  auto provider = make_scripted_provider(task, cfg.rng_seed);
  EvolutionEngine engine(task, cfg, *provider);
  RunResult result = engine.run();

  REQUIRE(result.history.size() == 1);
  CHECK(result.reason == TerminationReason::max_generations);
  REQUIRE(result.best.has_value());
  CHECK(result.best->lineage.op == OperatorKind::seed);
  CHECK(*result.best->fitness == doctest::Approx(*result.history[0].best));
}
