#include <doctest.h>

#include "helpers.hpp"

using namespace evotext;
using namespace evotext::tasks;
using namespace testutil;

TEST_CASE("money parsing and formatting") {
  CHECK(*parse_money("4890.00") == 489000);
  CHECK(*parse_money("4890") == 489000);
  CHECK(*parse_money("4890.5") == 489050);
  CHECK(*parse_money("0.07") == 7);
  CHECK(!parse_money("").has_value());
  CHECK(!parse_money("-1.00").has_value());
  CHECK(!parse_money("12.345").has_value());
  CHECK(!parse_money("1,200.00").has_value());
  CHECK(format_money(489000) == "4890.00");
  CHECK(format_money(7) == "0.07");
  CHECK(format_money(0) == "0.00");
  for (int64_t cents : {0LL, 99LL, 100LL, 123456LL}) {
    CHECK(*parse_money(format_money(cents)) == cents);
  }
}

TEST_CASE("travel constraints accept cheap plans and reject wrong day counts") {
  auto constraints = travel_constraints(500000, 4);
  TravelPlan plan;
  plan.destination = "Shanghai";
  plan.num_days = 4;
  plan.hotel_name = "Inn";
  plan.hotel_cost_cents = 100000;
  for (int d = 0; d < 4; ++d) {
    char date[16];
    std::snprintf(date, sizeof(date), "2024-07-%02d", d + 1);
    plan.days.push_back({date, {{"10:00", "River Walk", "stroll", 50000}}});
  }
  plan.stated_total_cents = computed_total_cents(plan);  // 3000.00
  REQUIRE(plan.stated_total_cents == 300000);
  CHECK(validate(Gene("travel", travel_to_payload(plan)), constraints).empty());

  plan.days.pop_back();
  plan.stated_total_cents = computed_total_cents(plan);
  auto violations = validate(Gene("travel", travel_to_payload(plan)), constraints);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].constraint_id == "day-count");
  CHECK(*violations[0].measured == doctest::Approx(3.0));
  CHECK(*violations[0].limit == doctest::Approx(4.0));
}

TEST_CASE("proposal constraints: complete and under cap is feasible") {
  auto constraints = proposal_constraints(1200);
  ProposalDraft draft;
  draft.topic = "demo";
  std::string body;
  for (int w = 0; w < 180; ++w) body += "word ";  // 180 words x 5 sections = 900
  for (const auto& h : proposal_headings()) draft.sections.push_back({h, body});
  Gene g("proposal", proposal_to_payload(draft));
  CHECK(proposal_word_count(proposal_from_payload(g.payload())) == 900);
  CHECK(validate(g, constraints).empty());
}

TEST_CASE("proposal over the word cap draws the default soft penalty") {
  auto constraints = proposal_constraints(1200);
  ProposalDraft draft;
  draft.topic = "demo";
  std::string body;
  for (int w = 0; w < 280; ++w) body += "word ";  // 280 x 5 = 1400
  for (const auto& h : proposal_headings()) draft.sections.push_back({h, body});
  auto violations = validate(Gene("proposal", proposal_to_payload(draft)), constraints);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].constraint_id == "length-cap");
  CHECK(violations[0].severity == Severity::soft);
  CHECK(violations[0].penalty == doctest::Approx(0.5));
  CHECK(*violations[0].measured == doctest::Approx(1400.0));
  CHECK(*violations[0].limit == doctest::Approx(1200.0));
}

TEST_CASE("section order does not affect feasibility") {
  auto constraints = proposal_constraints(1200);
  ProposalDraft draft;
  draft.topic = "demo";
  draft.sections = {{"Conclusion", "end"},
                    {"Introduction", "start"},
                    {"Experiments", "runs"},
                    {"Related Work", "prior"},
                    {"Methodology", "how"}};
  CHECK(validate(Gene("proposal", proposal_to_payload(draft)), constraints).empty());
}

TEST_CASE("brute force: hand-checkable instances") {
  KnapsackTables one_slot;
  one_slot.budget = 2;
  one_slot.slots = {{{1, 5}, {2, 9}}};
  auto opt = brute_force_optimum(one_slot);
  CHECK(opt.feasible_exists);
  CHECK(opt.choices == std::vector<int>{1});
  CHECK(opt.value == 9);

  KnapsackTables two_slots;
  two_slots.budget = 2;
  two_slots.slots = {{{1, 1}, {1, 2}}, {{1, 1}, {1, 2}}};
  opt = brute_force_optimum(two_slots);
  CHECK(opt.choices == std::vector<int>{1, 1});
  CHECK(opt.value == 4);
}

TEST_CASE("brute force ties resolve to the lexicographically smallest assignment") {
  KnapsackTables tie;
  tie.budget = 10;
  tie.slots = {{{1, 5}, {1, 5}}, {{1, 3}, {1, 3}}};
  auto opt = brute_force_optimum(tie);
  CHECK(opt.choices == std::vector<int>{0, 0});
}

TEST_CASE("brute force on the desk instance matches the frozen optimum") {
  // Frozen from an independent exhaustive enumeration of the 625 assignments.
  auto opt = brute_force_optimum(desk_tables());
  CHECK(opt.value == 28);
  CHECK(opt.choices == std::vector<int>{0, 3, 0, 0});
}

TEST_CASE("brute force refuses oversized spaces") {
  KnapsackTables huge;
  huge.budget = 1;
  huge.slots.assign(7, std::vector<KnapsackOption>(8, {1, 1}));  // 8^7 > 10^6
  CHECK_THROWS_AS(brute_force_optimum(huge), SearchSpaceTooLarge);
}

TEST_CASE("synthetic fitness normalizes against the best attainable value") {
  auto tables = desk_tables();
  long max_value = brute_force_optimum(tables).value;
  CHECK(synthetic_fitness(tables, max_value, {0, 3, 0, 0}) == doctest::Approx(1.0));
  CHECK(synthetic_fitness(tables, max_value, {4, 2, 4, 2}) ==
        doctest::Approx((1.0 + 2.0 + 3.0 + 4.0) / 28.0));

  KnapsackTables zeros;
  zeros.budget = 0;
  zeros.slots = {{{0, 0}}, {{0, 0}}};
  CHECK(synthetic_fitness(zeros, brute_force_optimum(zeros).value, {0, 0}) == 0.0);
}

TEST_CASE("over-budget assignments trip the hard budget constraint") {
  auto tables = desk_tables();
  auto constraints = knapsack_constraints(tables);
  Gene over("knapsack", knapsack_payload({3, 3, 3, 3}));
  auto violations = validate(over, constraints);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].severity == Severity::hard);

  Gene under("knapsack", knapsack_payload({0, 2, 4, 2}));
  CHECK(validate(under, constraints).empty());
}

TEST_CASE("knapsack payload validation rejects bad shapes") {
  auto codec = desk_codec();
  auto out_of_range = codec->normalize_payload(json{{"choices", {0, 0, 0, 9}}});
  REQUIRE(std::holds_alternative<ParseFailure>(out_of_range));
  CHECK(std::get<ParseFailure>(out_of_range).reason == ParseFailureReason::type_mismatch);

  auto short_list = codec->normalize_payload(json{{"choices", {0, 0}}});
  REQUIRE(std::holds_alternative<ParseFailure>(short_list));

  auto missing = codec->normalize_payload(json::object());
  REQUIRE(std::holds_alternative<ParseFailure>(missing));
  CHECK(std::get<ParseFailure>(missing).reason == ParseFailureReason::missing_field);
}

TEST_CASE("travel payload validation pinpoints missing and mistyped fields") {
  auto codec = travel_codec();
  json base = travel_to_payload([] {
    TravelPlan p;
    p.destination = "X";
    p.num_days = 1;
    p.hotel_name = "Inn";
    p.hotel_cost_cents = 100;
    p.days = {{"2024-07-01", {{"09:00", "A", "", 0}}}};
    p.stated_total_cents = 100;
    return p;
  }());
  CHECK(std::holds_alternative<json>(codec->normalize_payload(base)));

  json no_hotel = base;
  no_hotel.erase("hotel");
  auto r1 = codec->normalize_payload(no_hotel);
  REQUIRE(std::holds_alternative<ParseFailure>(r1));
  CHECK(std::get<ParseFailure>(r1).reason == ParseFailureReason::missing_field);

  json bad_time = base;
  bad_time["days"][0]["activities"][0]["start_time"] = "25:99";
  auto r2 = codec->normalize_payload(bad_time);
  REQUIRE(std::holds_alternative<ParseFailure>(r2));
  CHECK(std::get<ParseFailure>(r2).reason == ParseFailureReason::type_mismatch);

  json bad_date = base;
  bad_date["days"][0]["date"] = "July 1st";
  REQUIRE(std::holds_alternative<ParseFailure>(codec->normalize_payload(bad_date)));
}

TEST_CASE("proposal payload validation rejects unknown and duplicate headings") {
  auto codec = proposal_codec();
  json ok = {{"topic", "t"},
             {"sections", {{{"heading", "Introduction"}, {"body", "b"}}}}};
  CHECK(std::holds_alternative<json>(codec->normalize_payload(ok)));

  json unknown = {{"topic", "t"}, {"sections", {{{"heading", "Background"}, {"body", "b"}}}}};
  auto r1 = codec->normalize_payload(unknown);
  REQUIRE(std::holds_alternative<ParseFailure>(r1));
  CHECK(std::get<ParseFailure>(r1).reason == ParseFailureReason::type_mismatch);

  json dup = {{"topic", "t"},
              {"sections",
               {{{"heading", "Introduction"}, {"body", "a"}},
                {{"heading", "Introduction"}, {"body", "b"}}}}};
  REQUIRE(std::holds_alternative<ParseFailure>(codec->normalize_payload(dup)));

  // Sloppy whitespace in a known heading still parses.
  json spaced = {{"topic", "t"}, {"sections", {{{"heading", "  Related   Work "}, {"body", "b"}}}}};
  auto r2 = codec->normalize_payload(spaced);
  REQUIRE(std::holds_alternative<json>(r2));
  CHECK(std::get<json>(r2)["sections"][0]["heading"] == "Related Work");
}

TEST_CASE("task manifests load and unknown keys or kinds are rejected") {
  auto task = load_task("knapsack_demo/manifest.json");
  CHECK(task.kind() == "knapsack");
  CHECK(task.constraints.size() == 1);
  CHECK(!task.rubric.empty());
  CHECK(task.templates.generation.size() == 2);

  const std::string bad_key = temp_path("evotext_bad_manifest.json");
  write_file(bad_key, R"({"name":"x","kind":"knapsack","templates":"t.json",
    "rubric":"r.txt","task_description":"d","params":{},"surprise":1})");
  CHECK_THROWS_AS(load_task_manifest(bad_key), std::invalid_argument);

  const std::string bad_kind = temp_path("evotext_bad_kind.json");
  write_file(bad_kind, R"({"name":"x","kind":"sonnet","templates":"t.json",
    "rubric":"r.txt","task_description":"d","params":{}})");
  CHECK_THROWS_AS(load_task_manifest(bad_kind), std::invalid_argument);
}

TEST_CASE("travel human rendering carries the headline fields and day schedules") {
  auto task = load_task("travel_shanghai/manifest.json");
  TravelPlan plan;
  plan.destination = "Shanghai";
  plan.num_days = 4;
  plan.hotel_name = "Shanghai Family Hotel";
  plan.hotel_cost_cents = 160000;
  for (int d = 0; d < 4; ++d) {
    char date[16];
    std::snprintf(date, sizeof(date), "2024-07-%02d", d + 1);
    plan.days.push_back({date, {{"09:00", "Shanghai Museum", "historical art and artifacts",
                                 82250}}});
  }
  plan.stated_total_cents = computed_total_cents(plan);
  std::string human = task.codec->render_human(travel_to_payload(plan));
  CHECK(human.find("Days: 4-day program") != std::string::npos);
  CHECK(human.find("Hotel: Shanghai Family Hotel") != std::string::npos);
  CHECK(human.find("Total Cost: ¥4890.00") != std::string::npos);
  CHECK(human.find("Day 1: 2024-07-01") != std::string::npos);
  CHECK(human.find("09:00 - Shanghai Museum (historical art and artifacts)") !=
        std::string::npos);
}
