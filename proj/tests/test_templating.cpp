#include <doctest.h>

#include "helpers.hpp"

using namespace evotext;
using namespace testutil;

TEST_CASE("placeholders are scanned and validated at load") {
  PromptTemplate t = make_template("demo", PromptRole::mutation,
                                   "Change this: {candidate} per {constraints}");
  CHECK(t.required_placeholders == std::set<std::string>{"candidate", "constraints"});

  CHECK_THROWS_AS(make_template("bad", PromptRole::generation, "hello {nonsense}"),
                  TemplateError);
  CHECK_THROWS_AS(make_template("bad", PromptRole::generation, "dangling {candidate"),
                  TemplateError);
  CHECK_THROWS_AS(make_template("bad", PromptRole::generation, "stray } brace"), TemplateError);
}

TEST_CASE("role-mandatory placeholders are enforced") {
  CHECK_THROWS_AS(make_template("c", PromptRole::crossover, "only {parent_a}"), TemplateError);
  CHECK_NOTHROW(make_template("c", PromptRole::crossover, "{parent_a} {parent_b}"));
  CHECK_THROWS_AS(make_template("m", PromptRole::mutation, "no placeholder"), TemplateError);
  CHECK_THROWS_AS(make_template("e", PromptRole::evaluation, "{candidate} only"), TemplateError);
  CHECK_NOTHROW(make_template("e", PromptRole::evaluation, "{candidate} {rubric}"));
  CHECK_THROWS_AS(make_template("r", PromptRole::repair, "nothing"), TemplateError);
}

TEST_CASE("render substitutes everything and leaves no tokens") {
  PromptTemplate t = make_template("x", PromptRole::crossover,
                                   "A: {parent_a}\nB: {parent_b}\nrules {constraints}");
  std::string out = render(t, {{"parent_a", "one"}, {"parent_b", "two"}, {"constraints", "none"}});
  CHECK(out == "A: one\nB: two\nrules none");
  CHECK(out.find('{') == std::string::npos);
}

TEST_CASE("bound values are inserted verbatim, never rescanned") {
  PromptTemplate t = make_template("x", PromptRole::mutation, "body: {candidate}");
  std::string out = render(t, {{"candidate", "literal {parent_a} stays"}});
  CHECK(out == "body: literal {parent_a} stays");
}

TEST_CASE("brace escapes render literally") {
  PromptTemplate t = make_template("x", PromptRole::generation, "json looks like {{\"k\": 1}}");
  CHECK(render(t, {}) == "json looks like {\"k\": 1}");
}

TEST_CASE("template with no placeholders renders verbatim") {
  PromptTemplate t = make_template("x", PromptRole::generation, "plain text");
  CHECK(render(t, {}) == "plain text");
}

TEST_CASE("missing binding raises MissingBinding with the name") {
  PromptTemplate t = make_template("x", PromptRole::mutation, "{candidate}");
  try {
    render(t, {});
    FAIL("expected MissingBinding");
  } catch (const MissingBinding& e) {
    CHECK(e.placeholder == "candidate");
  }
}

TEST_CASE("render is pure") {
  PromptTemplate t = make_template("x", PromptRole::mutation, "v: {candidate}");
  Bindings b{{"candidate", "same"}};
  CHECK(render(t, b) == render(t, b));
}

TEST_CASE("generation templates rotate round-robin by index") {
  TemplateSet set;
  set.task = "demo";
  for (int i = 0; i < 3; ++i)
    set.generation.push_back(make_template("g" + std::to_string(i), PromptRole::generation, "g"));
  set.crossover = make_template("c", PromptRole::crossover, "{parent_a}{parent_b}");
  set.mutation = make_template("m", PromptRole::mutation, "{candidate}");
  set.evaluation = make_template("e", PromptRole::evaluation, "{candidate}{rubric}");

  std::vector<std::string> picked;
  for (size_t i = 0; i < 6; ++i) picked.push_back(pick_generation_template(set, i).name);
  CHECK(picked == std::vector<std::string>{"g0", "g1", "g2", "g0", "g1", "g2"});

  set.generation.resize(1);
  CHECK(pick_generation_template(set, 12).name == "g0");

  set.generation.push_back(make_template("g1", PromptRole::generation, "g"));
  CHECK(pick_generation_template(set, 7).name == "g1");
}

TEST_CASE("template files parse the three-line header") {
  PromptTemplate t = parse_template_file("name: hello\nrole: mutation\n\nBody {candidate}\n");
  CHECK(t.name == "hello");
  CHECK(t.role == PromptRole::mutation);
  CHECK(t.body == "Body {candidate}\n");

  CHECK_THROWS_AS(parse_template_file("role: mutation\nname: x\n\nbody"), TemplateError);
  CHECK_THROWS_AS(parse_template_file("name: x\nrole: mutation\nbody"), TemplateError);
  CHECK_THROWS_AS(parse_template_file("name: x\nrole: nosuch\n\nbody"), TemplateError);
}

TEST_CASE("shipped task template sets load and validate") {
  for (const char* rel : {"travel_shanghai", "proposal_ai", "knapsack_demo"}) {
    TemplateSet set = load_template_set(tasks_dir() + "/" + std::string(rel) +
                                        "/templates/manifest.json", rel);
    CHECK(set.generation.size() == 2);
    CHECK(set.repair.has_value());
  }
}
