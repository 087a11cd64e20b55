#include "evotext/tasks/scripted.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <set>

#include "evotext/tasks/knapsack.hpp"
#include "evotext/tasks/proposal.hpp"
#include "evotext/tasks/travel.hpp"

namespace evotext::tasks {

namespace {

std::string score_reply(const std::string& note, double score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", score);
  return note + "\nSCORE: " + buf;
}

// Variant index from the rendered {variation_hint}; falls back to a
// digest-derived draw when the template carries no hint.
size_t variant_index(const CompletionRequest& req, SeededRng& rng) {
  std::string prompt;
  for (const auto& m : req.messages) prompt += m.content;
  size_t pos = prompt.find("variant ");
  if (pos != std::string::npos) {
    pos += 8;
    size_t end = pos;
    while (end < prompt.size() && std::isdigit(static_cast<unsigned char>(prompt[end]))) ++end;
    if (end > pos) return static_cast<size_t>(std::stoul(prompt.substr(pos, end - pos)));
  }
  return static_cast<size_t>(rng.below(1u << 20));
}

std::vector<Gene> parse_prompt_genes(const CompletionRequest& req, const GeneCodec& codec) {
  std::string prompt;
  for (const auto& m : req.messages) {
    prompt += m.content;
    prompt += '\n';
  }
  std::vector<Gene> genes;
  for (const auto& block : extract_all_blocks(prompt)) {
    if (block.kind != codec.kind()) continue;
    json raw = json::parse(block.body, nullptr, false);
    if (raw.is_discarded()) continue;
    auto normalized = codec.normalize_payload(raw);
    if (std::holds_alternative<json>(normalized)) {
      genes.emplace_back(codec.kind(), std::get<json>(std::move(normalized)));
    }
  }
  return genes;
}

// Civil-date day arithmetic (Hinnant's algorithm), enough for demo schedules.
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 +
                       static_cast<unsigned>(d) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  const long era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long year = static_cast<long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(year + (m <= 2));
}

std::string add_days(const std::string& iso_date, int days) {
  int y = std::stoi(iso_date.substr(0, 4));
  int m = std::stoi(iso_date.substr(5, 2));
  int d = std::stoi(iso_date.substr(8, 2));
  long serial = days_from_civil(y, m, d) + days;
  civil_from_days(serial, y, m, d);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
  return buf;
}

// --- knapsack -----------------------------------------------------------------

std::vector<ScriptedRule> knapsack_rules(const TaskDefinition& task) {
  auto codec = std::static_pointer_cast<const KnapsackCodec>(task.codec);
  const KnapsackTables tables = codec->tables();
  const long max_value = brute_force_optimum(tables).value;

  ScriptedRule generation;
  generation.purpose = Purpose::generation;
  generation.respond = [codec, tables](const CompletionRequest& req, SeededRng& rng) {
    size_t variant = variant_index(req, rng);
    std::vector<int> choices(tables.slots.size());
    if (tables.slots.size() == 1) {
      choices[0] = static_cast<int>(variant % tables.slots[0].size());
    } else {
      for (size_t i = 0; i < tables.slots.size(); ++i) {
        choices[i] = static_cast<int>(rng.below(tables.slots[i].size()));
      }
    }
    return "Here is a candidate selection.\n\n" +
           render_block(codec->kind(), knapsack_payload(choices));
  };

  ScriptedRule crossover;
  crossover.purpose = Purpose::crossover;
  crossover.respond = [codec](const CompletionRequest& req, SeededRng& rng) {
    auto parents = parse_prompt_genes(req, *codec);
    if (parents.size() < 2) throw ScriptConfigError("knapsack crossover prompt lacks two parents");
    json child = codec->structural_crossover(parents[0].payload(), parents[1].payload(), rng);
    return "Blending the two selections.\n\n" + render_block(codec->kind(), child);
  };

  ScriptedRule mutation;
  mutation.purpose = Purpose::mutation;
  mutation.respond = [codec](const CompletionRequest& req, SeededRng& rng) {
    auto parents = parse_prompt_genes(req, *codec);
    if (parents.empty()) throw ScriptConfigError("knapsack mutation prompt lacks a candidate");
    MutationResult r = codec->structural_mutate(parents[0].payload(), rng);
    return "Adjusting one slot.\n\n" + render_block(codec->kind(), r.payload);
  };

  ScriptedRule evaluation;
  evaluation.purpose = Purpose::evaluation;
  evaluation.respond = [codec, tables, max_value](const CompletionRequest& req, SeededRng& rng) {
    auto genes = parse_prompt_genes(req, *codec);
    if (genes.empty()) throw ScriptConfigError("knapsack evaluation prompt lacks a candidate");
    double quality = synthetic_fitness(tables, max_value, knapsack_choices(genes[0].payload()));
    (void)rng;
    return score_reply("Value captured relative to the best attainable.", 1.0 + 9.0 * quality);
  };

  ScriptedRule repair;
  repair.purpose = Purpose::repair;
  repair.respond = [codec, tables](const CompletionRequest&, SeededRng&) {
    std::vector<int> zeros(tables.slots.size(), 0);
    return "Resetting to a minimal valid selection.\n\n" +
           render_block(codec->kind(), knapsack_payload(zeros));
  };

  return {generation, crossover, mutation, evaluation, repair};
}

// --- travel --------------------------------------------------------------------

struct TravelScriptParams {
  std::string destination;
  std::string start_date = "2024-07-01";
  int required_days = 4;
  int64_t budget_cents = 0;
  std::vector<std::pair<std::string, int64_t>> hotels;  // name, cost
  std::vector<CatalogActivity> catalog;
};

TravelScriptParams travel_script_params(const TaskDefinition& task) {
  TravelScriptParams p;
  const json& params = task.params;
  p.destination = params.value("destination", std::string("Shanghai"));
  p.start_date = params.value("start_date", std::string("2024-07-01"));
  p.required_days = params.value("required_days", 4);
  p.budget_cents = parse_money(params.value("budget", std::string("5000.00"))).value_or(500000);
  for (const auto& h : params.value("hotels", json::array())) {
    p.hotels.emplace_back(h.at("name").get<std::string>(),
                          parse_money(h.at("total_cost").get<std::string>()).value_or(0));
  }
  for (const auto& a : params.value("activity_catalog", json::array())) {
    p.catalog.push_back({a.at("location").get<std::string>(),
                         a.value("description", std::string()),
                         parse_money(a.at("cost").get<std::string>()).value_or(0)});
  }
  if (p.hotels.empty()) p.hotels.emplace_back("Riverside Inn", 120000);
  if (p.catalog.empty()) p.catalog.push_back({"City Museum", "permanent collection", 5000});
  return p;
}

std::vector<ScriptedRule> travel_rules(const TaskDefinition& task) {
  auto codec = std::static_pointer_cast<const TravelCodec>(task.codec);
  const TravelScriptParams p = travel_script_params(task);
  static const char* kSlotTimes[] = {"09:00", "11:30", "14:00", "16:30"};

  ScriptedRule generation;
  generation.purpose = Purpose::generation;
  generation.respond = [codec, p](const CompletionRequest& req, SeededRng& rng) {
    size_t variant = variant_index(req, rng);
    TravelPlan plan;
    plan.destination = p.destination;
    plan.num_days = p.required_days;
    const auto& hotel = p.hotels[variant % p.hotels.size()];
    plan.hotel_name = hotel.first;
    plan.hotel_cost_cents = hotel.second;
    for (int d = 0; d < p.required_days; ++d) {
      DayPlan day;
      day.date = add_days(p.start_date, d);
      const size_t per_day = 2 + rng.below(2);  // 2 or 3 activities
      for (size_t k = 0; k < per_day; ++k) {
        const auto& entry = p.catalog[rng.below(p.catalog.size())];
        day.activities.push_back({kSlotTimes[k % 4], entry.location, entry.description,
                                  entry.cost_cents});
      }
      plan.days.push_back(std::move(day));
    }
    plan.stated_total_cents = computed_total_cents(plan);
    return "Here is a draft itinerary for " + p.destination + ".\n\n" +
           render_block(codec->kind(), travel_to_payload(plan));
  };

  ScriptedRule crossover;
  crossover.purpose = Purpose::crossover;
  crossover.respond = [codec](const CompletionRequest& req, SeededRng& rng) {
    auto parents = parse_prompt_genes(req, *codec);
    if (parents.size() < 2) throw ScriptConfigError("travel crossover prompt lacks two parents");
    json child = codec->structural_crossover(parents[0].payload(), parents[1].payload(), rng);
    return "Merging the stronger days of both plans.\n\n" + render_block(codec->kind(), child);
  };

  ScriptedRule mutation;
  mutation.purpose = Purpose::mutation;
  mutation.respond = [codec](const CompletionRequest& req, SeededRng& rng) {
    auto parents = parse_prompt_genes(req, *codec);
    if (parents.empty()) throw ScriptConfigError("travel mutation prompt lacks a candidate");
    MutationResult r = codec->structural_mutate(parents[0].payload(), rng);
    return "Swapping one activity for an alternative.\n\n" + render_block(codec->kind(), r.payload);
  };

  ScriptedRule evaluation;
  evaluation.purpose = Purpose::evaluation;
  evaluation.respond = [codec, p](const CompletionRequest& req, SeededRng&) {
    auto genes = parse_prompt_genes(req, *codec);
    if (genes.empty()) throw ScriptConfigError("travel evaluation prompt lacks a candidate");
    TravelPlan plan = travel_from_payload(genes[0].payload());
    int64_t total = computed_total_cents(plan);
    double score;
    std::string note;
    if (total > p.budget_cents) {
      score = 3.0;
      note = "Over budget.";
    } else {
      double utilization = p.budget_cents > 0
                               ? static_cast<double>(total) / static_cast<double>(p.budget_cents)
                               : 0.0;
      std::set<std::string> distinct;
      size_t acts = 0, min_day = SIZE_MAX, max_day = 0;
      for (const auto& day : plan.days) {
        acts += day.activities.size();
        min_day = std::min(min_day, day.activities.size());
        max_day = std::max(max_day, day.activities.size());
        for (const auto& a : day.activities) distinct.insert(a.location);
      }
      double variety = acts > 0 ? static_cast<double>(distinct.size()) / static_cast<double>(acts) : 0.0;
      double imbalance = (plan.days.empty() || max_day - min_day >= 2) ? 1.0 : 0.0;
      score = std::clamp(5.0 + 3.0 * utilization + 1.5 * variety - imbalance, 1.0, 10.0);
      note = "Feasible plan; pacing and variety considered.";
    }
    return score_reply(note, score);
  };

  ScriptedRule repair;
  repair.purpose = Purpose::repair;
  repair.respond = [codec, p](const CompletionRequest&, SeededRng&) {
    TravelPlan plan;
    plan.destination = p.destination;
    plan.num_days = p.required_days;
    plan.hotel_name = p.hotels[0].first;
    plan.hotel_cost_cents = p.hotels[0].second;
    for (int d = 0; d < p.required_days; ++d) {
      const auto& entry = p.catalog[static_cast<size_t>(d) % p.catalog.size()];
      plan.days.push_back(
          {add_days(p.start_date, d), {{"09:00", entry.location, entry.description, entry.cost_cents}}});
    }
    plan.stated_total_cents = computed_total_cents(plan);
    return "Re-emitting a well-formed plan.\n\n" + render_block(codec->kind(), travel_to_payload(plan));
  };

  return {generation, crossover, mutation, evaluation, repair};
}

// --- proposal --------------------------------------------------------------------

std::vector<ScriptedRule> proposal_rules(const TaskDefinition& task) {
  auto codec = std::static_pointer_cast<const ProposalCodec>(task.codec);
  const std::string topic = task.params.value("topic", std::string("an AI research system"));

  // Section sets for seeding, cycled by variant. Default: complete drafts.
  std::vector<std::vector<std::string>> seed_sets;
  if (task.params.contains("seed_section_sets")) {
    for (const auto& set : task.params["seed_section_sets"]) {
      std::vector<std::string> headings;
      for (const auto& h : set) headings.push_back(h.get<std::string>());
      seed_sets.push_back(std::move(headings));
    }
  }
  if (seed_sets.empty()) {
    seed_sets.push_back(
        std::vector<std::string>(proposal_headings().begin(), proposal_headings().end()));
  }

  auto body_for = [topic](const std::string& heading, size_t variant) {
    return "Working notes on " + topic + " for the " + heading + " section, draft line " +
           std::to_string(variant % 7 + 1) +
           ". The argument is kept brief here and expanded in revision.";
  };

  ScriptedRule generation;
  generation.purpose = Purpose::generation;
  generation.respond = [codec, seed_sets, body_for](const CompletionRequest& req, SeededRng& rng) {
    size_t variant = variant_index(req, rng);
    ProposalDraft draft;
    draft.topic = "Proposal draft " + std::to_string(variant % seed_sets.size());
    for (const auto& heading : seed_sets[variant % seed_sets.size()]) {
      draft.sections.push_back({heading, body_for(heading, variant)});
    }
    return "Draft outline follows.\n\n" + render_block(codec->kind(), proposal_to_payload(draft));
  };

  ScriptedRule crossover;
  crossover.purpose = Purpose::crossover;
  crossover.respond = [codec](const CompletionRequest& req, SeededRng& rng) {
    auto parents = parse_prompt_genes(req, *codec);
    if (parents.size() < 2) throw ScriptConfigError("proposal crossover prompt lacks two parents");
    ProposalDraft pa = proposal_from_payload(parents[0].payload());
    ProposalDraft pb = proposal_from_payload(parents[1].payload());
    // Union of section sets; on overlap keep the longer body.
    ProposalDraft child;
    child.topic = pa.topic;
    for (const auto& heading : proposal_headings()) {
      const ProposalSection* sa = nullptr;
      const ProposalSection* sb = nullptr;
      for (const auto& s : pa.sections)
        if (s.heading == heading) sa = &s;
      for (const auto& s : pb.sections)
        if (s.heading == heading) sb = &s;
      if (sa && sb) {
        child.sections.push_back(sa->body.size() >= sb->body.size() ? *sa : *sb);
      } else if (sa || sb) {
        child.sections.push_back(sa ? *sa : *sb);
      }
    }
    (void)rng;
    return "Merged draft keeping the stronger treatment of each section.\n\n" +
           render_block(codec->kind(), proposal_to_payload(child));
  };

  ScriptedRule mutation;
  mutation.purpose = Purpose::mutation;
  mutation.respond = [codec, body_for](const CompletionRequest& req, SeededRng& rng) {
    auto parents = parse_prompt_genes(req, *codec);
    if (parents.empty()) throw ScriptConfigError("proposal mutation prompt lacks a candidate");
    ProposalDraft draft = proposal_from_payload(parents[0].payload());
    std::vector<std::string> missing;
    for (const auto& heading : proposal_headings()) {
      bool present = std::any_of(draft.sections.begin(), draft.sections.end(),
                                 [&](const ProposalSection& s) { return s.heading == heading; });
      if (!present) missing.push_back(heading);
    }
    if (!missing.empty()) {
      draft.sections.push_back({missing[0], body_for(missing[0], rng.below(7))});
    } else if (!draft.sections.empty()) {
      draft.sections[rng.below(draft.sections.size())].body += " A further refinement is noted.";
    }
    return "Filling the weakest part of the draft.\n\n" +
           render_block(codec->kind(), proposal_to_payload(draft));
  };

  ScriptedRule evaluation;
  evaluation.purpose = Purpose::evaluation;
  evaluation.respond = [codec](const CompletionRequest& req, SeededRng&) {
    auto genes = parse_prompt_genes(req, *codec);
    if (genes.empty()) throw ScriptConfigError("proposal evaluation prompt lacks a candidate");
    ProposalDraft draft = proposal_from_payload(genes[0].payload());
    size_t present = 0;
    for (const auto& heading : proposal_headings()) {
      for (const auto& s : draft.sections)
        if (s.heading == heading) {
          ++present;
          break;
        }
    }
    double score = 1.0 + 9.0 * (static_cast<double>(present) / 5.0);
    return score_reply("Covers " + std::to_string(present) + " of 5 required sections.", score);
  };

  ScriptedRule repair;
  repair.purpose = Purpose::repair;
  repair.respond = [codec, body_for](const CompletionRequest&, SeededRng&) {
    ProposalDraft draft;
    draft.topic = "Recovered draft";
    for (const auto& heading : proposal_headings())
      draft.sections.push_back({heading, body_for(heading, 0)});
    return "Re-emitting a complete outline.\n\n" +
           render_block(codec->kind(), proposal_to_payload(draft));
  };

  return {generation, crossover, mutation, evaluation, repair};
}

}  // namespace

std::string variation_hint_for(size_t index) { return "variant " + std::to_string(index); }

std::unique_ptr<Provider> make_scripted_provider(const TaskDefinition& task, uint64_t seed,
                                                 int max_in_flight) {
  std::vector<ScriptedRule> rules;
  const std::string kind = task.kind();
  if (kind == "knapsack") {
    rules = knapsack_rules(task);
  } else if (kind == "travel") {
    rules = travel_rules(task);
  } else if (kind == "proposal") {
    rules = proposal_rules(task);
  } else {
    throw std::invalid_argument("no scripted backend for gene kind '" + kind + "'");
  }
  return std::make_unique<ScriptedProvider>(std::move(rules), seed, max_in_flight);
}

}  // namespace evotext::tasks
