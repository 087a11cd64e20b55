#pragma once

// Shared fixtures for the test suites: codec construction, random gene
// generators, a scripted desk task, and provider stubs. Everything here is
// deterministic given the seed it is handed.

#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "evotext/engine.hpp"
#include "evotext/provider.hpp"
#include "evotext/task.hpp"
#include "evotext/tasks/knapsack.hpp"
#include "evotext/tasks/proposal.hpp"
#include "evotext/tasks/scripted.hpp"
#include "evotext/tasks/travel.hpp"

namespace testutil {

using namespace evotext;
using namespace evotext::tasks;

inline std::string tasks_dir() { return EVOTEXT_TASKS_DIR; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << contents;
}

inline std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

// --- codecs and tasks -----------------------------------------------------------

inline std::vector<CatalogActivity> demo_catalog() {
  return {
      {"City Museum", "permanent collection", 0},
      {"Old Street", "street food crawl", 15000},
      {"River Walk", "waterfront stroll", 0},
      {"Observation Deck", "skyline views", 36000},
      {"Classical Garden", "garden visit", 4000},
      {"Evening Cruise", "skyline cruise", 48000},
      {"Temple Court", "incense courtyard", 2000},
      {"Market Lanes", "crafts and snacks", 12000},
  };
}

inline std::shared_ptr<TravelCodec> travel_codec() {
  return std::make_shared<TravelCodec>("¥", demo_catalog());
}

inline std::shared_ptr<ProposalCodec> proposal_codec() {
  return std::make_shared<ProposalCodec>();
}

inline KnapsackTables desk_tables() {
  KnapsackTables t;
  t.budget = 17;
  t.slots = {
      {{1, 2}, {3, 5}, {4, 6}, {8, 9}, {1, 1}},
      {{3, 4}, {5, 7}, {1, 2}, {7, 10}, {2, 3}},
      {{4, 8}, {4, 7}, {4, 5}, {5, 9}, {2, 3}},
      {{5, 8}, {8, 11}, {3, 4}, {6, 7}, {4, 5}},
  };
  return t;
}

inline std::shared_ptr<KnapsackCodec> desk_codec() {
  return std::make_shared<KnapsackCodec>(desk_tables());
}

inline TaskDefinition load_task(const std::string& rel_manifest) {
  return load_task_manifest(tasks_dir() + "/" + rel_manifest);
}

// --- random gene generators ------------------------------------------------------

inline TravelPlan random_travel_plan(SeededRng& rng) {
  static const char* kCities[] = {"Shanghai", "Kyoto", "Lisbon"};
  static const char* kHotels[] = {"Family Hotel", "Courtyard Inn", "River View Hotel"};
  auto catalog = demo_catalog();

  TravelPlan plan;
  plan.destination = kCities[rng.below(3)];
  plan.hotel_name = kHotels[rng.below(3)];
  plan.hotel_cost_cents = static_cast<int64_t>(rng.below(30000)) * 10;
  const int days = 1 + static_cast<int>(rng.below(5));
  plan.num_days = days;
  for (int d = 0; d < days; ++d) {
    DayPlan day;
    char date[32];
    std::snprintf(date, sizeof(date), "2024-07-%02d", d + 1);
    day.date = date;
    const size_t acts = 1 + rng.below(4);
    for (size_t a = 0; a < acts; ++a) {
      const auto& entry = catalog[rng.below(catalog.size())];
      char hhmm[8];
      std::snprintf(hhmm, sizeof(hhmm), "%02zu:%02zu", 8 + a * 3, rng.below(60));
      day.activities.push_back({hhmm, entry.location, entry.description,
                                static_cast<int64_t>(rng.below(60000))});
    }
    plan.days.push_back(std::move(day));
  }
  // Half the plans state the true total, half state a wrong one.
  plan.stated_total_cents =
      rng.below(2) == 0 ? computed_total_cents(plan)
                        : static_cast<int64_t>(rng.below(700000));
  return plan;
}

inline Gene random_travel_gene(SeededRng& rng) {
  return Gene("travel", travel_to_payload(random_travel_plan(rng)));
}

inline Gene random_proposal_gene(SeededRng& rng) {
  const auto& headings = proposal_headings();
  ProposalDraft draft;
  draft.topic = "topic #" + std::to_string(rng.below(1000));
  std::vector<std::string> chosen;
  for (const auto& h : headings) {
    if (rng.below(4) != 0) chosen.push_back(h);  // each section present 3/4 of the time
  }
  if (chosen.empty()) chosen.push_back(headings[rng.below(headings.size())]);
  // Shuffle document order.
  for (size_t i = chosen.size(); i > 1; --i) std::swap(chosen[i - 1], chosen[rng.below(i)]);
  for (const auto& h : chosen) {
    std::string body = "Notes on " + h + ".";
    const size_t extra = rng.below(40);
    for (size_t w = 0; w < extra; ++w) body += " w" + std::to_string(rng.below(100));
    if (rng.below(5) == 0) body += "\nSecond paragraph with a line break.";
    draft.sections.push_back({h, body});
  }
  return Gene("proposal", proposal_to_payload(draft));
}

inline Gene random_knapsack_gene(SeededRng& rng, const KnapsackTables& tables) {
  std::vector<int> choices;
  for (const auto& slot : tables.slots)
    choices.push_back(static_cast<int>(rng.below(slot.size())));
  return Gene("knapsack", knapsack_payload(choices));
}

// --- provider stubs ---------------------------------------------------------------

// Returns queued texts in arrival order, regardless of the request.
class SequenceProvider : public Provider {
 public:
  explicit SequenceProvider(std::vector<std::string> replies)
      : Provider(8), replies_(std::move(replies)) {}

 protected:
  CompletionResponse do_complete(const CompletionRequest&) override {
    std::lock_guard lock(mutex_);
    if (next_ >= replies_.size()) throw std::logic_error("SequenceProvider exhausted");
    CompletionResponse resp;
    resp.text = replies_[next_++];
    resp.backend = Backend::scripted;
    return resp;
  }

 private:
  std::mutex mutex_;
  std::vector<std::string> replies_;
  size_t next_ = 0;
};

// Delegates to an inner provider until `fail_from` calls have gone through,
// then raises a transport failure on every later call.
class FailAfterProvider : public Provider {
 public:
  FailAfterProvider(Provider& inner, long fail_from)
      : Provider(8), inner_(inner), fail_from_(fail_from) {}

 protected:
  CompletionResponse do_complete(const CompletionRequest& req) override {
    if (count_.fetch_add(1) >= fail_from_)
      throw ProviderError(ProviderErrorKind::transport_failure, "injected transport failure");
    return inner_.complete(req);
  }

 private:
  Provider& inner_;
  long fail_from_;
  std::atomic<long> count_{0};
};

// --- report masking ----------------------------------------------------------------

// Clears wall-clock fields so deterministic reports compare byte-identical.
inline void mask_volatile(json& report) {
  if (report.contains("generated_at")) report["generated_at"] = "MASKED";
  if (report.contains("history")) {
    for (auto& rec : report["history"]) rec["wall_ms"] = 0.0;
  }
}

}  // namespace testutil
