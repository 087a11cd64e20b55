#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "evotext/constraints.hpp"
#include "evotext/gene.hpp"

namespace evotext::tasks {

// Currency is carried as an integer count of hundredths ("cents") and
// serialized as a decimal string with two fraction digits, e.g. "4890.00".
std::optional<int64_t> parse_money(const std::string& s);
std::string format_money(int64_t cents);

struct Activity {
  std::string start_time;  // HH:MM, 24-hour
  std::string location;
  std::string description;
  int64_t cost_cents = 0;
};

struct DayPlan {
  std::string date;  // ISO yyyy-mm-dd
  std::vector<Activity> activities;
};

struct TravelPlan {
  std::string destination;
  int num_days = 0;
  std::string hotel_name;
  int64_t hotel_cost_cents = 0;
  std::vector<DayPlan> days;
  int64_t stated_total_cents = 0;  // the total the document claims
};

// Hotel cost plus every activity cost. The stated total is kept as written;
// disagreement between the two is the validator's business, not the parser's.
int64_t computed_total_cents(const TravelPlan& plan);

TravelPlan travel_from_payload(const json& payload);  // payload must be normalized
json travel_to_payload(const TravelPlan& plan);

// Replacement activities for the model-free mutation operator.
struct CatalogActivity {
  std::string location;
  std::string description;
  int64_t cost_cents = 0;
};

class TravelCodec : public GeneCodec {
 public:
  explicit TravelCodec(std::string currency_symbol = "¥",
                       std::vector<CatalogActivity> catalog = {})
      : currency_(std::move(currency_symbol)), catalog_(std::move(catalog)) {}

  std::string kind() const override { return "travel"; }
  std::variant<json, ParseFailure> normalize_payload(const json& raw) const override;
  std::string render_human(const json& payload) const override;
  std::string format_spec() const override;
  json structural_crossover(const json& a, const json& b, SeededRng& rng) const override;
  MutationResult structural_mutate(const json& payload, SeededRng& rng) const override;

  const std::string& currency_symbol() const { return currency_; }

 private:
  std::string currency_;
  std::vector<CatalogActivity> catalog_;
};

// Hard: computed total within budget; exactly the required number of days.
// Soft: the stated total matches the computed total to the cent.
std::vector<ConstraintSpec> travel_constraints(int64_t budget_cents, int required_days);

}  // namespace evotext::tasks
