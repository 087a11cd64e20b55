#include "evotext/tasks/travel.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace evotext::tasks {

namespace {

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

bool valid_time(const std::string& s) {
  if (s.size() != 5 || s[2] != ':') return false;
  if (!all_digits(s.substr(0, 2)) || !all_digits(s.substr(3, 2))) return false;
  int hh = std::stoi(s.substr(0, 2));
  int mm = std::stoi(s.substr(3, 2));
  return hh < 24 && mm < 60;
}

bool valid_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
    return false;
  int mm = std::stoi(s.substr(5, 2));
  int dd = std::stoi(s.substr(8, 2));
  return mm >= 1 && mm <= 12 && dd >= 1 && dd <= 31;
}

ParseFailure missing(const std::string& field) {
  return {ParseFailureReason::missing_field, "missing required field: " + field};
}

ParseFailure bad_type(const std::string& what) {
  return {ParseFailureReason::type_mismatch, what};
}

// Money fields may arrive as "4890.00", "4890.5", or a bare JSON number.
std::optional<int64_t> money_from_json(const json& v) {
  if (v.is_string()) return parse_money(v.get<std::string>());
  if (v.is_number_integer()) {
    auto n = v.get<int64_t>();
    if (n < 0) return std::nullopt;
    return n * 100;
  }
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d < 0) return std::nullopt;
    return static_cast<int64_t>(d * 100.0 + 0.5);
  }
  return std::nullopt;
}

}  // namespace

std::optional<int64_t> parse_money(const std::string& s) {
  if (s.empty()) return std::nullopt;
  size_t dot = s.find('.');
  std::string whole = dot == std::string::npos ? s : s.substr(0, dot);
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (!all_digits(whole)) return std::nullopt;
  if (dot != std::string::npos && (frac.empty() || frac.size() > 2 || !all_digits(frac))) {
    return std::nullopt;
  }
  while (frac.size() < 2) frac += '0';
  if (whole.size() > 15) return std::nullopt;
  return std::stoll(whole) * 100 + std::stoll(frac);
}

std::string format_money(int64_t cents) {
  std::string frac = std::to_string(cents % 100);
  if (frac.size() < 2) frac = "0" + frac;
  return std::to_string(cents / 100) + "." + frac;
}

int64_t computed_total_cents(const TravelPlan& plan) {
  int64_t total = plan.hotel_cost_cents;
  for (const auto& day : plan.days) {
    for (const auto& act : day.activities) total += act.cost_cents;
  }
  return total;
}

TravelPlan travel_from_payload(const json& payload) {
  TravelPlan plan;
  plan.destination = payload["destination"].get<std::string>();
  plan.num_days = payload["num_days"].get<int>();
  plan.hotel_name = payload["hotel"]["name"].get<std::string>();
  plan.hotel_cost_cents = *parse_money(payload["hotel"]["total_cost"].get<std::string>());
  for (const auto& d : payload["days"]) {
    DayPlan day;
    day.date = d["date"].get<std::string>();
    for (const auto& a : d["activities"]) {
      Activity act;
      act.start_time = a["start_time"].get<std::string>();
      act.location = a["location"].get<std::string>();
      act.description = a["description"].get<std::string>();
      act.cost_cents = *parse_money(a["cost"].get<std::string>());
      day.activities.push_back(std::move(act));
    }
    plan.days.push_back(std::move(day));
  }
  plan.stated_total_cents = *parse_money(payload["total_cost"].get<std::string>());
  return plan;
}

json travel_to_payload(const TravelPlan& plan) {
  json days = json::array();
  for (const auto& day : plan.days) {
    json acts = json::array();
    for (const auto& act : day.activities) {
      acts.push_back({{"start_time", act.start_time},
                      {"location", act.location},
                      {"description", act.description},
                      {"cost", format_money(act.cost_cents)}});
    }
    days.push_back({{"date", day.date}, {"activities", acts}});
  }
  return json{{"destination", plan.destination},
              {"num_days", plan.num_days},
              {"hotel", {{"name", plan.hotel_name}, {"total_cost", format_money(plan.hotel_cost_cents)}}},
              {"days", days},
              {"total_cost", format_money(plan.stated_total_cents)}};
}

std::variant<json, ParseFailure> TravelCodec::normalize_payload(const json& raw) const {
  if (!raw.is_object()) return bad_type("itinerary payload must be a JSON object");
  TravelPlan plan;

  if (!raw.contains("destination")) return missing("destination");
  if (!raw["destination"].is_string()) return bad_type("destination must be a string");
  plan.destination = raw["destination"].get<std::string>();

  if (!raw.contains("num_days")) return missing("num_days");
  if (!raw["num_days"].is_number_integer() || raw["num_days"].get<int64_t>() < 1)
    return bad_type("num_days must be a positive integer");
  plan.num_days = raw["num_days"].get<int>();

  if (!raw.contains("hotel")) return missing("hotel");
  if (!raw["hotel"].is_object()) return bad_type("hotel must be an object");
  const json& hotel = raw["hotel"];
  if (!hotel.contains("name")) return missing("hotel.name");
  if (!hotel["name"].is_string()) return bad_type("hotel.name must be a string");
  plan.hotel_name = hotel["name"].get<std::string>();
  if (!hotel.contains("total_cost")) return missing("hotel.total_cost");
  auto hotel_cost = money_from_json(hotel["total_cost"]);
  if (!hotel_cost) return bad_type("hotel.total_cost must be a non-negative amount like '1600.00'");
  plan.hotel_cost_cents = *hotel_cost;

  if (!raw.contains("days")) return missing("days");
  if (!raw["days"].is_array()) return bad_type("days must be an array");
  for (const auto& d : raw["days"]) {
    if (!d.is_object()) return bad_type("each day must be an object");
    DayPlan day;
    if (!d.contains("date")) return missing("days[].date");
    if (!d["date"].is_string() || !valid_date(d["date"].get<std::string>()))
      return bad_type("days[].date must be an ISO date (yyyy-mm-dd)");
    day.date = d["date"].get<std::string>();
    if (!d.contains("activities")) return missing("days[].activities");
    if (!d["activities"].is_array()) return bad_type("days[].activities must be an array");
    for (const auto& a : d["activities"]) {
      if (!a.is_object()) return bad_type("each activity must be an object");
      Activity act;
      if (!a.contains("start_time")) return missing("activity.start_time");
      if (!a["start_time"].is_string() || !valid_time(a["start_time"].get<std::string>()))
        return bad_type("activity.start_time must be HH:MM, 24-hour");
      act.start_time = a["start_time"].get<std::string>();
      if (!a.contains("location")) return missing("activity.location");
      if (!a["location"].is_string()) return bad_type("activity.location must be a string");
      act.location = a["location"].get<std::string>();
      act.description = a.value("description", std::string());
      if (a.contains("description") && !a["description"].is_string())
        return bad_type("activity.description must be a string");
      if (!a.contains("cost")) return missing("activity.cost");
      auto cost = money_from_json(a["cost"]);
      if (!cost) return bad_type("activity.cost must be a non-negative amount like '40.00'");
      act.cost_cents = *cost;
      day.activities.push_back(std::move(act));
    }
    // Canonical order within a day is by start time.
    std::stable_sort(day.activities.begin(), day.activities.end(),
                     [](const Activity& x, const Activity& y) { return x.start_time < y.start_time; });
    plan.days.push_back(std::move(day));
  }

  if (!raw.contains("total_cost")) return missing("total_cost");
  auto total = money_from_json(raw["total_cost"]);
  if (!total) return bad_type("total_cost must be a non-negative amount like '4890.00'");
  plan.stated_total_cents = *total;

  return travel_to_payload(plan);
}

std::string TravelCodec::render_human(const json& payload) const {
  TravelPlan plan = travel_from_payload(payload);
  std::string out;
  out += "Travel Itinerary:\n";
  out += "- Days: " + std::to_string(plan.num_days) + "-day program\n";
  out += "- Hotel: " + plan.hotel_name + "\n";
  out += "- Total Cost: " + currency_ + format_money(plan.stated_total_cents) + "\n";
  out += "\nDetailed Schedule:\n";
  int day_no = 0;
  for (const auto& day : plan.days) {
    ++day_no;
    out += "Day " + std::to_string(day_no) + ": " + day.date + "\n";
    for (const auto& act : day.activities) {
      out += "- " + act.start_time + " - " + act.location;
      if (!act.description.empty()) out += " (" + act.description + ")";
      out += "\n";
    }
    out += "\n";
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out + "\n";
}

std::string TravelCodec::format_spec() const {
  return
      "Reply with exactly one machine block of this shape:\n"
      "===GENE-BEGIN kind=travel v=1===\n"
      "{\n"
      "  \"destination\": \"<city>\",\n"
      "  \"num_days\": <integer>,\n"
      "  \"hotel\": {\"name\": \"<hotel>\", \"total_cost\": \"<amount, e.g. 1600.00>\"},\n"
      "  \"days\": [\n"
      "    {\"date\": \"<yyyy-mm-dd>\", \"activities\": [\n"
      "      {\"start_time\": \"<HH:MM>\", \"location\": \"<place>\",\n"
      "       \"description\": \"<short note>\", \"cost\": \"<amount>\"}\n"
      "    ]}\n"
      "  ],\n"
      "  \"total_cost\": \"<amount, hotel plus all activities>\"\n"
      "}\n"
      "===GENE-END===\n"
      "Amounts are decimal strings with two fraction digits. Any prose outside\n"
      "the block is ignored.";
}

json TravelCodec::structural_crossover(const json& a, const json& b, SeededRng& rng) const {
  TravelPlan pa = travel_from_payload(a);
  TravelPlan pb = travel_from_payload(b);
  TravelPlan child;
  child.destination = pa.destination;

  const bool hotel_from_a = rng.below(2) == 0;
  const TravelPlan& hotel_src = hotel_from_a ? pa : pb;
  child.hotel_name = hotel_src.hotel_name;
  child.hotel_cost_cents = hotel_src.hotel_cost_cents;

  const size_t day_count = std::max(pa.days.size(), pb.days.size());
  for (size_t i = 0; i < day_count; ++i) {
    const bool from_a = rng.below(2) == 0;
    const TravelPlan& first = from_a ? pa : pb;
    const TravelPlan& second = from_a ? pb : pa;
    if (i < first.days.size()) {
      child.days.push_back(first.days[i]);
    } else if (i < second.days.size()) {
      child.days.push_back(second.days[i]);
    }
  }
  child.num_days = static_cast<int>(child.days.size());
  child.stated_total_cents = computed_total_cents(child);
  return travel_to_payload(child);
}

MutationResult TravelCodec::structural_mutate(const json& payload, SeededRng& rng) const {
  TravelPlan plan = travel_from_payload(payload);
  size_t slots = 0;
  for (const auto& day : plan.days) slots += day.activities.size();
  if (slots == 0 || catalog_.empty()) return {payload, false};

  size_t target = rng.below(slots);
  Activity* chosen = nullptr;
  for (auto& day : plan.days) {
    if (target < day.activities.size()) {
      chosen = &day.activities[target];
      break;
    }
    target -= day.activities.size();
  }

  std::vector<const CatalogActivity*> options;
  for (const auto& entry : catalog_) {
    if (entry.location != chosen->location) options.push_back(&entry);
  }
  if (options.empty()) return {payload, false};

  const CatalogActivity* pick = options[rng.below(options.size())];
  chosen->location = pick->location;
  chosen->description = pick->description;
  chosen->cost_cents = pick->cost_cents;
  plan.stated_total_cents = computed_total_cents(plan);
  return {travel_to_payload(plan), true};
}

std::vector<ConstraintSpec> travel_constraints(int64_t budget_cents, int required_days) {
  std::vector<ConstraintSpec> out;

  ConstraintSpec budget;
  budget.id = "budget";
  budget.severity = Severity::hard;
  budget.description = "total cost (hotel plus all activities) must not exceed " +
                       format_money(budget_cents);
  budget.penalty = ConstraintSpec::kDefaultHardPenalty;
  budget.check = [budget_cents](const Gene& g) {
    TravelPlan plan = travel_from_payload(g.payload());
    int64_t total = computed_total_cents(plan);
    std::vector<ConstraintViolation> vs;
    if (total > budget_cents) {
      ConstraintViolation v;
      v.message = "budget exceeded: costs add up to " + format_money(total) + " against a cap of " +
                  format_money(budget_cents);
      v.measured = static_cast<double>(total) / 100.0;
      v.limit = static_cast<double>(budget_cents) / 100.0;
      vs.push_back(std::move(v));
    }
    return vs;
  };
  out.push_back(std::move(budget));

  ConstraintSpec days;
  days.id = "day-count";
  days.severity = Severity::hard;
  days.description = "the itinerary must cover exactly " + std::to_string(required_days) + " days";
  days.penalty = ConstraintSpec::kDefaultHardPenalty;
  days.check = [required_days](const Gene& g) {
    const auto& day_list = g.payload()["days"];
    std::vector<ConstraintViolation> vs;
    if (static_cast<int>(day_list.size()) != required_days) {
      ConstraintViolation v;
      v.message = "itinerary has " + std::to_string(day_list.size()) + " days, expected " +
                  std::to_string(required_days);
      v.measured = static_cast<double>(day_list.size());
      v.limit = static_cast<double>(required_days);
      vs.push_back(std::move(v));
    }
    return vs;
  };
  out.push_back(std::move(days));

  ConstraintSpec consistency;
  consistency.id = "stated-total-consistency";
  consistency.severity = Severity::soft;
  consistency.description = "the stated total cost should equal the sum of the itemized costs";
  consistency.penalty = ConstraintSpec::kDefaultSoftPenalty;
  consistency.check = [](const Gene& g) {
    TravelPlan plan = travel_from_payload(g.payload());
    int64_t computed = computed_total_cents(plan);
    std::vector<ConstraintViolation> vs;
    if (std::abs(computed - plan.stated_total_cents) > 1) {
      ConstraintViolation v;
      v.message = "stated total " + format_money(plan.stated_total_cents) +
                  " disagrees with itemized sum " + format_money(computed);
      v.measured = static_cast<double>(plan.stated_total_cents) / 100.0;
      v.limit = static_cast<double>(computed) / 100.0;
      vs.push_back(std::move(v));
    }
    return vs;
  };
  out.push_back(std::move(consistency));

  return out;
}

}  // namespace evotext::tasks
