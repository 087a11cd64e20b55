#include "evotext/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace evotext {

namespace {

bool is_number_char(char c) { return std::isdigit(static_cast<unsigned char>(c)) || c == '.'; }

// Characters that glue a digit run to surrounding text ("4-day", "7/10",
// "top_3", "95%") and disqualify it as a standalone number.
bool glues(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '%' || c == '/' ||
         c == '-' || c == '.';
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty() || s == ".") return std::nullopt;
  try {
    size_t consumed = 0;
    double v = std::stod(s, &consumed);
    if (consumed != s.size()) return std::nullopt;
    return v;
  } catch (...) {
    return std::nullopt;
  }
}

// First numeric token on the line after the "SCORE:" prefix, if any.
std::optional<double> score_line_value(const std::string& line) {
  size_t i = line.find(':') + 1;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  size_t start = i;
  while (i < line.size() && is_number_char(line[i])) ++i;
  return parse_number(line.substr(start, i - start));
}

std::string trimmed(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  size_t e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

const char* to_string(ConstraintMode m) {
  return m == ConstraintMode::filter ? "filter" : "penalty";
}

ConstraintMode constraint_mode_from_string(const std::string& s) {
  if (s == "filter") return ConstraintMode::filter;
  if (s == "penalty") return ConstraintMode::penalty;
  throw std::invalid_argument("unknown constraint mode: '" + s + "'");
}

std::variant<double, ScoreParseFailure> extract_score(const std::string& text) {
  // Pass 1: SCORE lines.
  bool saw_score_line = false;
  std::optional<double> last_score;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = trimmed(text.substr(pos, eol == std::string::npos ? eol : eol - pos));
    if (line.rfind("SCORE:", 0) == 0) {
      saw_score_line = true;
      if (auto v = score_line_value(line)) last_score = v;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  if (saw_score_line) {
    if (!last_score) return ScoreParseFailure{"SCORE line carries no numeric value"};
    double x = *last_score;
    if (x <= 0.0 || x >= 11.0)
      return ScoreParseFailure{"SCORE value " + std::to_string(x) + " is outside (0, 11)"};
    return std::clamp(x, 1.0, 10.0);
  }

  // Pass 2: first standalone number in [1,10].
  for (size_t i = 0; i < text.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(text[i]))) continue;
    size_t start = i;
    // Back up over a leading decimal point ("give it .5" is not a score anyway).
    size_t end = i;
    while (end < text.size() && is_number_char(text[end])) ++end;
    bool left_glued = start > 0 && glues(text[start - 1]);
    bool right_glued = end < text.size() && glues(text[end]);
    // A trailing '.' is sentence punctuation, not glue.
    if (right_glued && text[end] == '.' && (end + 1 == text.size() || !glues(text[end + 1]))) {
      right_glued = false;
    }
    if (!left_glued && !right_glued) {
      if (auto v = parse_number(text.substr(start, end - start))) {
        if (*v >= 1.0 && *v <= 10.0) return *v;
      }
    }
    i = end;
  }
  return ScoreParseFailure{"no SCORE line and no standalone number in [1,10]"};
}

std::string build_score_prompt(const Gene& gene, const TaskDefinition& task) {
  Bindings bindings = task.base_bindings();
  bindings["candidate"] = to_text(gene, *task.codec);
  bindings["rubric"] = task.rubric;
  return render(task.templates.evaluation, bindings);
}

FitnessReport evaluate_gene(const Gene& gene, const TaskDefinition& task,
                            const EvalSettings& settings, const CompletionFn& complete) {
  FitnessReport report;
  report.violations = validate(gene, task.constraints);

  const bool hard = has_hard_violation(report.violations);
  if (settings.mode == ConstraintMode::filter && hard) {
    // Short-circuit: no model call for an infeasible candidate.
    for (auto& v : report.violations)
      if (v.severity == Severity::hard) v.penalty = 0.0;
    report.filtered = true;
    return report;
  }

  CompletionRequest req;
  req.messages = {{"user", build_score_prompt(gene, task)}};
  req.temperature = 0.0;  // scoring wants determinism
  req.max_output_tokens = settings.max_output_tokens;
  req.purpose = Purpose::evaluation;

  std::vector<double> scores;
  for (int sample = 0; sample < settings.eval_samples; ++sample) {
    bool got = false;
    for (int attempt = 0; attempt < 2 && !got; ++attempt) {  // one retry per sample
      CompletionResponse resp = complete(req);
      auto extracted = extract_score(resp.text);
      if (std::holds_alternative<double>(extracted)) {
        scores.push_back(std::get<double>(extracted));
        if (report.explanation.empty()) report.explanation = resp.text;
        got = true;
      }
    }
  }

  const int failed = settings.eval_samples - static_cast<int>(scores.size());
  if (failed > settings.eval_samples / 2) {
    throw EvaluationFailure("score extraction failed for " + std::to_string(failed) + " of " +
                            std::to_string(settings.eval_samples) + " samples");
  }
  report.samples_used = static_cast<int>(scores.size());

  double raw = 0.0;
  if (settings.aggregation == ScoreAggregation::mean) {
    for (double s : scores) raw += s;
    raw /= static_cast<double>(scores.size());
  } else {
    std::sort(scores.begin(), scores.end());
    size_t n = scores.size();
    raw = (n % 2 == 1) ? scores[n / 2] : (scores[n / 2 - 1] + scores[n / 2]) / 2.0;
  }
  report.raw_score = raw;
  report.normalized = normalize_score(raw);

  double penalty_sum = 0.0;
  for (const auto& v : report.violations) {
    if (v.severity == Severity::hard && settings.mode != ConstraintMode::penalty) continue;
    penalty_sum += v.penalty;
  }
  report.effective = normalize_score(std::max(1.0, raw - penalty_sum));
  return report;
}

}  // namespace evotext
