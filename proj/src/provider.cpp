#include "evotext/provider.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace evotext {

namespace {

using njson = nlohmann::json;

double now_ms() {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

void check_request(const CompletionRequest& req) {
  if (req.messages.empty()) throw std::invalid_argument("completion request has no messages");
  for (const auto& m : req.messages) {
    if (m.content.empty()) throw std::invalid_argument("completion request has an empty message");
    if (m.role != "system" && m.role != "user")
      throw std::invalid_argument("completion message role must be 'system' or 'user'");
  }
  if (req.temperature < 0.0 || req.temperature > 2.0)
    throw std::invalid_argument("completion temperature must be in [0, 2]");
  if (req.max_output_tokens <= 0)
    throw std::invalid_argument("completion max_output_tokens must be positive");
}

}  // namespace

const char* to_string(Backend b) {
  switch (b) {
    case Backend::live: return "live";
    case Backend::scripted: return "scripted";
    case Backend::replay: return "replay";
  }
  return "unknown";
}

Backend backend_from_string(const std::string& s) {
  if (s == "live") return Backend::live;
  if (s == "scripted") return Backend::scripted;
  if (s == "replay") return Backend::replay;
  throw std::invalid_argument("unknown backend: '" + s + "'");
}

const char* to_string(ProviderErrorKind k) {
  switch (k) {
    case ProviderErrorKind::timeout: return "timeout";
    case ProviderErrorKind::transport_failure: return "transport-failure";
    case ProviderErrorKind::rate_limited: return "rate-limited";
    case ProviderErrorKind::malformed_reply: return "malformed-provider-reply";
    case ProviderErrorKind::replay_miss: return "replay-miss";
  }
  return "unknown";
}

void check_provider_config(const ProviderConfig& cfg) {
  if (cfg.retry.max_attempts < 1)
    throw std::invalid_argument("provider retry.max_attempts must be >= 1");
  if (cfg.timeout_ms <= 0) throw std::invalid_argument("provider timeout_ms must be > 0");
  if (cfg.max_in_flight < 1) throw std::invalid_argument("provider max_in_flight must be >= 1");
  if (cfg.max_output_tokens < 1)
    throw std::invalid_argument("provider max_output_tokens must be >= 1");
  if (cfg.backend == Backend::live && cfg.endpoint.empty())
    throw std::invalid_argument("live backend needs an endpoint URL");
  if (cfg.backend == Backend::replay && cfg.cassette_path.empty())
    throw std::invalid_argument("replay backend needs a cassette path");
}

nlohmann::ordered_json provider_config_to_json(const ProviderConfig& cfg) {
  return nlohmann::ordered_json{
      {"backend", to_string(cfg.backend)},
      {"endpoint", cfg.endpoint},
      {"model", cfg.model},
      {"auth_env", cfg.auth_env},
      {"timeout_ms", cfg.timeout_ms},
      {"retry",
       {{"max_attempts", cfg.retry.max_attempts},
        {"base_backoff_ms", cfg.retry.base_backoff_ms},
        {"backoff_multiplier", cfg.retry.backoff_multiplier}}},
      {"max_in_flight", cfg.max_in_flight},
      {"max_output_tokens", cfg.max_output_tokens},
  };
}

ProviderConfig provider_config_from_json(const nlohmann::ordered_json& j, bool reject_unknown) {
  if (!j.is_object()) throw std::invalid_argument("provider config must be a JSON object");
  static const std::set<std::string> known = {"backend",    "endpoint",      "model",
                                              "auth_env",   "timeout_ms",    "retry",
                                              "max_in_flight", "max_output_tokens"};
  if (reject_unknown) {
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key))
        throw std::invalid_argument("unknown provider config key: '" + key + "'");
    }
  }
  ProviderConfig cfg;
  if (j.contains("backend")) cfg.backend = backend_from_string(j["backend"].get<std::string>());
  cfg.endpoint = j.value("endpoint", cfg.endpoint);
  cfg.model = j.value("model", cfg.model);
  cfg.auth_env = j.value("auth_env", cfg.auth_env);
  cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
  if (j.contains("retry")) {
    const auto& r = j["retry"];
    if (reject_unknown) {
      for (const auto& [key, value] : r.items()) {
        if (key != "max_attempts" && key != "base_backoff_ms" && key != "backoff_multiplier")
          throw std::invalid_argument("unknown provider retry key: '" + key + "'");
      }
    }
    cfg.retry.max_attempts = r.value("max_attempts", cfg.retry.max_attempts);
    cfg.retry.base_backoff_ms = r.value("base_backoff_ms", cfg.retry.base_backoff_ms);
    cfg.retry.backoff_multiplier = r.value("backoff_multiplier", cfg.retry.backoff_multiplier);
  }
  cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
  cfg.max_output_tokens = j.value("max_output_tokens", cfg.max_output_tokens);
  return cfg;
}

std::string request_digest(const CompletionRequest& req) {
  char temp[32];
  std::snprintf(temp, sizeof(temp), "%.6g", req.temperature);
  std::string blob = std::string(to_string(req.purpose)) + "\x1d" + temp;
  for (const auto& m : req.messages) {
    blob += '\x1e';
    blob += m.role;
    blob += '\x1f';
    blob += m.content;
  }
  return hash_hex(fnv1a64(blob));
}

Provider::Provider(int max_in_flight) : free_slots_(max_in_flight) {
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
}

long Provider::calls_for(Purpose p) const {
  return purpose_calls_[static_cast<size_t>(p)].load();
}

CompletionResponse Provider::complete(const CompletionRequest& req) {
  check_request(req);
  {
    std::unique_lock lock(slots_mutex_);
    slots_cv_.wait(lock, [&] { return free_slots_ > 0; });
    --free_slots_;
  }
  total_calls_.fetch_add(1);
  purpose_calls_[static_cast<size_t>(req.purpose)].fetch_add(1);
  try {
    CompletionResponse resp = do_complete(req);
    {
      std::lock_guard lock(slots_mutex_);
      ++free_slots_;
    }
    slots_cv_.notify_one();
    return resp;
  } catch (...) {
    {
      std::lock_guard lock(slots_mutex_);
      ++free_slots_;
    }
    slots_cv_.notify_one();
    throw;
  }
}

// --- Scripted ----------------------------------------------------------------

ScriptedRule fixed_reply(std::optional<Purpose> purpose, std::string contains, std::string text) {
  ScriptedRule rule;
  rule.purpose = purpose;
  rule.contains = std::move(contains);
  rule.respond = [text = std::move(text)](const CompletionRequest&, SeededRng&) { return text; };
  return rule;
}

ScriptedProvider::ScriptedProvider(std::vector<ScriptedRule> rules, uint64_t seed, int max_in_flight)
    : Provider(max_in_flight), rules_(std::move(rules)), seed_(seed) {}

CompletionResponse ScriptedProvider::do_complete(const CompletionRequest& req) {
  std::string prompt;
  for (const auto& m : req.messages) {
    prompt += m.content;
    prompt += '\n';
  }
  for (const auto& rule : rules_) {
    if (rule.purpose && *rule.purpose != req.purpose) continue;
    if (!rule.contains.empty() && prompt.find(rule.contains) == std::string::npos) continue;
    SeededRng rng(seed_ ^ fnv1a64(request_digest(req)));
    CompletionResponse resp;
    resp.text = rule.respond(req, rng);
    resp.usage.input_tokens = static_cast<long>(prompt.size() / 4);
    resp.usage.output_tokens = static_cast<long>(resp.text.size() / 4);
    resp.latency_ms = 0.0;
    resp.backend = Backend::scripted;
    return resp;
  }
  throw ScriptConfigError("scripted provider has no rule for purpose '" +
                          std::string(to_string(req.purpose)) + "'; prompt was:\n" + prompt);
}

// --- Cassette ------------------------------------------------------------------

CassetteWriter::CassetteWriter(const std::string& path) : path_(path) {
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open cassette for writing: " + path_);
}

void CassetteWriter::append(const CompletionRequest& req, const CompletionResponse& resp) {
  njson messages = njson::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  njson entry = {
      {"digest", request_digest(req)},
      {"purpose", to_string(req.purpose)},
      {"request",
       {{"messages", messages},
        {"temperature", req.temperature},
        {"max_output_tokens", req.max_output_tokens}}},
      {"response", {{"text", resp.text}}},
  };
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  if (!out) throw std::runtime_error("cassette write failure: " + path_);
  out << entry.dump() << '\n';
}

RecordingProvider::RecordingProvider(Provider& inner, std::shared_ptr<CassetteWriter> writer,
                                     int max_in_flight)
    : Provider(max_in_flight), inner_(inner), writer_(std::move(writer)) {}

CompletionResponse RecordingProvider::do_complete(const CompletionRequest& req) {
  CompletionResponse resp = inner_.complete(req);
  writer_->append(req, resp);
  return resp;
}

ReplayProvider::ReplayProvider(const std::string& cassette_path, int max_in_flight)
    : Provider(max_in_flight) {
  std::ifstream in(cassette_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open cassette: " + cassette_path);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    njson entry = njson::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.contains("digest") || !entry.contains("response")) {
      throw std::runtime_error("malformed cassette entry at line " + std::to_string(line_no));
    }
    entries_[entry["digest"].get<std::string>()].push_back(
        entry["response"]["text"].get<std::string>());
  }
}

CompletionResponse ReplayProvider::do_complete(const CompletionRequest& req) {
  const std::string digest = request_digest(req);
  std::lock_guard lock(mutex_);
  auto it = entries_.find(digest);
  if (it == entries_.end() || it->second.empty()) {
    throw ProviderError(ProviderErrorKind::replay_miss,
                        "no recorded response for request digest " + digest);
  }
  CompletionResponse resp;
  resp.text = it->second.front();
  it->second.pop_front();
  resp.backend = Backend::replay;
  return resp;
}

// --- Live ----------------------------------------------------------------------

LiveProvider::LiveProvider(ProviderConfig config, uint64_t jitter_seed, HttpTransport transport,
                           SleepFn sleep)
    : Provider(config.max_in_flight),
      config_(std::move(config)),
      transport_(std::move(transport)),
      sleep_(sleep ? std::move(sleep)
                   : [](int ms) { std::this_thread::sleep_for(std::chrono::milliseconds(ms)); }),
      jitter_rng_(jitter_seed) {
  check_provider_config(config_);
}

std::string LiveProvider::auth_token_or_throw(const ProviderConfig& config) {
  if (config.auth_env.empty())
    throw std::invalid_argument("live backend needs auth_env (env var name holding the token)");
  const char* token = std::getenv(config.auth_env.c_str());
  if (!token || !*token)
    throw std::invalid_argument("environment variable " + config.auth_env + " is not set");
  return token;
}

CompletionResponse LiveProvider::do_complete(const CompletionRequest& req) {
  const std::string token = auth_token_or_throw(config_);

  njson messages = njson::array();
  for (const auto& m : req.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  njson body = {
      {"model", config_.model},
      {"messages", messages},
      {"temperature", req.temperature},
      {"max_tokens", req.max_output_tokens},
  };

  HttpRequest http;
  http.url = config_.endpoint;
  http.body = body.dump();
  http.headers = {{"Authorization", "Bearer " + token}, {"Content-Type", "application/json"}};
  http.timeout_ms = config_.timeout_ms;

  const int max_attempts = config_.retry.max_attempts;
  std::optional<ProviderError> last_error;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    if (attempt > 1) {
      double base = static_cast<double>(config_.retry.base_backoff_ms) *
                    std::pow(config_.retry.backoff_multiplier, attempt - 2);
      double jitter;
      {
        std::lock_guard lock(rng_mutex_);
        jitter = 0.9 + 0.2 * jitter_rng_.unit();
      }
      sleep_(static_cast<int>(base * jitter));
    }

    const double started = now_ms();
    HttpResult result = transport_(http);
    const double elapsed = now_ms() - started;

    if (result.timed_out) {
      last_error = ProviderError(ProviderErrorKind::timeout, "request timed out", attempt);
      continue;
    }
    if (result.transport_error) {
      last_error = ProviderError(ProviderErrorKind::transport_failure,
                                 "transport failure: " + result.error, attempt);
      continue;
    }
    if (result.status == 429) {
      last_error = ProviderError(ProviderErrorKind::rate_limited, "rate limited (HTTP 429)", attempt);
      continue;
    }
    if (result.status == 408 || result.status >= 500) {
      last_error = ProviderError(ProviderErrorKind::transport_failure,
                                 "server error (HTTP " + std::to_string(result.status) + ")", attempt);
      continue;
    }
    if (result.status != 200) {
      throw ProviderError(ProviderErrorKind::transport_failure,
                          "request rejected (HTTP " + std::to_string(result.status) + ")", attempt);
    }

    njson reply = njson::parse(result.body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() || !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string()) {
      throw ProviderError(ProviderErrorKind::malformed_reply,
                          "reply is not a chat completion object", attempt);
    }
    CompletionResponse resp;
    resp.text = reply["choices"][0]["message"]["content"].get<std::string>();
    if (reply.contains("usage") && reply["usage"].is_object()) {
      resp.usage.input_tokens = reply["usage"].value("prompt_tokens", 0);
      resp.usage.output_tokens = reply["usage"].value("completion_tokens", 0);
    }
    resp.latency_ms = elapsed;
    resp.backend = Backend::live;
    return resp;
  }
  last_error->attempts = max_attempts;
  throw *last_error;
}

}  // namespace evotext
