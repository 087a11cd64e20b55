#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "evotext/rng.hpp"
#include "evotext/template.hpp"

namespace evotext {

// Prompt roles double as the request purpose tag.
using Purpose = PromptRole;

enum class Backend { live, scripted, replay };

const char* to_string(Backend b);
Backend backend_from_string(const std::string& s);

struct Message {
  std::string role;  // "system" or "user"
  std::string content;
};

struct CompletionRequest {
  std::vector<Message> messages;
  double temperature = 0.0;        // [0, 2]
  int max_output_tokens = 2048;    // > 0
  Purpose purpose = Purpose::generation;
};

struct Usage {
  long input_tokens = 0;
  long output_tokens = 0;
};

struct CompletionResponse {
  std::string text;
  Usage usage;
  double latency_ms = 0.0;
  Backend backend = Backend::scripted;
};

enum class ProviderErrorKind {
  timeout,
  transport_failure,
  rate_limited,
  malformed_reply,
  replay_miss,
};

const char* to_string(ProviderErrorKind k);

struct ProviderError : std::runtime_error {
  ProviderError(ProviderErrorKind kind, const std::string& message, int attempts = 1)
      : std::runtime_error(message), kind(kind), attempts(attempts) {}
  ProviderErrorKind kind;
  int attempts;  // total attempts made before surfacing
};

struct RetryPolicy {
  int max_attempts = 3;
  int base_backoff_ms = 500;
  double backoff_multiplier = 2.0;
};

struct ProviderConfig {
  Backend backend = Backend::scripted;
  std::string endpoint;      // live: full chat-completions URL
  std::string model;         // live: model identifier
  std::string auth_env;      // live: NAME of the env var holding the token; the
                             // token itself is never stored or logged
  int timeout_ms = 30000;
  RetryPolicy retry;
  std::string cassette_path;  // record / replay
  int max_in_flight = 8;
  int max_output_tokens = 2048;
};

void check_provider_config(const ProviderConfig& cfg);  // throws std::invalid_argument

// Config echo for run files, checkpoints, and reports. Carries the auth env
// var NAME only; tokens are never serialized.
nlohmann::ordered_json provider_config_to_json(const ProviderConfig& cfg);
ProviderConfig provider_config_from_json(const nlohmann::ordered_json& j,
                                         bool reject_unknown = true);

// Digest identifying a request for cassette lookup: covers messages,
// temperature, and purpose tag.
std::string request_digest(const CompletionRequest& req);

// Completion interface. complete() is safe to call concurrently; an
// in-flight cap (from ProviderConfig.max_in_flight) is enforced here.
// Counters track every complete() invocation, by purpose.
class Provider {
 public:
  explicit Provider(int max_in_flight);
  virtual ~Provider() = default;

  CompletionResponse complete(const CompletionRequest& req);

  long total_calls() const { return total_calls_.load(); }
  long calls_for(Purpose p) const;

 protected:
  virtual CompletionResponse do_complete(const CompletionRequest& req) = 0;

 private:
  std::atomic<long> total_calls_{0};
  std::atomic<long> purpose_calls_[5] = {};
  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int free_slots_;
};

// --- Scripted backend --------------------------------------------------------
//
// An ordered rule table; the first rule whose purpose matches and whose
// pattern is a substring of the concatenated message contents wins. A request
// matching no rule is a test-configuration error, not a silent default.
// Responders are given a per-call rng seeded from the request digest so their
// output never depends on call arrival order.

struct ScriptedRule {
  std::optional<Purpose> purpose;  // nullopt matches any purpose
  std::string contains;            // "" matches everything
  std::function<std::string(const CompletionRequest&, SeededRng&)> respond;
};

ScriptedRule fixed_reply(std::optional<Purpose> purpose, std::string contains, std::string text);

struct ScriptConfigError : std::logic_error {
  using std::logic_error::logic_error;
};

class ScriptedProvider : public Provider {
 public:
  ScriptedProvider(std::vector<ScriptedRule> rules, uint64_t seed, int max_in_flight = 8);

 protected:
  CompletionResponse do_complete(const CompletionRequest& req) override;

 private:
  std::vector<ScriptedRule> rules_;
  uint64_t seed_;
};

// --- Cassette record / replay -------------------------------------------------
//
// JSON-lines file, one exchange per line:
//   {"digest":..,"purpose":..,"request":{messages,temperature,max_output_tokens},
//    "response":{"text":..}}

class CassetteWriter {
 public:
  explicit CassetteWriter(const std::string& path);  // truncates / creates
  void append(const CompletionRequest& req, const CompletionResponse& resp);

 private:
  std::mutex mutex_;
  std::string path_;
};

// Wraps any provider and records every exchange.
class RecordingProvider : public Provider {
 public:
  RecordingProvider(Provider& inner, std::shared_ptr<CassetteWriter> writer, int max_in_flight = 8);

 protected:
  CompletionResponse do_complete(const CompletionRequest& req) override;

 private:
  Provider& inner_;
  std::shared_ptr<CassetteWriter> writer_;
};

// Replays recorded responses by request digest. Repeated identical requests
// consume entries in recorded order. A digest with no remaining entry is a
// fatal ReplayMiss.
class ReplayProvider : public Provider {
 public:
  explicit ReplayProvider(const std::string& cassette_path, int max_in_flight = 8);

 protected:
  CompletionResponse do_complete(const CompletionRequest& req) override;

 private:
  std::mutex mutex_;
  std::map<std::string, std::deque<std::string>> entries_;
};

// --- Live backend --------------------------------------------------------------

struct HttpRequest {
  std::string url;
  std::string body;  // JSON
  std::map<std::string, std::string> headers;
  int timeout_ms = 30000;
};

struct HttpResult {
  int status = 0;
  std::string body;
  bool transport_error = false;
  bool timed_out = false;
  std::string error;
};

using HttpTransport = std::function<HttpResult(const HttpRequest&)>;
using SleepFn = std::function<void(int /*ms*/)>;

// Default transport backed by cpp-httplib.
HttpTransport default_http_transport();

// Speaks the common chat-completions HTTP JSON protocol. Transient failures
// (timeouts, connection errors, 408/429/5xx) are retried up to
// retry.max_attempts with exponential backoff; delays get +-10% jitter drawn
// from a seeded rng so backoff schedules are reproducible in tests.
class LiveProvider : public Provider {
 public:
  LiveProvider(ProviderConfig config, uint64_t jitter_seed,
               HttpTransport transport = default_http_transport(),
               SleepFn sleep = nullptr);

  // Reads the token from the configured env var. Throws std::invalid_argument
  // when unset; callers check this before any network activity.
  static std::string auth_token_or_throw(const ProviderConfig& config);

 protected:
  CompletionResponse do_complete(const CompletionRequest& req) override;

 private:
  ProviderConfig config_;
  HttpTransport transport_;
  SleepFn sleep_;
  std::mutex rng_mutex_;
  SeededRng jitter_rng_;
};

}  // namespace evotext
