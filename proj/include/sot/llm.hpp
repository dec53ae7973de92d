#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace sot {

// Appendix-B run parameters used unless a run overrides them.
inline constexpr double kDefaultTemperature = 1.0;
inline constexpr int kDefaultMaxTokens = 8000;

enum class Role { system, user, assistant };
std::string_view to_string(Role role);
std::optional<Role> parse_role(std::string_view s);

struct ChatMessage {
  Role role = Role::user;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct CompletionRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  double temperature = kDefaultTemperature;
  int max_tokens = kDefaultMaxTokens;

  bool operator==(const CompletionRequest&) const = default;
};

// Throws PreconditionError when the request breaks an invariant.
void check_request(const CompletionRequest& req);

struct CompletionResult {
  std::string text;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  std::int64_t latency_ms = 0;
  std::string provider_id;
  bool from_cache = false;
  int retry_count = 0;

  bool operator==(const CompletionResult&) const = default;
};

struct MockRule {
  std::string match;     // substring of the concatenated prompt
  std::string response;
  std::string model_id;  // empty matches any model
};

struct ProviderConfig {
  std::string provider_id;
  std::string kind = "openai";  // "openai" or "mock"
  std::string base_url;
  std::string api_key_env;
  int max_retries = 3;
  int requests_per_minute = 60;
  double price_per_1k_prompt_tokens = 0.0;
  double price_per_1k_completion_tokens = 0.0;
  int timeout_s = 600;
  std::vector<MockRule> mock_rules;

  double cost(std::int64_t prompt_tokens, std::int64_t completion_tokens) const {
    return static_cast<double>(prompt_tokens) / 1000.0 *
               price_per_1k_prompt_tokens +
           static_cast<double>(completion_tokens) / 1000.0 *
               price_per_1k_completion_tokens;
  }
};

ProviderConfig provider_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ProviderConfig& cfg);

nlohmann::json to_json(const ChatMessage& m);
nlohmann::json to_json(const CompletionRequest& req);
nlohmann::json to_json(const CompletionResult& res);
CompletionRequest request_from_json(const nlohmann::json& j);
CompletionResult result_from_json(const nlohmann::json& j);

class ProviderError : public std::runtime_error {
 public:
  enum class Kind { auth, exhausted_retries, malformed_response, timeout, http };

  ProviderError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view to_string(ProviderError::Kind kind);

// ---------------------------------------------------------------------------
// Time source. The virtual clock lets rate-limit and backoff logic be tested
// without sleeping.

class Clock {
 public:
  using Duration = std::chrono::milliseconds;
  using TimePoint = std::chrono::time_point<std::chrono::steady_clock, Duration>;

  virtual ~Clock() = default;
  virtual TimePoint now() = 0;
  virtual void sleep_until(TimePoint t) = 0;
};

class SteadyClock final : public Clock {
 public:
  TimePoint now() override;
  void sleep_until(TimePoint t) override;
};

class VirtualClock final : public Clock {
 public:
  TimePoint now() override;
  void sleep_until(TimePoint t) override;
  void advance(Duration d);

 private:
  std::mutex mu_;
  TimePoint now_{};
};

// Sliding-window limiter: any window of 60 s observes at most
// `requests_per_minute` dispatches. Thread-safe.
class RateLimiter {
 public:
  RateLimiter(int requests_per_minute, Clock& clock);
  // Blocks (via the clock) until a dispatch slot is free, then claims it.
  // Returns the dispatch time.
  Clock::TimePoint acquire();

 private:
  int limit_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Clock::TimePoint> recent_;
};

// ---------------------------------------------------------------------------
// HTTP transport.

struct HttpResponse {
  int status = 0;
  std::string body;
};

class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, bool timeout)
      : std::runtime_error(what), timeout_(timeout) {}
  bool is_timeout() const { return timeout_; }

 private:
  bool timeout_;
};

class HttpTransport {
 public:
  using Headers = std::vector<std::pair<std::string, std::string>>;

  virtual ~HttpTransport() = default;
  // Throws TransportError when no HTTP response was obtained.
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const Headers& headers,
                            std::chrono::seconds timeout) = 0;
};

// cpp-httplib backed transport; supports http:// and https:// URLs.
std::unique_ptr<HttpTransport> make_http_transport();

// ---------------------------------------------------------------------------
// Providers.

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual CompletionResult complete(const CompletionRequest& req) = 0;
  virtual const ProviderConfig& config() const = 0;
};

// OpenAI-compatible chat-completions client with retries and rate limiting.
class OpenAiProvider final : public ChatProvider {
 public:
  OpenAiProvider(ProviderConfig cfg, std::shared_ptr<HttpTransport> transport,
                 std::shared_ptr<Clock> clock, std::uint64_t jitter_seed = 0);

  CompletionResult complete(const CompletionRequest& req) override;
  const ProviderConfig& config() const override { return cfg_; }

  static std::string request_body(const CompletionRequest& req);
  // Extracts choices[0].message.content and usage; throws
  // ProviderError(malformed_response) when the shape is wrong.
  static CompletionResult parse_response(const std::string& body);

 private:
  Clock::Duration backoff(int attempt);

  ProviderConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  std::mutex rng_mu_;
  std::mt19937_64 rng_;
};

// Scripted offline backend. Rules are tried in order against the
// concatenated message contents; when none matches, the reply is a
// deterministic function of (seed, model, prompt).
class MockProvider final : public ChatProvider {
 public:
  explicit MockProvider(ProviderConfig cfg, std::uint64_t seed = 0);

  CompletionResult complete(const CompletionRequest& req) override;
  const ProviderConfig& config() const override { return cfg_; }

  void add_rule(MockRule rule);
  std::size_t call_count() const { return calls_.load(); }
  void reset_call_count() { calls_ = 0; }

  static std::string fallback_text(const CompletionRequest& req,
                                   std::uint64_t seed);

 private:
  ProviderConfig cfg_;
  std::uint64_t seed_;
  mutable std::mutex mu_;
  std::atomic<std::size_t> calls_{0};
};

// Builds a provider from its configuration. Real providers verify that
// `api_key_env` is set before anything touches the network.
std::unique_ptr<ChatProvider> make_provider(
    const ProviderConfig& cfg, std::uint64_t seed,
    std::shared_ptr<HttpTransport> transport = nullptr,
    std::shared_ptr<Clock> clock = nullptr);

// complete(req, cfg): one-shot convenience over make_provider.
CompletionResult complete(const CompletionRequest& req,
                          const ProviderConfig& cfg);

class ProviderRegistry {
 public:
  void add(std::shared_ptr<ChatProvider> provider);
  ChatProvider& get(const std::string& provider_id) const;
  bool contains(const std::string& provider_id) const;

 private:
  std::map<std::string, std::shared_ptr<ChatProvider>> providers_;
};

// ---------------------------------------------------------------------------
// Content-addressed response cache.

// Canonical serialization used for hashing: sorted keys, no whitespace,
// temperature with at least one fractional digit.
std::string canonical_request(const CompletionRequest& req);
// SHA-256 of canonical_request, 64 lowercase hex chars.
std::string cache_key(const CompletionRequest& req);

struct CacheStats {
  std::size_t entries = 0;
  std::uintmax_t bytes = 0;
};

class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path entry_path(const std::string& key) const;

  // Missing, unreadable or mismatching entries are misses.
  std::optional<CompletionResult> lookup(const CompletionRequest& req) const;
  // Write-then-rename; concurrent writers of one key are idempotent.
  void store(const CompletionRequest& req, const CompletionResult& result) const;

  CacheStats stats() const;
  std::size_t clear() const;

 private:
  std::filesystem::path dir_;
};

// Returns the cached result (from_cache = true) or calls the provider and
// persists the result (from_cache = false).
CompletionResult cached_complete(const CompletionRequest& req,
                                 ChatProvider& provider,
                                 const ResponseCache* cache);

}  // namespace sot
