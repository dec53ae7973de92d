#include "sot/llm.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include "sot/errors.hpp"
#include "sot/hashing.hpp"

namespace sot {

using nlohmann::json;

std::string_view to_string(Role role) {
  switch (role) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view s) {
  if (s == "system") return Role::system;
  if (s == "user") return Role::user;
  if (s == "assistant") return Role::assistant;
  return std::nullopt;
}

std::string_view to_string(ProviderError::Kind kind) {
  switch (kind) {
    case ProviderError::Kind::auth: return "auth";
    case ProviderError::Kind::exhausted_retries: return "exhausted_retries";
    case ProviderError::Kind::malformed_response: return "malformed_response";
    case ProviderError::Kind::timeout: return "timeout";
    case ProviderError::Kind::http: return "http";
  }
  return "unknown";
}

void check_request(const CompletionRequest& req) {
  if (req.model_id.empty()) throw PreconditionError("model_id is empty");
  if (req.messages.empty()) throw PreconditionError("messages is empty");
  if (!(req.temperature >= 0.0 && req.temperature <= 2.0)) {
    throw PreconditionError("temperature must lie in [0, 2]");
  }
  if (req.max_tokens < 1) throw PreconditionError("max_tokens must be >= 1");
  for (const auto& m : req.messages) {
    if (m.role != Role::assistant && m.content.empty()) {
      throw PreconditionError("empty " + std::string(to_string(m.role)) +
                              " message");
    }
  }
}

json to_json(const ChatMessage& m) {
  return {{"role", to_string(m.role)}, {"content", m.content}};
}

json to_json(const CompletionRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back(to_json(m));
  return {{"model_id", req.model_id},
          {"messages", messages},
          {"temperature", req.temperature},
          {"max_tokens", req.max_tokens}};
}

json to_json(const CompletionResult& res) {
  return {{"text", res.text},
          {"prompt_tokens", res.prompt_tokens},
          {"completion_tokens", res.completion_tokens},
          {"latency_ms", res.latency_ms},
          {"provider_id", res.provider_id},
          {"from_cache", res.from_cache},
          {"retry_count", res.retry_count}};
}

CompletionRequest request_from_json(const json& j) {
  CompletionRequest req;
  req.model_id = j.at("model_id").get<std::string>();
  for (const auto& m : j.at("messages")) {
    auto role = parse_role(m.at("role").get<std::string>());
    if (!role) throw std::runtime_error("bad message role");
    req.messages.push_back({*role, m.at("content").get<std::string>()});
  }
  req.temperature = j.at("temperature").get<double>();
  req.max_tokens = j.at("max_tokens").get<int>();
  return req;
}

CompletionResult result_from_json(const json& j) {
  CompletionResult res;
  res.text = j.at("text").get<std::string>();
  res.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  res.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  res.latency_ms = j.value("latency_ms", std::int64_t{0});
  res.provider_id = j.value("provider_id", std::string());
  res.from_cache = j.value("from_cache", false);
  res.retry_count = j.value("retry_count", 0);
  return res;
}

ProviderConfig provider_config_from_json(const json& j) {
  static const std::vector<std::string> kKeys = {
      "provider_id", "kind", "base_url", "api_key_env", "max_retries",
      "requests_per_minute", "price_per_1k_prompt_tokens",
      "price_per_1k_completion_tokens", "timeout_s", "mock_rules"};
  if (!j.is_object()) throw ConfigError("provider must be an object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw ConfigError("provider: unknown key \"" + key + "\"");
    }
  }
  ProviderConfig cfg;
  try {
    cfg.provider_id = j.at("provider_id").get<std::string>();
    cfg.kind = j.value("kind", std::string("openai"));
    cfg.base_url = j.value("base_url", std::string());
    cfg.api_key_env = j.value("api_key_env", std::string());
    cfg.max_retries = j.value("max_retries", 3);
    cfg.requests_per_minute = j.value("requests_per_minute", 60);
    cfg.price_per_1k_prompt_tokens = j.value("price_per_1k_prompt_tokens", 0.0);
    cfg.price_per_1k_completion_tokens =
        j.value("price_per_1k_completion_tokens", 0.0);
    cfg.timeout_s = j.value("timeout_s", 600);
    if (auto it = j.find("mock_rules"); it != j.end()) {
      for (const auto& r : *it) {
        cfg.mock_rules.push_back({r.at("match").get<std::string>(),
                                  r.at("response").get<std::string>(),
                                  r.value("model_id", std::string())});
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("provider: ") + e.what());
  }
  if (cfg.provider_id.empty()) throw ConfigError("provider_id is empty");
  if (cfg.kind != "openai" && cfg.kind != "mock") {
    throw ConfigError("provider \"" + cfg.provider_id + "\": unknown kind \"" +
                      cfg.kind + "\"");
  }
  if (cfg.kind == "openai" && cfg.base_url.empty()) {
    throw ConfigError("provider \"" + cfg.provider_id + "\": base_url required");
  }
  if (cfg.requests_per_minute < 1) {
    throw ConfigError("provider \"" + cfg.provider_id +
                      "\": requests_per_minute must be positive");
  }
  if (cfg.max_retries < 0 || cfg.price_per_1k_prompt_tokens < 0 ||
      cfg.price_per_1k_completion_tokens < 0) {
    throw ConfigError("provider \"" + cfg.provider_id +
                      "\": retries and prices must be non-negative");
  }
  return cfg;
}

json to_json(const ProviderConfig& cfg) {
  json rules = json::array();
  for (const auto& r : cfg.mock_rules) {
    rules.push_back(
        {{"match", r.match}, {"response", r.response}, {"model_id", r.model_id}});
  }
  return {{"provider_id", cfg.provider_id},
          {"kind", cfg.kind},
          {"base_url", cfg.base_url},
          {"api_key_env", cfg.api_key_env},
          {"max_retries", cfg.max_retries},
          {"requests_per_minute", cfg.requests_per_minute},
          {"price_per_1k_prompt_tokens", cfg.price_per_1k_prompt_tokens},
          {"price_per_1k_completion_tokens", cfg.price_per_1k_completion_tokens},
          {"timeout_s", cfg.timeout_s},
          {"mock_rules", rules}};
}

// --- clocks ----------------------------------------------------------------

Clock::TimePoint SteadyClock::now() {
  return std::chrono::time_point_cast<Duration>(
      std::chrono::steady_clock::now());
}

void SteadyClock::sleep_until(TimePoint t) { std::this_thread::sleep_until(t); }

Clock::TimePoint VirtualClock::now() {
  std::lock_guard lock(mu_);
  return now_;
}

void VirtualClock::sleep_until(TimePoint t) {
  std::lock_guard lock(mu_);
  if (t > now_) now_ = t;
}

void VirtualClock::advance(Duration d) {
  std::lock_guard lock(mu_);
  now_ += d;
}

RateLimiter::RateLimiter(int requests_per_minute, Clock& clock)
    : limit_(std::max(1, requests_per_minute)), clock_(clock) {}

Clock::TimePoint RateLimiter::acquire() {
  constexpr auto kWindow = std::chrono::seconds(60);
  for (;;) {
    Clock::TimePoint wait_until;
    {
      std::lock_guard lock(mu_);
      auto now = clock_.now();
      while (!recent_.empty() && recent_.front() + kWindow <= now) {
        recent_.pop_front();
      }
      if (static_cast<int>(recent_.size()) < limit_) {
        recent_.push_back(now);
        return now;
      }
      wait_until = recent_.front() + kWindow;
    }
    clock_.sleep_until(wait_until);
  }
}

// --- OpenAI-compatible provider -------------------------------------------

OpenAiProvider::OpenAiProvider(ProviderConfig cfg,
                               std::shared_ptr<HttpTransport> transport,
                               std::shared_ptr<Clock> clock,
                               std::uint64_t jitter_seed)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      clock_(std::move(clock)),
      limiter_(cfg_.requests_per_minute, *clock_),
      rng_(jitter_seed) {}

std::string OpenAiProvider::request_body(const CompletionRequest& req) {
  json messages = json::array();
  for (const auto& m : req.messages) messages.push_back(to_json(m));
  json body = {{"model", req.model_id},
               {"messages", messages},
               {"temperature", req.temperature},
               {"max_tokens", req.max_tokens}};
  return body.dump();
}

CompletionResult OpenAiProvider::parse_response(const std::string& body) {
  CompletionResult res;
  try {
    json j = json::parse(body);
    const json& content = j.at("choices").at(0).at("message").at("content");
    res.text = content.is_null() ? std::string() : content.get<std::string>();
    if (auto usage = j.find("usage"); usage != j.end() && usage->is_object()) {
      res.prompt_tokens = usage->value("prompt_tokens", std::int64_t{0});
      res.completion_tokens = usage->value("completion_tokens", std::int64_t{0});
    }
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Kind::malformed_response,
                        std::string("malformed response body: ") + e.what());
  }
  if (res.prompt_tokens < 0 || res.completion_tokens < 0) {
    throw ProviderError(ProviderError::Kind::malformed_response,
                        "negative token usage");
  }
  return res;
}

Clock::Duration OpenAiProvider::backoff(int attempt) {
  using std::chrono::milliseconds;
  std::int64_t base = std::min<std::int64_t>(500LL << std::min(attempt, 16),
                                             30000);
  std::lock_guard lock(rng_mu_);
  std::uniform_int_distribution<std::int64_t> jitter(0, base / 2);
  return milliseconds(base + jitter(rng_));
}

CompletionResult OpenAiProvider::complete(const CompletionRequest& req) {
  check_request(req);
  HttpTransport::Headers headers = {{"Content-Type", "application/json"}};
  if (!cfg_.api_key_env.empty()) {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ProviderError(ProviderError::Kind::auth,
                          "environment variable " + cfg_.api_key_env +
                              " is not set");
    }
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  std::string url = cfg_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  url += "/chat/completions";
  const std::string body = request_body(req);
  const auto started = clock_->now();

  std::string last_error;
  bool last_was_timeout = false;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) clock_->sleep_until(clock_->now() + backoff(attempt - 1));
    limiter_.acquire();
    HttpResponse resp;
    try {
      resp = transport_->post(url, body, headers,
                              std::chrono::seconds(cfg_.timeout_s));
    } catch (const TransportError& e) {
      last_error = e.what();
      last_was_timeout = e.is_timeout();
      continue;
    }
    if (resp.status == 200) {
      CompletionResult res = parse_response(resp.body);
      res.provider_id = cfg_.provider_id;
      res.retry_count = attempt;
      res.latency_ms = (clock_->now() - started).count();
      return res;
    }
    if (resp.status == 401 || resp.status == 403) {
      throw ProviderError(ProviderError::Kind::auth,
                          "HTTP " + std::to_string(resp.status) + " from " +
                              cfg_.provider_id);
    }
    last_was_timeout = resp.status == 408;
    last_error = "HTTP " + std::to_string(resp.status);
    bool retryable = resp.status == 408 || resp.status == 429 ||
                     resp.status >= 500;
    if (!retryable) {
      throw ProviderError(ProviderError::Kind::http,
                          last_error + " from " + cfg_.provider_id + ": " +
                              resp.body.substr(0, 200));
    }
  }
  if (last_was_timeout) {
    throw ProviderError(ProviderError::Kind::timeout,
                        "timed out after " +
                            std::to_string(cfg_.max_retries + 1) +
                            " attempts: " + last_error);
  }
  throw ProviderError(ProviderError::Kind::exhausted_retries,
                      "gave up after " + std::to_string(cfg_.max_retries + 1) +
                          " attempts: " + last_error);
}

// --- mock provider ---------------------------------------------------------

MockProvider::MockProvider(ProviderConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), seed_(seed) {}

void MockProvider::add_rule(MockRule rule) {
  std::lock_guard lock(mu_);
  cfg_.mock_rules.push_back(std::move(rule));
}

namespace {

std::string joined_prompt(const CompletionRequest& req) {
  std::string prompt;
  for (const auto& m : req.messages) {
    if (!prompt.empty()) prompt += '\n';
    prompt += m.content;
  }
  return prompt;
}

std::int64_t rough_token_count(std::string_view s) {
  std::int64_t words = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++words;
    in_word = !space;
  }
  return words;
}

}  // namespace

std::string MockProvider::fallback_text(const CompletionRequest& req,
                                        std::uint64_t seed) {
  std::uint64_t h = seeded_hash(req.model_id + '\x1f' + joined_prompt(req), seed);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  for (int i = 60; i >= 0; i -= 4) hex += kHex[(h >> i) & 0xF];
  char letter = static_cast<char>('A' + (h % 4));
  return "mock response " + hex + "\nAnswer: " + letter;
}

CompletionResult MockProvider::complete(const CompletionRequest& req) {
  check_request(req);
  ++calls_;
  const std::string prompt = joined_prompt(req);
  CompletionResult res;
  res.provider_id = cfg_.provider_id;
  {
    std::lock_guard lock(mu_);
    for (const auto& rule : cfg_.mock_rules) {
      if ((rule.model_id.empty() || rule.model_id == req.model_id) &&
          prompt.find(rule.match) != std::string::npos) {
        res.text = rule.response;
        break;
      }
    }
  }
  if (res.text.empty()) res.text = fallback_text(req, seed_);
  res.prompt_tokens = rough_token_count(prompt);
  res.completion_tokens = rough_token_count(res.text);
  return res;
}

std::unique_ptr<ChatProvider> make_provider(
    const ProviderConfig& cfg, std::uint64_t seed,
    std::shared_ptr<HttpTransport> transport, std::shared_ptr<Clock> clock) {
  if (cfg.kind == "mock") return std::make_unique<MockProvider>(cfg, seed);
  if (!cfg.api_key_env.empty()) {
    const char* key = std::getenv(cfg.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ProviderError(ProviderError::Kind::auth,
                          "provider \"" + cfg.provider_id +
                              "\": environment variable " + cfg.api_key_env +
                              " is not set");
    }
  }
  if (!transport) transport = make_http_transport();
  if (!clock) clock = std::make_shared<SteadyClock>();
  return std::make_unique<OpenAiProvider>(cfg, std::move(transport),
                                          std::move(clock), seed);
}

CompletionResult complete(const CompletionRequest& req,
                          const ProviderConfig& cfg) {
  check_request(req);
  return make_provider(cfg, 0)->complete(req);
}

void ProviderRegistry::add(std::shared_ptr<ChatProvider> provider) {
  const std::string id = provider->config().provider_id;
  if (!providers_.emplace(id, std::move(provider)).second) {
    throw ConfigError("duplicate provider_id \"" + id + "\"");
  }
}

ChatProvider& ProviderRegistry::get(const std::string& provider_id) const {
  auto it = providers_.find(provider_id);
  if (it == providers_.end()) {
    throw ConfigError("unknown provider_id \"" + provider_id + "\"");
  }
  return *it->second;
}

bool ProviderRegistry::contains(const std::string& provider_id) const {
  return providers_.contains(provider_id);
}

}  // namespace sot
