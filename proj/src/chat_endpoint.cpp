#include "changekit/chat_endpoint.hpp"

#include "changekit/error.hpp"

#include <algorithm>
#include <thread>

namespace changekit {

EndpointConfig EndpointConfig::from_config(const KeyValueConfig& cfg) {
  EndpointConfig c;
  c.base_url = cfg.get_or("base_url", c.base_url);
  c.model = cfg.get_or("model", c.model);
  c.auth_env = cfg.get_or("auth_env", c.auth_env);
  c.max_retries = static_cast<int>(cfg.get_int("max_retries", c.max_retries));
  c.timeout_seconds = cfg.get_double("timeout_seconds", c.timeout_seconds);
  c.max_concurrency = static_cast<int>(cfg.get_int("max_concurrency", c.max_concurrency));
  c.temperature = cfg.get_double("temperature", c.temperature);
  c.initial_backoff_ms = static_cast<int>(cfg.get_int("initial_backoff_ms", c.initial_backoff_ms));
  if (c.max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (c.max_concurrency < 1 || c.max_concurrency > 1024) throw ConfigError("max_concurrency must be in [1, 1024]");
  if (c.timeout_seconds <= 0.0) throw ConfigError("timeout_seconds must be positive");
  if (c.initial_backoff_ms < 0) throw ConfigError("initial_backoff_ms must be >= 0");
  return c;
}

KeyValueConfig EndpointConfig::to_config() const {
  KeyValueConfig cfg;
  cfg.set("base_url", base_url);
  cfg.set("model", model);
  cfg.set("auth_env", auth_env);
  cfg.set("max_retries", std::to_string(max_retries));
  cfg.set("timeout_seconds", std::to_string(timeout_seconds));
  cfg.set("max_concurrency", std::to_string(max_concurrency));
  cfg.set("temperature", std::to_string(temperature));
  cfg.set("initial_backoff_ms", std::to_string(initial_backoff_ms));
  return cfg;
}

Sleeper real_sleeper() {
  return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

std::string complete_with_retry(ChatEndpoint& endpoint, const ChatRequest& request, const EndpointConfig& config,
                                const Sleeper& sleep) {
  constexpr long long kMaxBackoffMs = 30000;
  long long backoff = config.initial_backoff_ms;
  bool last_was_timeout = false;
  std::string last_error;
  for (int attempt = 0; attempt <= config.max_retries; ++attempt) {
    if (attempt > 0) {
      sleep(std::chrono::milliseconds(backoff));
      backoff = std::min(backoff * 2, kMaxBackoffMs);
    }
    try {
      return endpoint.complete(request);
    } catch (const Timeout& e) {
      last_was_timeout = true;
      last_error = e.what();
    } catch (const TransientEndpointError& e) {
      last_was_timeout = false;
      last_error = e.what();
    }
  }
  const auto attempts = std::to_string(config.max_retries + 1);
  if (last_was_timeout) throw Timeout("request timed out after " + attempts + " attempt(s): " + last_error);
  throw EndpointUnavailable("endpoint unavailable after " + attempts + " attempt(s): " + last_error);
}

LimitedEndpoint::LimitedEndpoint(ChatEndpoint& inner, int max_concurrency)
    : inner_(inner), slots_(std::clamp(max_concurrency, 1, 1024)) {}

std::string LimitedEndpoint::complete(const ChatRequest& request) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_.complete(request);
}

ScriptedEndpoint::ScriptedEndpoint(std::vector<Step> steps) : steps_(steps.begin(), steps.end()) {}

void ScriptedEndpoint::push_reply(std::string text) {
  std::lock_guard lock(mu_);
  steps_.emplace_back(std::move(text));
}

void ScriptedEndpoint::push_failure(std::exception_ptr error) {
  std::lock_guard lock(mu_);
  steps_.emplace_back(std::move(error));
}

std::string ScriptedEndpoint::complete(const ChatRequest& request) {
  Step step;
  {
    std::lock_guard lock(mu_);
    requests_.push_back(request);
    if (steps_.empty()) throw EndpointUnavailable("scripted endpoint has no more replies");
    step = std::move(steps_.front());
    steps_.pop_front();
  }
  if (auto* err = std::get_if<std::exception_ptr>(&step)) std::rethrow_exception(*err);
  return std::get<std::string>(step);
}

std::vector<ChatRequest> ScriptedEndpoint::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::size_t ScriptedEndpoint::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

} // namespace changekit
