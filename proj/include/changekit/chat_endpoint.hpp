#pragma once

// Chat-completion endpoints: the abstract interface, retry/backoff and
// concurrency limiting shared by dataset generation and evaluation.

#include "changekit/config.hpp"

#include <chrono>
#include <cstddef>
#include <deque>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <variant>
#include <vector>

namespace changekit {

struct ChatMessage {
  std::string role; // "system" | "user" | "assistant"
  std::string content;
  std::vector<std::string> images; // image file paths attached to this message

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::vector<ChatMessage> messages;
  double temperature = 0.2;

  bool operator==(const ChatRequest&) const = default;
};

/// Anything that turns a conversation into the next assistant message.
///
/// Implementations throw TransientEndpointError for retryable failures,
/// Timeout, AuthFailure, or another EndpointError subtype.
class ChatEndpoint {
public:
  virtual ~ChatEndpoint() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
};

struct EndpointConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-4o-mini";
  std::string auth_env = "OPENAI_API_KEY"; // name of the variable, never the token
  int max_retries = 3;
  double timeout_seconds = 60.0;
  int max_concurrency = 4;
  double temperature = 0.2;
  int initial_backoff_ms = 500;

  /// Keys: base_url, model, auth_env, max_retries, timeout_seconds,
  /// max_concurrency, temperature, initial_backoff_ms. Throws ConfigError on
  /// negative retries or concurrency < 1.
  static EndpointConfig from_config(const KeyValueConfig& cfg);
  KeyValueConfig to_config() const;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// Sends the request, retrying transient failures and timeouts up to
/// `config.max_retries` times with exponential backoff (initial, 2x, 4x, ...
/// capped at 30 s). AuthFailure is never retried. When retries run out the
/// last failure is reported as Timeout or EndpointUnavailable.
std::string complete_with_retry(ChatEndpoint& endpoint, const ChatRequest& request, const EndpointConfig& config,
                                const Sleeper& sleep = real_sleeper());

/// Bounds the number of in-flight requests to the wrapped endpoint.
class LimitedEndpoint final : public ChatEndpoint {
public:
  LimitedEndpoint(ChatEndpoint& inner, int max_concurrency);
  std::string complete(const ChatRequest& request) override;

private:
  ChatEndpoint& inner_;
  std::counting_semaphore<1024> slots_;
};

/// Replays canned replies (or failures) in order and records every request.
class ScriptedEndpoint final : public ChatEndpoint {
public:
  using Step = std::variant<std::string, std::exception_ptr>;

  ScriptedEndpoint() = default;
  explicit ScriptedEndpoint(std::vector<Step> steps);

  void push_reply(std::string text);
  void push_failure(std::exception_ptr error);

  std::string complete(const ChatRequest& request) override;

  std::vector<ChatRequest> requests() const;
  std::size_t calls() const;

private:
  mutable std::mutex mu_;
  std::deque<Step> steps_;
  std::vector<ChatRequest> requests_;
};

} // namespace changekit
