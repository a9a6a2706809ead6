#pragma once

// OpenAI-style chat-completions client over HTTP(S).

#include "changekit/chat_endpoint.hpp"

#include <nlohmann/json.hpp>

#include <string>

namespace changekit {

/// Request body for POST {base_url}/chat/completions. Messages with images
/// use the content-array form with base64 `data:` URLs.
nlohmann::json build_chat_payload(const ChatRequest& request, const std::string& model);

/// Extracts choices[0].message.content; throws MalformedResponse.
std::string parse_chat_response(const std::string& body);

std::string base64_encode(const std::string& bytes);

class HttpChatEndpoint final : public ChatEndpoint {
public:
  /// The bearer token is read from the environment variable named by
  /// `config.auth_env`; no Authorization header is sent when it is unset.
  explicit HttpChatEndpoint(EndpointConfig config);

  std::string complete(const ChatRequest& request) override;

private:
  EndpointConfig config_;
  std::string origin_; // scheme://host[:port]
  std::string path_;   // e.g. /v1/chat/completions
  std::string token_;
};

} // namespace changekit
