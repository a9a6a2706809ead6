#include "changekit/http_endpoint.hpp"

#include "changekit/error.hpp"
#include "changekit/png_io.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <cstdlib>

namespace changekit {

std::string base64_encode(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

nlohmann::json build_chat_payload(const ChatRequest& request, const std::string& model) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : request.messages) {
    nlohmann::json msg{{"role", m.role}};
    if (m.images.empty()) {
      msg["content"] = m.content;
    } else {
      nlohmann::json parts = nlohmann::json::array();
      parts.push_back({{"type", "text"}, {"text", m.content}});
      for (const auto& path : m.images) {
        const auto bytes = read_file_bytes(path);
        const std::string raw(bytes.begin(), bytes.end());
        parts.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(raw)}}}});
      }
      msg["content"] = std::move(parts);
    }
    messages.push_back(std::move(msg));
  }
  return {{"model", model}, {"messages", std::move(messages)}, {"temperature", request.temperature}};
}

std::string parse_chat_response(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw MalformedResponse("message content is not a string");
    return content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedResponse(std::string("unexpected chat-completions response: ") + e.what());
  }
}

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base_url must start with http:// or https://");
  const auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/chat/completions";
  if (const char* tok = std::getenv(config_.auth_env.c_str())) token_ = tok;
}

std::string HttpChatEndpoint::complete(const ChatRequest& request) {
  httplib::Client client(origin_);
  const auto secs = static_cast<time_t>(config_.timeout_seconds);
  const auto usecs = static_cast<time_t>((config_.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  const auto body = build_chat_payload(request, config_.model).dump();
  const auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto what = "request to " + origin_ + path_ + " failed: " + httplib::to_string(err);
    if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout) throw Timeout(what);
    throw TransientEndpointError(what);
  }
  const int status = res->status;
  if (status == 200) return parse_chat_response(res->body);
  const auto what = "endpoint returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200);
  if (status == 401 || status == 403) throw AuthFailure(what);
  if (status == 408) throw Timeout(what);
  if (status == 429 || status >= 500) throw TransientEndpointError(what);
  throw EndpointUnavailable(what);
}

} // namespace changekit
