#pragma once

// OpenAI-compatible HTTP providers for chat completion (with inline base64
// images) and embeddings.

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

#include <cstdlib>
#include <memory>
#include <string>
#include <utility>

#include "chartfi/providers.hpp"

namespace chartfi {

struct HttpEndpoint {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // e.g. "/v1", may be empty
};

inline HttpEndpoint split_base_url(const std::string& base_url) {
  const auto scheme = base_url.find("://");
  if (scheme == std::string::npos) {
    throw ValidationError("base_url must include a scheme: '" + base_url + "'", "base_url");
  }
  const auto path = base_url.find('/', scheme + 3);
  HttpEndpoint ep;
  ep.origin = base_url.substr(0, path);
  if (path != std::string::npos) ep.path_prefix = base_url.substr(path);
  while (!ep.path_prefix.empty() && ep.path_prefix.back() == '/') ep.path_prefix.pop_back();
  return ep;
}

struct HttpProfile {
  std::string base_url;
  std::string model_id;
  std::string api_key;  // resolved value, not the variable name
  int timeout_seconds = 120;
};

namespace detail {

inline json post_json(const HttpProfile& profile, const std::string& route, const json& body) {
  const HttpEndpoint ep = split_base_url(profile.base_url);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(profile.timeout_seconds);
  client.set_read_timeout(profile.timeout_seconds);
  client.set_write_timeout(profile.timeout_seconds);
  httplib::Headers headers;
  if (!profile.api_key.empty()) headers.emplace("Authorization", "Bearer " + profile.api_key);

  auto res = client.Post(ep.path_prefix + route, headers, body.dump(), "application/json");
  if (!res) {
    throw ProviderError(ProviderErrorKind::Transport,
                        "HTTP request failed: " + httplib::to_string(res.error()));
  }
  if (res->status == 429) {
    throw ProviderError(ProviderErrorKind::RateLimit, "rate limited", res->body);
  }
  if (res->status >= 500) {
    throw ProviderError(ProviderErrorKind::Transport,
                        "server error " + std::to_string(res->status), res->body);
  }
  if (res->status != 200) {
    throw ProviderError(ProviderErrorKind::Rejected,
                        "request rejected with status " + std::to_string(res->status), res->body);
  }
  auto parsed = json::parse(res->body, nullptr, false);
  if (parsed.is_discarded()) {
    throw ProviderError(ProviderErrorKind::Transport, "unparseable provider envelope", res->body);
  }
  return parsed;
}

}  // namespace detail

/// Builds the chat-completions body: system message, then a user message
/// holding the text part followed by each image as a base64 data URL.
inline json chat_wire_payload(const ChatRequest& req) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", req.user_text}});
  for (const auto& img : req.images) {
    content.push_back(
        {{"type", "image_url"},
         {"image_url", {{"url", "data:" + img.mime_type + ";base64," + base64_encode(img.bytes)}}}});
  }
  json messages = json::array();
  if (!req.system_prompt.empty()) {
    messages.push_back({{"role", "system"}, {"content", req.system_prompt}});
  }
  messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  json body{{"model", req.model_id},
            {"messages", std::move(messages)},
            {"temperature", req.temperature},
            {"top_p", req.top_p}};
  if (req.response_format == ResponseFormat::Json) {
    body["response_format"] = {{"type", "json_object"}};
  }
  return body;
}

class OpenAICompatibleChatProvider : public ChatProvider {
 public:
  explicit OpenAICompatibleChatProvider(HttpProfile profile) : profile_(std::move(profile)) {}

  ChatResponse complete(const ChatRequest& req) override {
    ChatRequest routed = req;
    if (routed.model_id.empty()) routed.model_id = profile_.model_id;
    const json reply = detail::post_json(profile_, "/chat/completions", chat_wire_payload(routed));
    const auto* content = reply.contains("choices") && !reply["choices"].empty()
                              ? &reply["choices"][0]["message"]["content"]
                              : nullptr;
    if (!content || !content->is_string() || content->get<std::string>().empty()) {
      throw ProviderError(ProviderErrorKind::Transport, "reply has no message content",
                          reply.dump());
    }
    json meta{{"provider", "openai-compatible"}};
    if (reply.contains("usage")) meta["usage"] = reply["usage"];
    if (reply.contains("model")) meta["served_model"] = reply["model"];
    return ChatResponse{content->get<std::string>(), std::move(meta)};
  }

 private:
  HttpProfile profile_;
};

class OpenAICompatibleEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit OpenAICompatibleEmbeddingProvider(HttpProfile profile) : profile_(std::move(profile)) {}

  std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
    json body{{"model", profile_.model_id},
              {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const json reply = detail::post_json(profile_, "/embeddings", body);
    if (!reply.contains("data") || !reply["data"].is_array()) {
      throw ProviderError(ProviderErrorKind::Transport, "embedding reply has no data", reply.dump());
    }
    std::vector<EmbeddingVector> out(texts.size());
    std::size_t seen = 0;
    for (const auto& item : reply["data"]) {
      const std::size_t idx = item.value("index", seen);
      if (idx >= out.size()) continue;
      out[idx].values = item.at("embedding").get<std::vector<double>>();
      ++seen;
    }
    return out;
  }

  std::string model_id() const override { return profile_.model_id; }

 private:
  HttpProfile profile_;
};

}  // namespace chartfi
