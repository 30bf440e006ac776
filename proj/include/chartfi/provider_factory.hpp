#pragma once

// Builds chat and embedding clients for each configured role. All clients
// share one response cache directory and one in-flight limiter.

#include <cstdlib>
#include <memory>
#include <string>

#include "chartfi/config.hpp"
#include "chartfi/http_provider.hpp"

namespace chartfi {

/// Mock chat profile: the first rule whose `contains` string occurs in the
/// system prompt or user text wins; otherwise `default` (or `reply`).
inline std::shared_ptr<ChatProvider> make_mock_chat(const ProviderProfile& p) {
  const json rules_doc = p.mock;
  return std::make_shared<MockChatProvider>(MockChatProvider::Responder([rules_doc](const ChatRequest& req) {
    for (const auto& rule : rules_doc.value("rules", json::array())) {
      const std::string needle = rule.value("contains", std::string{});
      if (req.system_prompt.find(needle) != std::string::npos ||
          req.user_text.find(needle) != std::string::npos) {
        return rule.value("reply", std::string{});
      }
    }
    return rules_doc.value("default", rules_doc.value("reply", std::string("mock reply")));
  }));
}

inline HttpProfile http_profile(const ProviderProfile& p) {
  HttpProfile h{p.base_url, p.model_id, {}, p.timeout_seconds};
  if (!p.api_key_env.empty()) {
    const char* key = std::getenv(p.api_key_env.c_str());
    if (!key || !*key) {
      throw ValidationError("environment variable " + p.api_key_env + " for provider '" + p.name +
                                "' is not set",
                            "api_key_env");
    }
    h.api_key = key;
  }
  return h;
}

struct ProviderSet {
  std::shared_ptr<ConcurrencyLimiter> limiter;
  std::map<std::string, std::shared_ptr<ChatClient>> chat;  // by profile name
  std::shared_ptr<EmbeddingClient> embedder;

  ChatClient* chat_for(const std::string& profile) const {
    auto it = chat.find(profile);
    return it == chat.end() ? nullptr : it->second.get();
  }
};

/// Clients for every profile referenced by a role. Missing API keys fail
/// here, before any request is made.
inline ProviderSet make_providers(const HarnessConfig& cfg, const std::string& cache_dir,
                                  std::size_t concurrency) {
  ProviderSet set;
  set.limiter = std::make_shared<ConcurrencyLimiter>(concurrency);
  const ResponseCache cache = cache_dir.empty() ? ResponseCache{} : ResponseCache(cache_dir);
  for (const std::string* role : {&cfg.adjudicator, &cfg.extractor, &cfg.generator}) {
    if (role->empty() || set.chat.count(*role)) continue;
    const ProviderProfile& p = *cfg.profile(*role);
    std::shared_ptr<ChatProvider> provider =
        p.kind == "mock" ? make_mock_chat(p)
                         : std::shared_ptr<ChatProvider>(
                               std::make_shared<OpenAICompatibleChatProvider>(http_profile(p)));
    set.chat[*role] = std::make_shared<ChatClient>(provider, cache, cfg.retry, set.limiter);
  }
  if (!cfg.embedder.empty()) {
    const ProviderProfile& p = *cfg.profile(cfg.embedder);
    std::shared_ptr<EmbeddingProvider> provider;
    if (p.kind == "mock") {
      std::map<std::string, std::vector<double>> table;
      if (p.mock.contains("table")) table = p.mock["table"].get<std::map<std::string, std::vector<double>>>();
      provider = std::make_shared<MockEmbeddingProvider>(table, p.mock.value("dimension", std::size_t{8}));
    } else {
      provider = std::make_shared<OpenAICompatibleEmbeddingProvider>(http_profile(p));
    }
    set.embedder = std::make_shared<EmbeddingClient>(provider, cache, cfg.retry, set.limiter);
  }
  return set;
}

}  // namespace chartfi
