#pragma once

// Harness configuration: provider profiles, role selection, matching and
// informativeness parameters, prompt overrides, retry and concurrency limits.
// Stored as a JSON document; every key is optional.

#include <chrono>
#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "chartfi/informativeness.hpp"
#include "chartfi/matching.hpp"
#include "chartfi/prompts.hpp"
#include "chartfi/providers.hpp"

namespace chartfi {

struct ProviderProfile {
  std::string name;
  std::string kind = "openai";  // openai | mock
  std::string base_url;
  std::string model_id;
  std::string api_key_env;
  int timeout_seconds = 120;
  json mock = json::object();  // reply / rules / default / dimension for mock profiles
};

struct HarnessConfig {
  std::map<std::string, ProviderProfile> providers;
  // Profile names per role; empty means the role is unavailable.
  std::string adjudicator;
  std::string extractor;
  std::string embedder;
  std::string generator;
  MatchConfig match;
  LevelArray level_base_weights = kDefaultLevelBaseWeights;
  PromptSet prompts;
  RetryPolicy retry;
  std::size_t concurrency = 4;

  const ProviderProfile* profile(const std::string& name) const {
    auto it = providers.find(name);
    return it == providers.end() ? nullptr : &it->second;
  }

  /// Model id a role resolves to, or empty.
  std::string model_for(const std::string& role_profile) const {
    const auto* p = profile(role_profile);
    if (!p) return {};
    return p->model_id.empty() ? p->name : p->model_id;
  }
};

inline json config_to_json(const HarnessConfig& c) {
  json providers = json::object();
  for (const auto& [name, p] : c.providers) {
    json j{{"kind", p.kind}, {"base_url", p.base_url}, {"model_id", p.model_id},
           {"api_key_env", p.api_key_env}, {"timeout_seconds", p.timeout_seconds}};
    if (!p.mock.empty()) j["mock"] = p.mock;
    providers[name] = std::move(j);
  }
  json prompts = json::object();
  for (const auto& [role, version] : c.prompts.versions()) prompts[role] = version;
  return json{{"providers", std::move(providers)},
              {"roles",
               {{"adjudicator", c.adjudicator},
                {"extractor", c.extractor},
                {"embedder", c.embedder},
                {"generator", c.generator}}},
              {"match", c.match},
              {"level_base_weights", c.level_base_weights},
              {"prompt_versions", std::move(prompts)},
              {"retry",
               {{"max_attempts", c.retry.max_attempts},
                {"json_max_attempts", c.retry.json_max_attempts},
                {"base_delay_ms", c.retry.base_delay.count()}}},
              {"concurrency", c.concurrency}};
}

/// Digest of the effective configuration (prompt texts enter via their versions).
inline std::string config_hash(const HarnessConfig& c) { return sha256_hex(config_to_json(c).dump()); }

inline HarnessConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object", "config");
  HarnessConfig c;
  try {
    if (j.contains("providers")) {
      for (const auto& [name, pj] : j["providers"].items()) {
        ProviderProfile p;
        p.name = name;
        p.kind = pj.value("kind", p.kind);
        if (p.kind != "openai" && p.kind != "mock") {
          throw ValidationError("provider '" + name + "' has unknown kind '" + p.kind + "'", "providers");
        }
        p.base_url = pj.value("base_url", std::string{});
        p.model_id = pj.value("model_id", std::string{});
        p.api_key_env = pj.value("api_key_env", std::string{});
        p.timeout_seconds = pj.value("timeout_seconds", p.timeout_seconds);
        if (p.kind == "mock") {
          p.mock = pj.contains("mock") ? pj["mock"] : json::object();
          for (const char* k : {"reply", "rules", "default", "dimension"}) {
            if (pj.contains(k)) p.mock[k] = pj[k];
          }
        } else if (p.base_url.empty()) {
          throw ValidationError("provider '" + name + "' needs a base_url", "providers");
        }
        c.providers.emplace(name, std::move(p));
      }
    }
    const json roles = j.value("roles", json::object());
    for (auto [key, slot] : {std::pair{"adjudicator", &c.adjudicator}, std::pair{"extractor", &c.extractor},
                             std::pair{"embedder", &c.embedder}, std::pair{"generator", &c.generator}}) {
      *slot = roles.value(key, std::string{});
      if (!slot->empty() && !c.providers.count(*slot)) {
        throw ValidationError(std::string("role ") + key + " names unknown provider '" + *slot + "'", "roles");
      }
    }
    if (j.contains("match")) c.match = j["match"].get<MatchConfig>();
    if (j.contains("level_base_weights")) {
      const json& b = j["level_base_weights"];
      if (b.is_array()) {
        if (b.size() != 4) throw ValidationError("level_base_weights needs four entries", "level_base_weights");
        for (std::size_t i = 0; i < 4; ++i) c.level_base_weights[i] = b[i].get<double>();
      } else {
        for (std::size_t i = 0; i < 4; ++i) {
          c.level_base_weights[i] = b.value(std::string(to_string(kAllLevels[i])), c.level_base_weights[i]);
        }
      }
      for (double w : c.level_base_weights) {
        if (!(w > 0.0)) throw ValidationError("level base weights must be positive", "level_base_weights");
      }
    }
    if (j.contains("prompts")) {
      for (const auto& [role, text] : j["prompts"].items()) {
        if (!c.prompts.override_template(role, text.get<std::string>())) {
          throw ValidationError("unknown prompt role '" + role + "'", "prompts");
        }
      }
    }
    if (j.contains("retry")) {
      const json& r = j["retry"];
      c.retry.max_attempts = r.value("max_attempts", c.retry.max_attempts);
      c.retry.json_max_attempts = r.value("json_max_attempts", c.retry.json_max_attempts);
      c.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", c.retry.base_delay.count()));
      if (c.retry.max_attempts < 1 || c.retry.json_max_attempts < 1) {
        throw ValidationError("retry attempts must be >= 1", "retry");
      }
    }
    c.concurrency = j.value("concurrency", c.concurrency);
    if (c.concurrency == 0) throw ValidationError("concurrency must be >= 1", "concurrency");
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config has a wrongly typed value: ") + e.what(), "config");
  }
  return c;
}

inline HarnessConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path + "'", "config");
  std::stringstream ss;
  ss << in.rdbuf();
  const json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError("config '" + path + "' is not valid JSON", "config");
  return config_from_json(j);
}

}  // namespace chartfi
