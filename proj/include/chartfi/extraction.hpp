#pragma once

// Model-driven decomposition of descriptions into data facts and level-tagged
// units, and of chart images into schemas.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "chartfi/core_model.hpp"
#include "chartfi/prompts.hpp"
#include "chartfi/providers.hpp"

namespace chartfi {

struct FactExtraction {
  std::vector<DataFact> facts;
  std::vector<std::string> warnings;  // one per dropped fact
};

struct UnitSegmentation {
  std::vector<LevelUnit> units;
  std::vector<std::string> warnings;
};

namespace detail {

// Accepts a bare array or an object wrapping the array under `key`.
inline json items_of(const json& doc, const char* key) {
  if (doc.is_array()) return doc;
  if (doc.is_object() && doc.contains(key) && doc[key].is_array()) return doc[key];
  return json::array();
}

struct ParsedFacts {
  std::vector<DataFact> valid;
  json invalid = json::array();
  std::vector<std::string> problems;
};

inline ParsedFacts parse_fact_items(const json& items) {
  ParsedFacts out;
  for (const auto& item : items) {
    try {
      out.valid.push_back(item.get<DataFact>());
    } catch (const ValidationError& e) {
      out.invalid.push_back(item);
      out.problems.push_back(e.what());
    } catch (const json::exception& e) {
      out.invalid.push_back(item);
      out.problems.push_back(e.what());
    }
  }
  return out;
}

inline json reply_json(const ChatResponse& resp) {
  auto parsed = parse_json_text(resp.text);
  if (!parsed) {
    throw ProviderError(ProviderErrorKind::MalformedJson, "reply is not JSON", resp.text);
  }
  return *parsed;
}

inline std::vector<std::string> dedup_case_insensitive(const std::vector<std::string>& in) {
  std::set<std::string> seen;
  std::vector<std::string> out;
  for (const auto& s : in) {
    const std::string t = trim(s);
    if (t.empty()) continue;
    if (seen.insert(ascii_lower(t)).second) out.push_back(t);
  }
  return out;
}

}  // namespace detail

class Extractor {
 public:
  Extractor(ChatClient& chat, std::string model_id, PromptSet prompts = {})
      : chat_(chat), model_id_(std::move(model_id)), prompts_(std::move(prompts)) {}

  /// Vocabulary-violating facts get one repair re-prompt; whatever is still
  /// invalid afterwards is dropped with a warning.
  FactExtraction extract_facts(const std::string& description,
                               const ChartSchema* schema = nullptr) const {
    if (detail::trim(description).empty()) {
      throw ValidationError("cannot extract facts from an empty description", "description");
    }
    ChatRequest req = base_request(prompts_.extract_facts.text);
    req.user_text = render_template(
        kExtractFactsUser,
        {{"schema", schema ? json(*schema).dump() : std::string("(none)")},
         {"description", description}});
    auto parsed = detail::parse_fact_items(detail::items_of(detail::reply_json(chat_.chat_complete(req)), "facts"));

    FactExtraction out;
    out.facts = std::move(parsed.valid);
    if (parsed.invalid.empty()) return out;

    std::string problems;
    for (const auto& p : parsed.problems) problems += "- " + p + "\n";
    ChatRequest repair = req;
    repair.user_text += "\n\n" + render_template(kRepairFactsUser, {{"invalid", parsed.invalid.dump(2)},
                                                                   {"problems", problems}});
    auto repaired = detail::parse_fact_items(
        detail::items_of(detail::reply_json(chat_.chat_complete(repair)), "facts"));
    const std::size_t fixed = std::min(repaired.valid.size(), parsed.invalid.size());
    out.facts.insert(out.facts.end(), repaired.valid.begin(),
                     repaired.valid.begin() + static_cast<std::ptrdiff_t>(fixed));
    for (std::size_t i = fixed; i < parsed.invalid.size(); ++i) {
      std::string why = i < repaired.problems.size() ? repaired.problems[i] : parsed.problems[i];
      out.warnings.push_back("dropped fact " + parsed.invalid[i].dump() + ": " + why);
      spdlog::warn("{}", out.warnings.back());
    }
    return out;
  }

  ChartSchema extract_schema(const ImageData& image) const {
    if (!detect_image_mime(image.bytes)) {
      throw ValidationError("chart image is not a decodable image", "image");
    }
    ChatRequest req = base_request(prompts_.extract_schema.text);
    req.user_text = "List the canonical variable names of this chart.";
    req.images.push_back(image);
    const json doc = detail::reply_json(chat_.chat_complete(req));
    if (!doc.is_object()) {
      throw ProviderError(ProviderErrorKind::MalformedJson, "schema reply is not an object", doc.dump());
    }
    json cleaned = doc;
    for (const char* field : {"axis_labels", "legend_entries", "categories"}) {
      std::vector<std::string> values;
      if (doc.contains(field) && doc[field].is_array()) {
        for (const auto& v : doc[field]) {
          if (v.is_string()) values.push_back(v.get<std::string>());
          if (v.is_number()) values.push_back(detail::format_number(v.get<double>()));
        }
      }
      cleaned[field] = detail::dedup_case_insensitive(values);
    }
    if (cleaned.contains("title") &&
        (!cleaned["title"].is_string() || detail::trim(cleaned["title"].get<std::string>()).empty())) {
      cleaned["title"] = nullptr;
    }
    return cleaned.get<ChartSchema>();
  }

  /// Units that break the level/fact invariants are dropped with a warning.
  UnitSegmentation segment_levels(const std::string& description) const {
    if (detail::trim(description).empty()) {
      throw ValidationError("cannot segment an empty description", "description");
    }
    ChatRequest req = base_request(render_template(
        prompts_.segment_levels.text, {{"fact_format", prompts_.extract_facts.text}}));
    req.user_text = render_template(kSegmentLevelsUser, {{"description", description}});
    const json items = detail::items_of(detail::reply_json(chat_.chat_complete(req)), "units");
    UnitSegmentation out;
    for (const auto& item : items) {
      try {
        out.units.push_back(item.get<LevelUnit>());
      } catch (const std::exception& e) {
        out.warnings.push_back("dropped unit " + item.dump() + ": " + e.what());
        spdlog::warn("{}", out.warnings.back());
      }
    }
    return out;
  }

  const PromptSet& prompts() const { return prompts_; }

 private:
  ChatRequest base_request(std::string system_prompt) const {
    ChatRequest req;
    req.model_id = model_id_;
    req.system_prompt = std::move(system_prompt);
    req.response_format = ResponseFormat::Json;
    req.temperature = 0.0;
    req.top_p = 1.0;
    return req;
  }

  ChatClient& chat_;
  std::string model_id_;
  PromptSet prompts_;
};

}  // namespace chartfi
