#pragma once

// Adjudicator-based metrics: Faithfulness (one vision call over the chart and
// the whole description) and Acuity (five-part 1-5 rubric).

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartfi/core_model.hpp"
#include "chartfi/prompts.hpp"
#include "chartfi/providers.hpp"

namespace chartfi {

inline constexpr std::array<std::string_view, 9> kErrorCategories{
    "color", "trend",     "numerical value", "comparison",  "ranking",
    "range", "stability", "extrema",         "distribution"};

/// Canonical taxonomy name for a category label, or nullopt.
inline std::optional<std::string> canonical_error_category(std::string_view label) {
  std::string key = detail::ascii_lower(detail::trim(label));
  static const std::map<std::string, std::string> aliases{
      {"colour", "color"},          {"numeric value", "numerical value"},
      {"numerical", "numerical value"}, {"value", "numerical value"},
      {"rank", "ranking"},          {"extremum", "extrema"},
      {"extreme", "extrema"}};
  if (auto it = aliases.find(key); it != aliases.end()) key = it->second;
  for (auto c : kErrorCategories) {
    if (c == key) return std::string(c);
  }
  return std::nullopt;
}

struct ClaimError {
  std::string claim_text;
  std::string category;
  std::string explanation;
};

struct FaithfulnessVerdict {
  long n_total_claims = 0;
  long n_erroneous = 0;
  std::vector<ClaimError> errors;
  std::string adjudicator;  // model id
  std::string raw_text;
};

enum class AcuityDimension : std::uint8_t { Accuracy, Integration, Insight, Etiological, Multivariate };

inline constexpr std::array<std::string_view, 5> kAcuityDimensionNames{
    "accuracy", "integration", "insight", "etiological", "multivariate"};

struct AcuityVerdict {
  std::array<int, 5> scores{};  // indexed by AcuityDimension
  std::map<std::string, std::string> rationales;
  std::string adjudicator;
  std::string raw_text;

  int operator[](AcuityDimension d) const { return scores[static_cast<std::size_t>(d)]; }
};

/// 1 - n_erroneous / n_total_claims; nullopt when no claims were counted.
inline std::optional<double> faithfulness_score(const FaithfulnessVerdict& v) {
  if (v.n_total_claims <= 0) return std::nullopt;
  return 1.0 - static_cast<double>(v.n_erroneous) / static_cast<double>(v.n_total_claims);
}

/// Unweighted mean of the five sub-scores.
inline double acuity_score(const AcuityVerdict& v) {
  double sum = 0.0;
  for (int s : v.scores) sum += s;
  return sum / static_cast<double>(v.scores.size());
}

// ---------------------------------------------------------------------------
// Verdict parsing. Each parser returns a problem description, or nullopt.

namespace detail {

inline std::optional<long> as_count(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) return std::nullopt;
  const double v = j[key].get<double>();
  if (v < 0 || std::floor(v) != v) return std::nullopt;
  return static_cast<long>(v);
}

}  // namespace detail

inline std::optional<std::string> parse_faithfulness_verdict(const json& doc, FaithfulnessVerdict& out) {
  if (!doc.is_object()) return "verdict must be a JSON object";
  auto total = detail::as_count(doc, "n_total_claims");
  auto wrong = detail::as_count(doc, "n_erroneous");
  if (!total || !wrong) return "n_total_claims and n_erroneous must be non-negative integers";
  if (*wrong > *total) return "n_erroneous exceeds n_total_claims";
  std::vector<ClaimError> errors;
  if (doc.contains("errors") && !doc["errors"].is_null()) {
    if (!doc["errors"].is_array()) return "errors must be a list";
    for (const auto& e : doc["errors"]) {
      if (!e.is_object()) return "each error must be an object";
      auto cat = canonical_error_category(e.value("category", std::string{}));
      if (!cat) return "unknown error category '" + e.value("category", std::string{}) + "'";
      errors.push_back({e.value("claim_text", std::string{}), *cat, e.value("explanation", std::string{})});
    }
  }
  if (static_cast<long>(errors.size()) != *wrong) {
    return "errors lists " + std::to_string(errors.size()) + " items but n_erroneous is " +
           std::to_string(*wrong);
  }
  out.n_total_claims = *total;
  out.n_erroneous = *wrong;
  out.errors = std::move(errors);
  return std::nullopt;
}

inline std::optional<std::string> parse_acuity_verdict(const json& doc, AcuityVerdict& out) {
  if (!doc.is_object()) return "verdict must be a JSON object";
  AcuityVerdict v;
  for (std::size_t i = 0; i < kAcuityDimensionNames.size(); ++i) {
    const std::string key(kAcuityDimensionNames[i]);
    if (!doc.contains(key) || !doc[key].is_number()) return "missing score for " + key;
    const double s = doc[key].get<double>();
    if (std::floor(s) != s || s < 1 || s > 5) {
      return key + " score " + doc[key].dump() + " is outside the integers 1-5";
    }
    v.scores[i] = static_cast<int>(s);
  }
  if (doc.contains("rationales") && doc["rationales"].is_object()) {
    for (const auto& [k, val] : doc["rationales"].items()) {
      if (val.is_string()) v.rationales[k] = val.get<std::string>();
    }
  }
  out.scores = v.scores;
  out.rationales = std::move(v.rationales);
  return std::nullopt;
}

inline void to_json(json& j, const FaithfulnessVerdict& v) {
  json errors = json::array();
  for (const auto& e : v.errors) {
    errors.push_back({{"claim_text", e.claim_text}, {"category", e.category}, {"explanation", e.explanation}});
  }
  j = json{{"n_total_claims", v.n_total_claims},
           {"n_erroneous", v.n_erroneous},
           {"errors", std::move(errors)},
           {"adjudicator", v.adjudicator},
           {"raw_text", v.raw_text}};
}

inline void to_json(json& j, const AcuityVerdict& v) {
  j = json::object();
  for (std::size_t i = 0; i < kAcuityDimensionNames.size(); ++i) {
    j[std::string(kAcuityDimensionNames[i])] = v.scores[i];
  }
  j["rationales"] = v.rationales;
  j["adjudicator"] = v.adjudicator;
  j["raw_text"] = v.raw_text;
}

// ---------------------------------------------------------------------------

class Judge {
 public:
  Judge(ChatClient& chat, std::string adjudicator_model, PromptSet prompts = {})
      : chat_(chat), model_id_(std::move(adjudicator_model)), prompts_(std::move(prompts)) {}

  /// A single vision request carrying the chart and the full description.
  FaithfulnessVerdict judge_faithfulness(const ImageData& chart, const std::string& description) const {
    FaithfulnessVerdict v;
    v.adjudicator = model_id_;
    run(chart, description, prompts_.faithfulness.text, kFaithfulnessUser,
        [&](const json& doc) { return parse_faithfulness_verdict(doc, v); }, v.raw_text);
    return v;
  }

  AcuityVerdict judge_acuity(const ImageData& chart, const std::string& description) const {
    AcuityVerdict v;
    v.adjudicator = model_id_;
    run(chart, description, prompts_.acuity.text, kAcuityUser,
        [&](const json& doc) { return parse_acuity_verdict(doc, v); }, v.raw_text);
    return v;
  }

  const std::string& adjudicator() const { return model_id_; }

 private:
  // Issues the request; an inconsistent verdict earns one re-prompt that
  // names the problem, after which the failure is terminal.
  template <typename Parse>
  void run(const ImageData& chart, const std::string& description, const std::string& system,
           std::string_view user_template, Parse&& parse, std::string& raw_text) const {
    if (!detect_image_mime(chart.bytes)) throw ValidationError("chart image is not decodable", "image");
    if (detail::trim(description).empty()) {
      throw ValidationError("cannot judge an empty description", "description");
    }
    ChatRequest req;
    req.model_id = model_id_;
    req.system_prompt = system;
    req.user_text = render_template(user_template, {{"description", description}});
    req.images.push_back(chart);
    req.response_format = ResponseFormat::Json;

    std::string problem;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 1) {
        req.user_text += render_template(kVerdictRepairSuffix, {{"problem", problem}});
      }
      const ChatResponse resp = chat_.chat_complete(req);
      raw_text = resp.text;
      auto doc = parse_json_text(resp.text);
      auto issue = doc ? parse(*doc) : std::optional<std::string>("reply is not JSON");
      if (!issue) return;
      problem = *issue;
    }
    throw JudgeError("adjudicator verdict rejected after re-prompt: " + problem, raw_text);
  }

  ChatClient& chat_;
  std::string model_id_;
  PromptSet prompts_;
};

}  // namespace chartfi
