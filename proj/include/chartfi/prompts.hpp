#pragma once

// Versioned prompt templates. Placeholders use {{name}} and are filled by
// render_template(). Overrides loaded from the harness config replace the
// text and tag the version so reports stay reproducible.

#include <map>
#include <string>
#include <string_view>

#include "chartfi/digest.hpp"

namespace chartfi {

inline constexpr std::string_view kGenerationPrompt =
    "Write a description of the chart(s) in a paragraph of at least 150 words";

inline constexpr std::string_view kExtractFactsPrompt = R"(You decompose chart descriptions into atomic data facts.
Return a JSON object {"facts": [...]} where every fact has exactly these fields:
  "type": one of chart-construction, value, distribution, extrema, range, outlier,
          proportion, comparison, trend, correlation, rank, hierarchy, domain-specific
  "parameters": list or null
  "measures": list of dependent variable names or null
  "context": the data subspace as a string or null
  "breakdowns": list of grouping dimensions or null
  "focus": list of emphasized values or null
Use null for any field that does not apply. Parameters follow a controlled vocabulary:
  trend: ordered directional states from Increase, Decrease, Peak, Valley, Stable, Fluctuate
  value, rank, proportion, range, extrema, outlier: numbers and/or entity names;
    extrema may add the marker Maximum or Minimum, rank gives its position as a number or Last
  comparison, correlation: [relation, first entity, second entity] with relation from
    Positive, Negative, Greater, Less, Equal
  distribution: objects {"degree": Slightly|Moderately|Highly,
                         "state": Clustered|Dispersed|Skewed|Uniform|Bimodal}
Emit one fact per atomic insight. Do not invent insights that are not stated.)";

inline constexpr std::string_view kExtractFactsUser = R"(Chart schema (canonical names, may be empty):
{{schema}}

Description:
{{description}})";

inline constexpr std::string_view kRepairFactsUser = R"(The following facts break the controlled vocabulary:
{{invalid}}

Problems:
{{problems}}

Return {"facts": [...]} with corrected versions of only these facts, using the same field rules.)";

inline constexpr std::string_view kExtractSchemaPrompt = R"(You read chart images and list their canonical variable names.
Return a JSON object with fields:
  "axis_labels": list of axis titles,
  "legend_entries": list of legend labels,
  "categories": list of data categories shown on the axes or in the marks,
  "title": chart title or null.
Copy names exactly as printed. Use empty lists when an element is absent.)";

inline constexpr std::string_view kSegmentLevelsPrompt = R"(You split a chart description into clause-level units and tag each with a semantic level:
  L1 chart construction: chart type, axes, encodings, legends, layout
  L2 statistical summaries: values, extrema, ranges, outliers, proportions, distributions
  L3 perceptual and cognitive observations: trends, comparisons, correlations, ranks, hierarchies
  L4 contextual and domain-specific insight: explanations, implications, domain knowledge
Return {"units": [{"text": ..., "level": "L1".."L4", "fact": ...}]}.
Units at L2 and L3 must carry one data fact ("fact") whose type belongs to that level,
using this fact format:
{{fact_format}}
Units at L1 and L4 use "fact": null. Skip filler text that states nothing about the chart.)";

inline constexpr std::string_view kSegmentLevelsUser = R"(Description:
{{description}})";

inline constexpr std::string_view kFaithfulnessPrompt = R"(You are an adjudicator checking a chart description against the chart image.
Read the whole description. Enumerate every verifiable claim it makes about the chart
and decide, using only the image, whether each claim is correct.
Return a JSON object:
{"n_total_claims": <number of verifiable claims>,
 "n_erroneous": <number of incorrect claims>,
 "errors": [{"claim_text": ..., "category": ..., "explanation": ...}]}
List exactly one entry per incorrect claim. "category" must be one of:
color, trend, numerical value, comparison, ranking, range, stability, extrema, distribution.)";

inline constexpr std::string_view kFaithfulnessUser = R"(Description to verify:
{{description}})";

inline constexpr std::string_view kAcuityPrompt = R"(You are an adjudicator rating how well a chart description uses domain knowledge.
Look at the chart image and the description, then score five sub-dimensions on a 1-5 scale
(1 = absent or wrong, 3 = adequate, 5 = excellent):
  accuracy: the domain concepts used are technically correct and pertinent to this chart,
    tying visual elements to recognised phenomena rather than generic vocabulary.
  integration: background knowledge is used economically and actually clarifies what the
    chart shows; neither missing where needed nor padded with unneeded background.
  insight: the description picks out the findings that matter most to a practitioner and
    says why they matter, instead of listing whatever is visually salient.
  etiological: the description offers plausible domain-grounded causes for the patterns
    and separates evidence-backed interpretation from speculation.
  multivariate: the description relates variables or subplots to each other and draws
    conclusions that only appear when they are read together.
Return a JSON object:
{"accuracy": n, "integration": n, "insight": n, "etiological": n, "multivariate": n,
 "rationales": {"accuracy": ..., "integration": ..., "insight": ..., "etiological": ..., "multivariate": ...}}
Every score must be an integer from 1 to 5.)";

inline constexpr std::string_view kAcuityUser = R"(Description to rate:
{{description}})";

inline constexpr std::string_view kVerdictRepairSuffix = R"(

Your previous answer was rejected: {{problem}}
Answer again with a corrected JSON object.)";

inline std::string render_template(std::string_view tmpl,
                                   const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const auto open = tmpl.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    const auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, open - i));
    const std::string name(tmpl.substr(open + 2, close - open - 2));
    if (auto it = vars.find(name); it != vars.end()) {
      out.append(it->second);
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  return out;
}

struct PromptTemplate {
  std::string text;
  std::string version;
};

/// Every template the toolkit sends, keyed by role.
struct PromptSet {
  PromptTemplate generation{std::string(kGenerationPrompt), "generation/v1"};
  PromptTemplate extract_facts{std::string(kExtractFactsPrompt), "extract-facts/v1"};
  PromptTemplate extract_schema{std::string(kExtractSchemaPrompt), "extract-schema/v1"};
  PromptTemplate segment_levels{std::string(kSegmentLevelsPrompt), "segment-levels/v1"};
  PromptTemplate faithfulness{std::string(kFaithfulnessPrompt), "faithfulness-method1/v1"};
  PromptTemplate acuity{std::string(kAcuityPrompt), "acuity-rubric/v1"};

  /// Replaces one template by role name; returns false for an unknown role.
  bool override_template(const std::string& role, std::string text) {
    PromptTemplate* t = find(role);
    if (!t) return false;
    t->version = t->version + "+override-" + sha256_hex(text).substr(0, 8);
    t->text = std::move(text);
    return true;
  }

  std::map<std::string, std::string> versions() const {
    return {{"generation", generation.version},         {"extract_facts", extract_facts.version},
            {"extract_schema", extract_schema.version}, {"segment_levels", segment_levels.version},
            {"faithfulness", faithfulness.version},     {"acuity", acuity.version}};
  }

 private:
  PromptTemplate* find(const std::string& role) {
    if (role == "generation") return &generation;
    if (role == "extract_facts") return &extract_facts;
    if (role == "extract_schema") return &extract_schema;
    if (role == "segment_levels") return &segment_levels;
    if (role == "faithfulness") return &faithfulness;
    if (role == "acuity") return &acuity;
    return nullptr;
  }
};

}  // namespace chartfi
