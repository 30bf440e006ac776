#pragma once

// Domain types shared by every stage: the fact taxonomy, semantic levels,
// data facts with their controlled parameter vocabulary, chart schemas and
// their JSON encodings.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartfi/error.hpp"

namespace chartfi {

using json = nlohmann::json;

namespace detail {

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// Case-insensitive lookup in a name table; returns the index or nullopt.
template <std::size_t N>
std::optional<std::size_t> find_name(const std::array<std::string_view, N>& names,
                                     std::string_view needle) {
  const std::string key = ascii_lower(trim(needle));
  for (std::size_t i = 0; i < N; ++i) {
    if (ascii_lower(names[i]) == key) return i;
  }
  return std::nullopt;
}

/// Integral values print without a fractional part; others use shortest round-trip form.
inline std::string format_number(double v) {
  if (std::isfinite(v) && std::floor(v) == v && std::fabs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  return json(v).dump();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Fact taxonomy and semantic levels

enum class FactType : std::uint8_t {
  ChartConstruction,
  Value,
  Distribution,
  Extrema,
  Range,
  Outlier,
  Proportion,
  Comparison,
  Trend,
  Correlation,
  Rank,
  Hierarchy,
  DomainSpecific,
};

inline constexpr std::array<FactType, 13> kAllFactTypes{
    FactType::ChartConstruction, FactType::Value,      FactType::Distribution,
    FactType::Extrema,           FactType::Range,      FactType::Outlier,
    FactType::Proportion,        FactType::Comparison, FactType::Trend,
    FactType::Correlation,       FactType::Rank,       FactType::Hierarchy,
    FactType::DomainSpecific};

inline constexpr std::array<std::string_view, 13> kFactTypeNames{
    "chart-construction", "value",      "distribution", "extrema", "range",
    "outlier",            "proportion", "comparison",   "trend",   "correlation",
    "rank",               "hierarchy",  "domain-specific"};

constexpr std::string_view to_string(FactType t) {
  return kFactTypeNames[static_cast<std::size_t>(t)];
}

/// Accepts the canonical names case-insensitively; '_' and ' ' are read as '-'.
inline FactType parse_fact_type(std::string_view s) {
  std::string key = detail::trim(s);
  std::replace(key.begin(), key.end(), '_', '-');
  std::replace(key.begin(), key.end(), ' ', '-');
  if (auto idx = detail::find_name(kFactTypeNames, key)) return kAllFactTypes[*idx];
  throw ValidationError("unknown fact type '" + std::string(s) + "'", "type");
}

enum class SemanticLevel : std::uint8_t { L1 = 1, L2 = 2, L3 = 3, L4 = 4 };

inline constexpr std::array<SemanticLevel, 4> kAllLevels{SemanticLevel::L1, SemanticLevel::L2,
                                                         SemanticLevel::L3, SemanticLevel::L4};

constexpr std::size_t level_index(SemanticLevel l) { return static_cast<std::size_t>(l) - 1; }

constexpr std::string_view to_string(SemanticLevel l) {
  constexpr std::array<std::string_view, 4> names{"L1", "L2", "L3", "L4"};
  return names[level_index(l)];
}

inline SemanticLevel parse_level(std::string_view s) {
  constexpr std::array<std::string_view, 4> names{"L1", "L2", "L3", "L4"};
  if (auto idx = detail::find_name(names, s)) return kAllLevels[*idx];
  throw ValidationError("unknown semantic level '" + std::string(s) + "'", "level");
}

constexpr SemanticLevel semantic_level_of(FactType t) {
  switch (t) {
    case FactType::ChartConstruction:
      return SemanticLevel::L1;
    case FactType::Value:
    case FactType::Distribution:
    case FactType::Extrema:
    case FactType::Outlier:
    case FactType::Proportion:
    case FactType::Range:
      return SemanticLevel::L2;
    case FactType::Comparison:
    case FactType::Trend:
    case FactType::Correlation:
    case FactType::Rank:
    case FactType::Hierarchy:
      return SemanticLevel::L3;
    case FactType::DomainSpecific:
      return SemanticLevel::L4;
  }
  return SemanticLevel::L1;
}

/// Types whose parameters are quantities and entity names scored by tolerance.
constexpr bool is_numeric_type(FactType t) {
  return t == FactType::Value || t == FactType::Rank || t == FactType::Proportion ||
         t == FactType::Range || t == FactType::Extrema || t == FactType::Outlier;
}

constexpr bool is_relational_type(FactType t) {
  return t == FactType::Comparison || t == FactType::Correlation;
}

// ---------------------------------------------------------------------------
// Controlled parameter vocabulary

enum class TrendState : std::uint8_t { Increase, Decrease, Peak, Valley, Stable, Fluctuate };
inline constexpr std::array<std::string_view, 6> kTrendStateNames{
    "Increase", "Decrease", "Peak", "Valley", "Stable", "Fluctuate"};

enum class Relation : std::uint8_t { Positive, Negative, Greater, Less, Equal };
inline constexpr std::array<std::string_view, 5> kRelationNames{"Positive", "Negative", "Greater",
                                                                "Less", "Equal"};

enum class Degree : std::uint8_t { Slightly, Moderately, Highly };
inline constexpr std::array<std::string_view, 3> kDegreeNames{"Slightly", "Moderately", "Highly"};

enum class DistributionState : std::uint8_t { Clustered, Dispersed, Skewed, Uniform, Bimodal };
inline constexpr std::array<std::string_view, 5> kDistributionStateNames{
    "Clustered", "Dispersed", "Skewed", "Uniform", "Bimodal"};

// Reserved markers used by the extrema/rank conversion.
inline constexpr std::string_view kMaximumMarker = "Maximum";
inline constexpr std::string_view kMinimumMarker = "Minimum";
inline constexpr std::string_view kLastMarker = "Last";

constexpr std::string_view to_string(Relation r) {
  return kRelationNames[static_cast<std::size_t>(r)];
}
constexpr std::string_view to_string(Degree d) { return kDegreeNames[static_cast<std::size_t>(d)]; }
constexpr std::string_view to_string(DistributionState s) {
  return kDistributionStateNames[static_cast<std::size_t>(s)];
}
constexpr std::string_view to_string(TrendState s) {
  return kTrendStateNames[static_cast<std::size_t>(s)];
}

inline std::optional<Relation> parse_relation(std::string_view s) {
  if (auto i = detail::find_name(kRelationNames, s)) return static_cast<Relation>(*i);
  return std::nullopt;
}
inline std::optional<TrendState> parse_trend_state(std::string_view s) {
  if (auto i = detail::find_name(kTrendStateNames, s)) return static_cast<TrendState>(*i);
  return std::nullopt;
}
inline std::optional<Degree> parse_degree(std::string_view s) {
  if (auto i = detail::find_name(kDegreeNames, s)) return static_cast<Degree>(*i);
  return std::nullopt;
}
inline std::optional<DistributionState> parse_distribution_state(std::string_view s) {
  if (auto i = detail::find_name(kDistributionStateNames, s)) {
    return static_cast<DistributionState>(*i);
  }
  return std::nullopt;
}

/// Direction expected when the two entities of a relational fact are swapped.
/// Ordering relations flip; correlation signs are symmetric in their arguments.
constexpr Relation swap_direction(Relation r, FactType type) {
  switch (r) {
    case Relation::Greater:
      return Relation::Less;
    case Relation::Less:
      return Relation::Greater;
    case Relation::Positive:
      return type == FactType::Comparison ? Relation::Negative : Relation::Positive;
    case Relation::Negative:
      return type == FactType::Comparison ? Relation::Positive : Relation::Negative;
    case Relation::Equal:
      return Relation::Equal;
  }
  return r;
}

struct DegreeState {
  Degree degree = Degree::Moderately;
  DistributionState state = DistributionState::Clustered;
  bool operator==(const DegreeState&) const = default;
};

/// A parameter is a quantity, a vocabulary token / entity name, or a distribution pair.
using Parameter = std::variant<double, std::string, DegreeState>;

/// std::nullopt is the N/A sentinel; an engaged empty vector is an empty list.
using TokenList = std::optional<std::vector<std::string>>;

struct DataFact {
  FactType type = FactType::Value;
  std::optional<std::vector<Parameter>> parameters;
  TokenList measures;
  std::optional<std::string> context;
  TokenList breakdowns;
  TokenList focus;
  SemanticLevel level = SemanticLevel::L2;

  static DataFact of_type(FactType t) {
    DataFact f;
    f.type = t;
    f.level = semantic_level_of(t);
    return f;
  }
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline void require_token_list(const TokenList& list, const char* field) {
  if (!list) return;
  for (const auto& s : *list) {
    if (trim(s).empty()) throw ValidationError(std::string(field) + " contains an empty entry", field);
  }
}

inline const std::string* as_string(const Parameter& p) { return std::get_if<std::string>(&p); }

}  // namespace detail

/// Throws ValidationError naming the offending field when `f` breaks the
/// vocabulary or level invariants. Vocabulary tokens must already be in
/// canonical casing (see canonicalize_vocabulary).
inline void validate(const DataFact& f) {
  if (f.level != semantic_level_of(f.type)) {
    throw ValidationError("level " + std::string(to_string(f.level)) + " does not match type " +
                              std::string(to_string(f.type)),
                          "level");
  }
  detail::require_token_list(f.measures, "measures");
  detail::require_token_list(f.breakdowns, "breakdowns");
  detail::require_token_list(f.focus, "focus");
  if (f.context && detail::trim(*f.context).empty()) {
    throw ValidationError("context is an empty string", "context");
  }
  if (!f.parameters) return;

  const auto& params = *f.parameters;
  auto fail = [&](const std::string& why) {
    throw ValidationError("parameters of " + std::string(to_string(f.type)) + " fact: " + why,
                          "parameters");
  };
  for (const auto& p : params) {
    if (const double* d = std::get_if<double>(&p); d && !std::isfinite(*d)) fail("non-finite number");
    if (const auto* s = detail::as_string(p); s && detail::trim(*s).empty()) fail("empty token");
  }

  switch (f.type) {
    case FactType::Trend:
      for (const auto& p : params) {
        const auto* s = detail::as_string(p);
        if (!s || std::find(kTrendStateNames.begin(), kTrendStateNames.end(), *s) ==
                      kTrendStateNames.end()) {
          fail("trend parameters must be directional states");
        }
      }
      break;
    case FactType::Comparison:
    case FactType::Correlation: {
      if (params.size() != 3) fail("expected [relation, entity, entity]");
      const auto* rel = detail::as_string(params[0]);
      if (!rel || std::find(kRelationNames.begin(), kRelationNames.end(), *rel) ==
                      kRelationNames.end()) {
        fail("first parameter must be a relation direction");
      }
      if (!detail::as_string(params[1]) || !detail::as_string(params[2])) {
        fail("entities must be names");
      }
      break;
    }
    case FactType::Distribution:
      for (const auto& p : params) {
        if (!std::holds_alternative<DegreeState>(p)) fail("expected (degree, state) pairs");
      }
      break;
    default:
      for (const auto& p : params) {
        if (std::holds_alternative<DegreeState>(p)) fail("(degree, state) pairs are distribution-only");
      }
      break;
  }
}

/// Rewrites vocabulary tokens into canonical casing, splits "Highly Clustered"
/// strings into pairs and turns numeric entity names into strings. Tokens that
/// are not in the vocabulary are left untouched so validate() can report them.
inline DataFact canonicalize_vocabulary(DataFact f) {
  f.level = semantic_level_of(f.type);
  if (!f.parameters) return f;
  auto& params = *f.parameters;
  auto canon = [](auto& names, std::string& s) {
    if (auto i = detail::find_name(names, s)) s = std::string(names[*i]);
  };
  switch (f.type) {
    case FactType::Trend:
      for (auto& p : params) {
        if (auto* s = std::get_if<std::string>(&p)) canon(kTrendStateNames, *s);
      }
      break;
    case FactType::Comparison:
    case FactType::Correlation:
      for (std::size_t i = 0; i < params.size(); ++i) {
        if (auto* s = std::get_if<std::string>(&params[i]); s && i == 0) canon(kRelationNames, *s);
        if (const double* d = std::get_if<double>(&params[i]); d && i > 0) {
          params[i] = detail::format_number(*d);
        }
      }
      break;
    case FactType::Distribution:
      for (auto& p : params) {
        const auto* s = std::get_if<std::string>(&p);
        if (!s) continue;
        const std::string text = detail::trim(*s);
        const auto space = text.find_first_of(" \t");
        if (space == std::string::npos) continue;
        auto deg = parse_degree(text.substr(0, space));
        auto st = parse_distribution_state(detail::trim(text.substr(space)));
        if (deg && st) p = DegreeState{*deg, *st};
      }
      break;
    case FactType::Extrema: {
      constexpr std::array<std::string_view, 2> markers{kMaximumMarker, kMinimumMarker};
      for (auto& p : params) {
        if (auto* s = std::get_if<std::string>(&p)) canon(markers, *s);
      }
      break;
    }
    case FactType::Rank: {
      constexpr std::array<std::string_view, 1> markers{kLastMarker};
      for (auto& p : params) {
        if (auto* s = std::get_if<std::string>(&p)) canon(markers, *s);
      }
      break;
    }
    default:
      break;
  }
  return f;
}

// ---------------------------------------------------------------------------
// JSON encoding (N/A is JSON null)

inline void to_json(json& j, const DegreeState& ds) {
  j = json{{"degree", std::string(to_string(ds.degree))},
           {"state", std::string(to_string(ds.state))}};
}

inline json parameter_json(const Parameter& p) {
  if (const double* d = std::get_if<double>(&p)) return *d == 0.0 ? 0.0 : *d;  // fold -0 into 0
  if (const auto* s = std::get_if<std::string>(&p)) return *s;
  return json(std::get<DegreeState>(p));
}

namespace detail {

inline json token_list_json(const TokenList& l) { return l ? json(*l) : json(nullptr); }

inline TokenList token_list_from(const json& j, const char* field) {
  if (!j.contains(field) || j.at(field).is_null()) return std::nullopt;
  const json& v = j.at(field);
  if (v.is_string()) return std::vector<std::string>{v.get<std::string>()};
  if (!v.is_array()) throw ValidationError(std::string(field) + " must be a list or null", field);
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_number()) {
      out.push_back(detail::format_number(e.get<double>()));
    } else {
      throw ValidationError(std::string(field) + " entries must be strings", field);
    }
  }
  return out;
}

inline Parameter parameter_from(const json& e) {
  if (e.is_number()) return e.get<double>();
  if (e.is_string()) return e.get<std::string>();
  if (e.is_object() && e.contains("degree") && e.contains("state") && e["degree"].is_string() &&
      e["state"].is_string()) {
    auto deg = parse_degree(e["degree"].get<std::string>());
    auto st = parse_distribution_state(e["state"].get<std::string>());
    if (!deg || !st) {
      throw ValidationError("unknown degree/state pair " + e.dump(), "parameters");
    }
    return DegreeState{*deg, *st};
  }
  throw ValidationError("unsupported parameter " + e.dump(), "parameters");
}

}  // namespace detail

inline void to_json(json& j, const DataFact& f) {
  j = json::object();
  j["type"] = std::string(to_string(f.type));
  if (f.parameters) {
    json params = json::array();
    for (const auto& p : *f.parameters) params.push_back(parameter_json(p));
    j["parameters"] = std::move(params);
  } else {
    j["parameters"] = nullptr;
  }
  j["measures"] = detail::token_list_json(f.measures);
  j["context"] = f.context ? json(*f.context) : json(nullptr);
  j["breakdowns"] = detail::token_list_json(f.breakdowns);
  j["focus"] = detail::token_list_json(f.focus);
  j["level"] = std::string(to_string(f.level));
}

/// Parses, canonicalizes and validates. A supplied "level" must agree with the type.
inline void from_json(const json& j, DataFact& f) {
  if (!j.is_object()) throw ValidationError("data fact must be a JSON object", "type");
  if (!j.contains("type") || !j["type"].is_string()) {
    throw ValidationError("data fact is missing its type", "type");
  }
  DataFact out = DataFact::of_type(parse_fact_type(j["type"].get<std::string>()));
  if (j.contains("parameters") && !j["parameters"].is_null()) {
    const json& p = j["parameters"];
    std::vector<Parameter> params;
    if (p.is_array()) {
      for (const auto& e : p) params.push_back(detail::parameter_from(e));
    } else {
      params.push_back(detail::parameter_from(p));
    }
    out.parameters = std::move(params);
  }
  out.measures = detail::token_list_from(j, "measures");
  if (j.contains("context") && !j["context"].is_null()) {
    if (!j["context"].is_string()) throw ValidationError("context must be a string", "context");
    out.context = j["context"].get<std::string>();
  }
  out.breakdowns = detail::token_list_from(j, "breakdowns");
  out.focus = detail::token_list_from(j, "focus");
  out = canonicalize_vocabulary(std::move(out));
  if (j.contains("level") && !j["level"].is_null()) {
    out.level = parse_level(j["level"].get<std::string>());
  }
  validate(out);
  f = std::move(out);
}

// ---------------------------------------------------------------------------
// Canonical serialization

/// Byte-deterministic encoding used for tie-breaking and cache keys. Measures,
/// breakdowns and focus are sorted; parameters keep their order.
inline std::string canonical_serialize(const DataFact& f) {
  validate(f);
  auto sorted = [](const TokenList& l) -> json {
    if (!l) return nullptr;
    auto v = *l;
    std::sort(v.begin(), v.end());
    return v;
  };
  json params = nullptr;
  if (f.parameters) {
    params = json::array();
    for (const auto& p : *f.parameters) {
      if (const auto* ds = std::get_if<DegreeState>(&p)) {
        params.push_back(json::array({to_string(ds->degree), to_string(ds->state)}));
      } else {
        params.push_back(parameter_json(p));
      }
    }
  }
  json doc = json::array({to_string(f.type), std::move(params), sorted(f.measures),
                          f.context ? json(*f.context) : json(nullptr), sorted(f.breakdowns),
                          sorted(f.focus)});
  return doc.dump();
}

/// Equality up to the order of measures, breakdowns and focus.
inline bool operator==(const DataFact& a, const DataFact& b) {
  return canonical_serialize(a) == canonical_serialize(b);
}

// ---------------------------------------------------------------------------
// Chart schema

struct ChartSchema {
  std::vector<std::string> axis_labels;
  std::vector<std::string> legend_entries;
  std::vector<std::string> categories;
  std::optional<std::string> title;

  /// Canonical variable names used for normalization (title excluded).
  std::vector<std::string> entries() const {
    std::vector<std::string> out;
    out.insert(out.end(), axis_labels.begin(), axis_labels.end());
    out.insert(out.end(), legend_entries.begin(), legend_entries.end());
    out.insert(out.end(), categories.begin(), categories.end());
    return out;
  }
  bool empty() const { return axis_labels.empty() && legend_entries.empty() && categories.empty(); }
  bool operator==(const ChartSchema&) const = default;
};

inline void validate(const ChartSchema& s) {
  auto check = [](const std::vector<std::string>& v, const char* field) {
    for (const auto& e : v) {
      if (detail::trim(e).empty()) throw ValidationError(std::string(field) + " has an empty entry", field);
    }
  };
  check(s.axis_labels, "axis_labels");
  check(s.legend_entries, "legend_entries");
  check(s.categories, "categories");
  if (s.title && detail::trim(*s.title).empty()) throw ValidationError("empty title", "title");
}

inline void to_json(json& j, const ChartSchema& s) {
  j = json{{"axis_labels", s.axis_labels},
           {"legend_entries", s.legend_entries},
           {"categories", s.categories},
           {"title", s.title ? json(*s.title) : json(nullptr)}};
}

inline void from_json(const json& j, ChartSchema& s) {
  if (!j.is_object()) throw ValidationError("chart schema must be a JSON object", "schema");
  ChartSchema out;
  auto list = [&](const char* field) {
    auto l = detail::token_list_from(j, field);
    return l ? *l : std::vector<std::string>{};
  };
  out.axis_labels = list("axis_labels");
  out.legend_entries = list("legend_entries");
  out.categories = list("categories");
  if (j.contains("title") && j["title"].is_string()) out.title = j["title"].get<std::string>();
  validate(out);
  s = std::move(out);
}

// ---------------------------------------------------------------------------
// Level-tagged description units and level weights

/// A span of a description tagged with its semantic level. L2/L3 units carry
/// the data fact they state.
struct LevelUnit {
  std::string text;
  SemanticLevel level = SemanticLevel::L1;
  std::optional<DataFact> fact;
};

inline void validate(const LevelUnit& u) {
  const bool needs_fact = u.level == SemanticLevel::L2 || u.level == SemanticLevel::L3;
  if (needs_fact && !u.fact) {
    throw ValidationError(std::string(to_string(u.level)) + " unit without a data fact", "fact");
  }
  if (u.fact) {
    validate(*u.fact);
    if (u.fact->level != u.level) {
      throw ValidationError("unit level " + std::string(to_string(u.level)) +
                                " disagrees with its fact type " +
                                std::string(to_string(u.fact->type)),
                            "level");
    }
  }
}

inline void to_json(json& j, const LevelUnit& u) {
  j = json{{"text", u.text},
           {"level", std::string(to_string(u.level))},
           {"fact", u.fact ? json(*u.fact) : json(nullptr)}};
}

inline void from_json(const json& j, LevelUnit& u) {
  if (!j.is_object() || !j.contains("level") || !j["level"].is_string()) {
    throw ValidationError("level unit needs a level", "level");
  }
  LevelUnit out;
  out.text = j.value("text", std::string{});
  out.level = parse_level(j["level"].get<std::string>());
  if (j.contains("fact") && !j["fact"].is_null()) out.fact = j["fact"].get<DataFact>();
  validate(out);
  u = std::move(out);
}

using LevelArray = std::array<double, 4>;

/// Per-level base weights b, reference proportions p and normalized weights w.
struct LevelWeights {
  LevelArray base{};
  LevelArray proportions{};
  LevelArray normalized{};

  double operator[](SemanticLevel l) const { return normalized[level_index(l)]; }
};

}  // namespace chartfi
