#pragma once

// Coverage engine: token normalization against the chart schema, type-aware
// per-dimension scorers, the weighted compatibility score, cross-type
// conversion and one-to-one greedy assignment with a threshold.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "chartfi/core_model.hpp"
#include "chartfi/providers.hpp"
#include "chartfi/sequence.hpp"

namespace chartfi {

enum class Dimension : std::uint8_t { Parameters, Measures, Context, Breakdowns, Focus };

inline constexpr std::array<Dimension, 5> kAllDimensions{
    Dimension::Parameters, Dimension::Measures, Dimension::Context, Dimension::Breakdowns,
    Dimension::Focus};

inline constexpr std::array<std::string_view, 5> kDimensionNames{"parameters", "measures", "context",
                                                                 "breakdowns", "focus"};

constexpr std::string_view to_string(Dimension d) {
  return kDimensionNames[static_cast<std::size_t>(d)];
}

using DimensionWeights = std::array<double, 5>;

struct MatchConfig {
  double tau = 0.7;
  DimensionWeights weights{0.3, 0.3, 0.2, 0.1, 0.1};
  double numeric_rel_tolerance = 0.05;
  double numeric_abs_tolerance = 1e-9;
  double embed_fallback_threshold = 0.8;
  double distribution_adjacent_credit = 0.5;
  std::vector<std::set<FactType>> equivalence_groups{{FactType::Extrema, FactType::Rank}};

  void validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must be in (0, 1]", "tau");
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw ValidationError("dimension weights must be >= 0", "weights");
      sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ValidationError("dimension weights must sum to 1", "weights");
    if (!(numeric_rel_tolerance >= 0.0) || !(numeric_abs_tolerance >= 0.0)) {
      throw ValidationError("numeric tolerances must be >= 0", "numeric_rel_tolerance");
    }
    if (!(embed_fallback_threshold > 0.0 && embed_fallback_threshold < 1.0)) {
      throw ValidationError("embed_fallback_threshold must be in (0, 1)", "embed_fallback_threshold");
    }
  }

  bool equivalent(FactType a, FactType b) const {
    if (a == b) return true;
    return std::any_of(equivalence_groups.begin(), equivalence_groups.end(),
                       [&](const auto& g) { return g.count(a) && g.count(b); });
  }

  double weight(Dimension d) const { return weights[static_cast<std::size_t>(d)]; }
};

inline void to_json(json& j, const MatchConfig& c) {
  json weights = json::object();
  for (auto d : kAllDimensions) weights[std::string(to_string(d))] = c.weight(d);
  json groups = json::array();
  for (const auto& g : c.equivalence_groups) {
    json members = json::array();
    for (auto t : g) members.push_back(std::string(to_string(t)));
    groups.push_back(std::move(members));
  }
  j = json{{"tau", c.tau},
           {"weights", std::move(weights)},
           {"numeric_rel_tolerance", c.numeric_rel_tolerance},
           {"numeric_abs_tolerance", c.numeric_abs_tolerance},
           {"embed_fallback_threshold", c.embed_fallback_threshold},
           {"distribution_adjacent_credit", c.distribution_adjacent_credit},
           {"equivalence_groups", std::move(groups)}};
}

/// Missing keys keep their defaults.
inline void from_json(const json& j, MatchConfig& c) {
  MatchConfig out;
  out.tau = j.value("tau", out.tau);
  if (j.contains("weights")) {
    const json& w = j["weights"];
    if (w.is_array()) {
      if (w.size() != 5) throw ValidationError("weights needs five entries", "weights");
      for (std::size_t i = 0; i < 5; ++i) out.weights[i] = w[i].get<double>();
    } else {
      for (auto d : kAllDimensions) {
        out.weights[static_cast<std::size_t>(d)] =
            w.value(std::string(to_string(d)), out.weight(d));
      }
    }
  }
  out.numeric_rel_tolerance = j.value("numeric_rel_tolerance", out.numeric_rel_tolerance);
  out.numeric_abs_tolerance = j.value("numeric_abs_tolerance", out.numeric_abs_tolerance);
  out.embed_fallback_threshold = j.value("embed_fallback_threshold", out.embed_fallback_threshold);
  out.distribution_adjacent_credit =
      j.value("distribution_adjacent_credit", out.distribution_adjacent_credit);
  if (j.contains("equivalence_groups")) {
    out.equivalence_groups.clear();
    for (const auto& g : j["equivalence_groups"]) {
      std::set<FactType> group;
      for (const auto& t : g) group.insert(parse_fact_type(t.get<std::string>()));
      out.equivalence_groups.push_back(std::move(group));
    }
  }
  out.validate();
  c = std::move(out);
}

// ---------------------------------------------------------------------------
// Token normalization

namespace detail {

inline std::string collapse_whitespace_lower(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

inline std::string lexical_key(std::string_view s) {
  std::string out;
  for (char ch : s) {
    if (!std::isspace(static_cast<unsigned char>(ch))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  return out;
}

}  // namespace detail

/// Maps free-text field tokens onto canonical schema entries. Exact
/// (case/whitespace-insensitive) matches win; otherwise the most similar entry
/// by embedding cosine is used when it clears the threshold; otherwise the
/// token is lowercased with collapsed whitespace. Results are memoized.
class TokenNormalizer {
 public:
  TokenNormalizer() = default;
  TokenNormalizer(ChartSchema schema, EmbeddingClient* embedder, double threshold = 0.8)
      : entries_(schema.entries()), embedder_(embedder), threshold_(threshold) {}

  std::string operator()(const std::string& token) const {
    if (detail::trim(token).empty()) throw ValidationError("cannot normalize an empty token", "token");
    {
      std::lock_guard lock(mu_);
      if (auto it = memo_.find(token); it != memo_.end()) return it->second;
    }
    std::string result = compute(token);
    std::lock_guard lock(mu_);
    memo_.emplace(token, result);
    return result;
  }

  std::size_t embedding_failures() const {
    std::lock_guard lock(mu_);
    return embedding_failures_;
  }

 private:
  std::string compute(const std::string& token) const {
    const std::string key = detail::lexical_key(token);
    for (const auto& e : entries_) {
      if (detail::lexical_key(e) == key) return e;
    }
    if (embedder_ && !entries_.empty()) {
      try {
        std::vector<std::string> texts{token};
        texts.insert(texts.end(), entries_.begin(), entries_.end());
        const auto vecs = embedder_->embed(texts);
        double best = -2.0;
        const std::string* best_entry = nullptr;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
          double sim = -1.0;
          try {
            sim = cosine_similarity(vecs[0], vecs[i + 1]);
          } catch (const ValidationError&) {
            continue;  // zero vector: no usable similarity
          }
          if (sim > best || (sim == best && best_entry && entries_[i] < *best_entry)) {
            best = sim;
            best_entry = &entries_[i];
          }
        }
        if (best_entry && best >= threshold_) return *best_entry;
      } catch (const std::exception& e) {
        spdlog::warn("embedding fallback failed for '{}': {}; using lexical normalization", token,
                     e.what());
        std::lock_guard lock(mu_);
        ++embedding_failures_;
      }
    }
    return detail::collapse_whitespace_lower(token);
  }

  std::vector<std::string> entries_;
  EmbeddingClient* embedder_ = nullptr;
  double threshold_ = 0.8;
  mutable std::mutex mu_;
  mutable std::map<std::string, std::string> memo_;
  mutable std::size_t embedding_failures_ = 0;
};

inline std::string normalize_token(const std::string& token, const ChartSchema& schema,
                                   EmbeddingClient* embedder, double threshold = 0.8) {
  return TokenNormalizer(schema, embedder, threshold)(token);
}

// ---------------------------------------------------------------------------
// Scorers

/// |LCS(a, b)| / max(|a|, |b|); 1 when both are empty.
template <typename T>
double lcs_ratio(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.empty() && b.empty()) return 1.0;
  if (a.empty() || b.empty()) return 0.0;
  return static_cast<double>(lcs_length(a, b)) / static_cast<double>(std::max(a.size(), b.size()));
}

/// Dimensions inapplicable (N/A) on both sides are dropped and the rest scaled
/// back to a unit sum. With nothing active, parameters take the full weight.
inline DimensionWeights reallocate_weights(const DataFact& r, const DataFact& m,
                                           const MatchConfig& cfg) {
  const std::array<bool, 5> inactive{
      !r.parameters && !m.parameters, !r.measures && !m.measures, !r.context && !m.context,
      !r.breakdowns && !m.breakdowns, !r.focus && !m.focus};
  double active_sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    if (!inactive[i]) active_sum += cfg.weights[i];
  }
  DimensionWeights out{};
  if (active_sum <= 0.0) {
    out[0] = 1.0;
    return out;
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (!inactive[i]) out[i] = cfg.weights[i] / active_sum;
  }
  return out;
}

namespace detail {

inline std::vector<std::string> normalized_set(const std::vector<std::string>& tokens,
                                               const TokenNormalizer& norm) {
  std::set<std::string> s;
  for (const auto& t : tokens) s.insert(norm(t));
  return {s.begin(), s.end()};
}

// |ref ∩ model| / |ref| over normalized token sets.
inline double set_overlap(const std::vector<std::string>& ref, const std::vector<std::string>& model,
                          const TokenNormalizer& norm) {
  const auto rs = normalized_set(ref, norm);
  const auto ms = normalized_set(model, norm);
  if (rs.empty()) return ms.empty() ? 1.0 : 0.0;
  std::vector<std::string> common;
  std::set_intersection(rs.begin(), rs.end(), ms.begin(), ms.end(), std::back_inserter(common));
  return static_cast<double>(common.size()) / static_cast<double>(rs.size());
}

inline double score_numeric_params(const std::vector<Parameter>& r, const std::vector<Parameter>& m,
                                   const MatchConfig& cfg, const TokenNormalizer& norm) {
  std::vector<double> rn, mn;
  std::vector<std::string> rs, ms;
  for (const auto& p : r) {
    if (const double* d = std::get_if<double>(&p)) rn.push_back(*d);
    if (const auto* s = std::get_if<std::string>(&p)) rs.push_back(norm(*s));
  }
  for (const auto& p : m) {
    if (const double* d = std::get_if<double>(&p)) mn.push_back(*d);
    if (const auto* s = std::get_if<std::string>(&p)) ms.push_back(norm(*s));
  }
  if (rn.size() != mn.size()) return 0.0;
  for (std::size_t i = 0; i < rn.size(); ++i) {
    const double tol = std::max(cfg.numeric_abs_tolerance, cfg.numeric_rel_tolerance * std::fabs(rn[i]));
    if (!(std::fabs(mn[i] - rn[i]) <= tol)) return 0.0;
  }
  std::sort(rs.begin(), rs.end());
  std::sort(ms.begin(), ms.end());
  return rs == ms ? 1.0 : 0.0;
}

inline double score_relational_params(FactType type, const std::vector<Parameter>& r,
                                      const std::vector<Parameter>& m, const TokenNormalizer& norm) {
  if (r.size() != 3 || m.size() != 3) return 0.0;
  const auto rel_r = parse_relation(std::get<std::string>(r[0]));
  const auto rel_m = parse_relation(std::get<std::string>(m[0]));
  if (!rel_r || !rel_m) return 0.0;
  const std::string ra = norm(std::get<std::string>(r[1])), rb = norm(std::get<std::string>(r[2]));
  const std::string ma = norm(std::get<std::string>(m[1])), mb = norm(std::get<std::string>(m[2]));
  if (ra == ma && rb == mb && *rel_r == *rel_m) return 1.0;
  if (ra == mb && rb == ma && *rel_r == swap_direction(*rel_m, type)) return 1.0;
  return 0.0;
}

inline double degree_state_credit(const DegreeState& r, const DegreeState& m, double adjacent_credit) {
  if (r.state != m.state) return 0.0;
  const int gap = std::abs(static_cast<int>(r.degree) - static_cast<int>(m.degree));
  if (gap == 0) return 1.0;
  return gap == 1 ? adjacent_credit : 0.0;
}

// Each reference pair takes its best still-unused model pair; the credit sum
// is normalized by the longer list.
inline double score_distribution_params(const std::vector<Parameter>& r,
                                        const std::vector<Parameter>& m, const MatchConfig& cfg) {
  if (r.empty() && m.empty()) return 1.0;
  if (r.empty() || m.empty()) return 0.0;
  std::vector<bool> used(m.size(), false);
  double total = 0.0;
  for (const auto& rp : r) {
    const auto& rd = std::get<DegreeState>(rp);
    double best = 0.0;
    std::size_t best_j = m.size();
    for (std::size_t j = 0; j < m.size(); ++j) {
      if (used[j]) continue;
      const double c =
          degree_state_credit(rd, std::get<DegreeState>(m[j]), cfg.distribution_adjacent_credit);
      if (c > best) {
        best = c;
        best_j = j;
      }
    }
    if (best_j < m.size()) used[best_j] = true;
    total += best;
  }
  return total / static_cast<double>(std::max(r.size(), m.size()));
}

inline std::vector<std::string> parameter_tokens(const std::vector<Parameter>& params) {
  std::vector<std::string> out;
  for (const auto& p : params) {
    if (const double* d = std::get_if<double>(&p)) out.push_back(format_number(*d));
    if (const auto* s = std::get_if<std::string>(&p)) out.push_back(*s);
  }
  return out;
}

inline std::vector<std::string> string_params(const std::vector<Parameter>& params) {
  std::vector<std::string> out;
  for (const auto& p : params) {
    if (const auto* s = std::get_if<std::string>(&p)) out.push_back(*s);
  }
  return out;
}

}  // namespace detail

inline std::optional<DataFact> cross_type_convert(const DataFact& m, FactType target,
                                                  const MatchConfig& cfg = {});

/// Per-dimension compatibility of reference fact `r` and model fact `m`,
/// scored under r's type. Incomparable types score 0; an equivalent type is
/// converted into r's type first.
inline double sigma_dimension(const DataFact& r, const DataFact& m, Dimension d,
                              const MatchConfig& cfg, const TokenNormalizer& norm) {
  if (!cfg.equivalent(r.type, m.type)) return 0.0;
  if (r.type != m.type) {
    const auto converted = cross_type_convert(m, r.type, cfg);
    return converted ? sigma_dimension(r, *converted, d, cfg, norm) : 0.0;
  }
  auto list_dim = [&](const TokenList& rl, const TokenList& ml) {
    if (!rl && !ml) return 1.0;
    if (!rl || !ml) return 0.0;
    return detail::set_overlap(*rl, *ml, norm);
  };
  switch (d) {
    case Dimension::Measures:
      return list_dim(r.measures, m.measures);
    case Dimension::Breakdowns:
      return list_dim(r.breakdowns, m.breakdowns);
    case Dimension::Focus:
      return list_dim(r.focus, m.focus);
    case Dimension::Context: {
      auto as_list = [](const std::optional<std::string>& c) -> TokenList {
        if (!c) return std::nullopt;
        return std::vector<std::string>{*c};
      };
      return list_dim(as_list(r.context), as_list(m.context));
    }
    case Dimension::Parameters:
      break;
  }
  if (!r.parameters && !m.parameters) return 1.0;
  if (!r.parameters || !m.parameters) return 0.0;
  const auto& rp = *r.parameters;
  const auto& mp = *m.parameters;
  if (is_numeric_type(r.type)) return detail::score_numeric_params(rp, mp, cfg, norm);
  if (is_relational_type(r.type)) return detail::score_relational_params(r.type, rp, mp, norm);
  if (r.type == FactType::Trend) return lcs_ratio(detail::string_params(rp), detail::string_params(mp));
  if (r.type == FactType::Distribution) return detail::score_distribution_params(rp, mp, cfg);
  return detail::set_overlap(detail::parameter_tokens(rp), detail::parameter_tokens(mp), norm);
}

// ---------------------------------------------------------------------------
// Cross-type conversion

namespace detail {

inline std::optional<DataFact> rank_to_extrema(const DataFact& m) {
  DataFact out = m;
  out.type = FactType::Extrema;
  out.level = semantic_level_of(FactType::Extrema);
  if (!m.parameters) return std::nullopt;
  std::vector<Parameter> params;
  std::optional<std::string> marker;
  for (const auto& p : *m.parameters) {
    if (const double* d = std::get_if<double>(&p); d && !marker) {
      if (*d != 1.0) return std::nullopt;
      marker = std::string(kMaximumMarker);
      continue;
    }
    if (const auto* s = std::get_if<std::string>(&p); s && *s == kLastMarker && !marker) {
      marker = std::string(kMinimumMarker);
      continue;
    }
    params.push_back(p);
  }
  if (!marker) return std::nullopt;
  // marker sits where the position was among the strings; numeric order is kept
  params.insert(std::find_if(params.begin(), params.end(),
                             [](const Parameter& p) { return std::holds_alternative<double>(p); }),
                *marker);
  out.parameters = std::move(params);
  return out;
}

inline std::optional<DataFact> extrema_to_rank(const DataFact& m) {
  DataFact out = m;
  out.type = FactType::Rank;
  out.level = semantic_level_of(FactType::Rank);
  if (!m.parameters) return std::nullopt;
  std::vector<Parameter> strings, numbers;
  std::optional<Parameter> position;
  for (const auto& p : *m.parameters) {
    const auto* s = std::get_if<std::string>(&p);
    if (s && !position && *s == kMaximumMarker) {
      position = 1.0;
    } else if (s && !position && *s == kMinimumMarker) {
      position = std::string(kLastMarker);
    } else if (std::holds_alternative<double>(p)) {
      numbers.push_back(p);
    } else {
      strings.push_back(p);
    }
  }
  if (!position) return std::nullopt;
  std::vector<Parameter> params = std::move(strings);
  params.push_back(*position);  // the position precedes any reported values
  params.insert(params.end(), numbers.begin(), numbers.end());
  out.parameters = std::move(params);
  return out;
}

}  // namespace detail

/// Re-expresses `m` as a fact of type `target`. Rank 1 maps to an extrema
/// maximum and rank Last to a minimum (and back); other groups are retyped
/// when the parameters satisfy the target vocabulary. Returns nullopt when
/// no meaning-preserving form exists.
inline std::optional<DataFact> cross_type_convert(const DataFact& m, FactType target,
                                                  const MatchConfig& cfg) {
  if (!cfg.equivalent(m.type, target)) {
    throw ValidationError(std::string(to_string(m.type)) + " and " +
                              std::string(to_string(target)) + " share no equivalence group",
                          "type");
  }
  if (m.type == target) return m;
  std::optional<DataFact> out;
  if (m.type == FactType::Rank && target == FactType::Extrema) {
    out = detail::rank_to_extrema(m);
  } else if (m.type == FactType::Extrema && target == FactType::Rank) {
    out = detail::extrema_to_rank(m);
  } else {
    DataFact retyped = m;
    retyped.type = target;
    out = canonicalize_vocabulary(std::move(retyped));
  }
  if (!out) return std::nullopt;
  try {
    validate(*out);
  } catch (const ValidationError&) {
    return std::nullopt;
  }
  return out;
}

/// Weighted compatibility of a reference fact and a model fact in [0, 1].
inline double phi(const DataFact& r, const DataFact& m, const MatchConfig& cfg,
                  const TokenNormalizer& norm) {
  if (!cfg.equivalent(r.type, m.type)) return 0.0;
  std::optional<DataFact> converted;
  const DataFact* mm = &m;
  if (m.type != r.type) {
    converted = cross_type_convert(m, r.type, cfg);
    if (!converted) return 0.0;
    mm = &*converted;
  }
  const DimensionWeights w = reallocate_weights(r, *mm, cfg);
  // Sum over active dimensions in a fixed order and divide by the same weight
  // sum, so a pair scoring 1 on every dimension lands exactly on 1.0.
  double num = 0.0, den = 0.0;
  for (auto d : kAllDimensions) {
    const double wd = w[static_cast<std::size_t>(d)];
    if (wd <= 0.0) continue;
    num += wd * sigma_dimension(r, *mm, d, cfg, norm);
    den += wd;
  }
  if (den <= 0.0) return 0.0;
  return std::clamp(num / den, 0.0, 1.0);
}

inline double phi(const DataFact& r, const DataFact& m, const MatchConfig& cfg = {}) {
  return phi(r, m, cfg, TokenNormalizer{});
}

// ---------------------------------------------------------------------------
// Assignment

struct MatchPair {
  std::size_t reference_index = 0;
  std::size_t model_index = 0;
  double score = 0.0;
  bool operator==(const MatchPair&) const = default;
};

struct MatchResult {
  std::vector<MatchPair> pairs;  // in acceptance order
  std::size_t matched_count = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double coverage = 0.0;
};

inline void to_json(json& j, const MatchResult& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"reference_index", p.reference_index},
                     {"model_index", p.model_index},
                     {"score", p.score}});
  }
  j = json{{"pairs", std::move(pairs)}, {"matched_count", r.matched_count},
           {"precision", r.precision},  {"recall", r.recall},
           {"f1", r.f1},                {"coverage", r.coverage}};
}

using ScoreMatrix = std::vector<std::vector<double>>;

/// Greedy one-to-one assignment over a |R|x|M| score matrix. Candidate pairs
/// are visited by score (descending), then pairs whose two keys are identical,
/// then reference key, model key and finally indices; a pair is accepted when
/// its score reaches tau and both endpoints are still free.
inline std::vector<MatchPair> greedy_assign(const ScoreMatrix& scores,
                                            const std::vector<std::string>& reference_keys,
                                            const std::vector<std::string>& model_keys, double tau) {
  const std::size_t n = reference_keys.size();
  const std::size_t m = model_keys.size();
  std::vector<MatchPair> candidates;
  candidates.reserve(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (scores[i][j] >= tau) candidates.push_back({i, j, scores[i][j]});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [&](const MatchPair& a, const MatchPair& b) {
    if (a.score != b.score) return a.score > b.score;
    const bool a_same = reference_keys[a.reference_index] == model_keys[a.model_index];
    const bool b_same = reference_keys[b.reference_index] == model_keys[b.model_index];
    if (a_same != b_same) return a_same;
    if (const int c = reference_keys[a.reference_index].compare(reference_keys[b.reference_index]))
      return c < 0;
    if (const int c = model_keys[a.model_index].compare(model_keys[b.model_index])) return c < 0;
    if (a.reference_index != b.reference_index) return a.reference_index < b.reference_index;
    return a.model_index < b.model_index;
  });
  std::vector<bool> ref_used(n, false), model_used(m, false);
  std::vector<MatchPair> accepted;
  for (const auto& c : candidates) {
    if (ref_used[c.reference_index] || model_used[c.model_index]) continue;
    ref_used[c.reference_index] = true;
    model_used[c.model_index] = true;
    accepted.push_back(c);
  }
  return accepted;
}

/// Precision = k/|M|, recall = coverage = k/|R|, F1 their harmonic mean; each is 0
/// when its denominator is empty.
inline MatchResult summarize_matches(std::vector<MatchPair> pairs, std::size_t n_reference,
                                     std::size_t n_model) {
  MatchResult res;
  res.pairs = std::move(pairs);
  res.matched_count = res.pairs.size();
  const double k = static_cast<double>(res.matched_count);
  res.precision = n_model == 0 ? 0.0 : k / static_cast<double>(n_model);
  res.recall = n_reference == 0 ? 0.0 : k / static_cast<double>(n_reference);
  res.coverage = res.recall;
  res.f1 = res.matched_count == 0 ? 0.0
                                  : 2.0 * res.precision * res.recall / (res.precision + res.recall);
  return res;
}

inline ScoreMatrix score_matrix(const std::vector<DataFact>& reference,
                                const std::vector<DataFact>& model, const MatchConfig& cfg,
                                const TokenNormalizer& norm) {
  ScoreMatrix scores(reference.size(), std::vector<double>(model.size(), 0.0));
  for (std::size_t i = 0; i < reference.size(); ++i) {
    for (std::size_t j = 0; j < model.size(); ++j) {
      scores[i][j] = phi(reference[i], model[j], cfg, norm);
    }
  }
  return scores;
}

inline MatchResult assign(const std::vector<DataFact>& reference, const std::vector<DataFact>& model,
                          const MatchConfig& cfg, const TokenNormalizer& norm) {
  std::vector<std::string> ref_keys, model_keys;
  ref_keys.reserve(reference.size());
  model_keys.reserve(model.size());
  for (const auto& f : reference) ref_keys.push_back(canonical_serialize(f));
  for (const auto& f : model) model_keys.push_back(canonical_serialize(f));
  auto pairs = greedy_assign(score_matrix(reference, model, cfg, norm), ref_keys, model_keys, cfg.tau);
  return summarize_matches(std::move(pairs), reference.size(), model.size());
}

inline MatchResult assign(const std::vector<DataFact>& reference, const std::vector<DataFact>& model,
                          const MatchConfig& cfg = {}) {
  return assign(reference, model, cfg, TokenNormalizer{});
}

}  // namespace chartfi
