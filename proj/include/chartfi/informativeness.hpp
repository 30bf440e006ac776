#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "chartfi/core_model.hpp"

namespace chartfi {

inline constexpr LevelArray kDefaultLevelBaseWeights{1.0, 6.0, 7.0, 7.0};

/// Share of reference units at each level.
inline LevelArray level_proportions(const std::vector<LevelUnit>& reference_units) {
  if (reference_units.empty()) {
    throw ValidationError("level proportions need at least one reference unit", "reference_units");
  }
  LevelArray counts{};
  for (const auto& u : reference_units) counts[level_index(u.level)] += 1.0;
  const double total = static_cast<double>(reference_units.size());
  for (double& c : counts) c /= total;
  return counts;
}

/// w_l = b_l * exp(p_l) / sum_k b_k * exp(p_k).
inline LevelWeights context_weights(const LevelArray& proportions,
                                    const LevelArray& base = kDefaultLevelBaseWeights) {
  double psum = 0.0;
  bool all_zero = true;
  for (double p : proportions) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("proportions must lie in [0, 1]", "proportions");
    psum += p;
    all_zero = all_zero && p == 0.0;
  }
  if (!all_zero && std::fabs(psum - 1.0) > 1e-9) {
    throw ValidationError("proportions must sum to 1", "proportions");
  }
  for (double b : base) {
    if (!(b > 0.0)) throw ValidationError("base level weights must be positive", "base");
  }
  LevelWeights w;
  w.base = base;
  w.proportions = proportions;
  double total = 0.0;
  LevelArray raw{};
  for (std::size_t l = 0; l < raw.size(); ++l) {
    raw[l] = base[l] * std::exp(proportions[l]);
    total += raw[l];
  }
  for (std::size_t l = 0; l < raw.size(); ++l) w.normalized[l] = raw[l] / total;
  return w;
}

struct InformativenessResult {
  double score = 0.0;
  bool empty_description = false;
  LevelArray generated_histogram{};
};

/// Mean normalized weight of the generated units' levels; an empty
/// description scores 0 and is flagged.
inline InformativenessResult informativeness_score(const std::vector<LevelUnit>& generated_units,
                                                   const LevelWeights& w) {
  InformativenessResult res;
  if (generated_units.empty()) {
    res.empty_description = true;
    return res;
  }
  double sum = 0.0;
  for (const auto& u : generated_units) {
    sum += w[u.level];
    res.generated_histogram[level_index(u.level)] += 1.0;
  }
  res.score = sum / static_cast<double>(generated_units.size());
  return res;
}

/// Per-record audit document {p, w, level_histogram_generated, score}.
inline json informativeness_json(const LevelWeights& w, const InformativenessResult& r) {
  return json{{"p", w.proportions},
              {"w", w.normalized},
              {"level_histogram_generated", r.generated_histogram},
              {"score", r.score},
              {"empty_description", r.empty_description}};
}

}  // namespace chartfi
