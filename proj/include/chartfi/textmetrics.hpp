#pragma once

// Reference-based text metrics (BLEU-4 without smoothing, ROUGE-L) and
// Spearman rank correlation with average ranks for ties.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdlib>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "chartfi/error.hpp"
#include "chartfi/sequence.hpp"

namespace chartfi {

/// Lowercases, splits on whitespace and emits every punctuation character as
/// its own token.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      tokens.emplace_back(1, ch);
    } else {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  flush();
  return tokens;
}

inline constexpr std::size_t kBleuMaxOrder = 4;

struct BleuResult {
  double score = 0.0;
  std::array<double, kBleuMaxOrder> precisions{};  // modified n-gram precisions
  double brevity_penalty = 0.0;
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
};

namespace detail {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

inline NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

// Closest reference length; ties go to the shorter reference.
inline std::size_t closest_ref_length(std::size_t cand, const std::vector<std::vector<std::string>>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = static_cast<long long>(r.size()) - static_cast<long long>(cand);
    const auto bd = static_cast<long long>(best) - static_cast<long long>(cand);
    if (std::llabs(d) < std::llabs(bd) || (std::llabs(d) == std::llabs(bd) && r.size() < best)) {
      best = r.size();
    }
  }
  return best;
}

}  // namespace detail

/// Corpus BLEU-4: clipped n-gram counts and lengths are pooled over all
/// segments before the geometric mean and brevity penalty. Any zero n-gram
/// precision (including a missing order) yields 0.
inline BleuResult corpus_bleu(const std::vector<std::string>& candidates,
                              const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size()) {
    throw ValidationError("bleu: candidate and reference counts differ", "references");
  }
  std::array<double, kBleuMaxOrder> matched{}, total{};
  BleuResult res;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto cand = tokenize(candidates[s]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[s]) {
      auto t = tokenize(r);
      if (!t.empty()) refs.push_back(std::move(t));
    }
    if (cand.empty() || refs.empty()) continue;
    res.candidate_length += cand.size();
    res.reference_length += detail::closest_ref_length(cand.size(), refs);
    for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
      const auto cand_counts = detail::count_ngrams(cand, n);
      std::map<std::vector<std::string>, std::size_t> max_ref;
      for (const auto& r : refs) {
        for (const auto& [gram, c] : detail::count_ngrams(r, n)) {
          max_ref[gram] = std::max(max_ref[gram], c);
        }
      }
      for (const auto& [gram, c] : cand_counts) {
        auto it = max_ref.find(gram);
        matched[n - 1] += static_cast<double>(std::min(c, it == max_ref.end() ? 0 : it->second));
        total[n - 1] += static_cast<double>(c);
      }
    }
  }
  if (res.candidate_length == 0) return res;
  const double c = static_cast<double>(res.candidate_length);
  const double r = static_cast<double>(res.reference_length);
  res.brevity_penalty = c > r ? 1.0 : std::exp(1.0 - r / c);
  double log_sum = 0.0;
  bool any_zero = false;
  for (std::size_t n = 0; n < kBleuMaxOrder; ++n) {
    res.precisions[n] = total[n] > 0.0 ? matched[n] / total[n] : 0.0;
    if (res.precisions[n] <= 0.0) {
      any_zero = true;
    } else {
      log_sum += std::log(res.precisions[n]);
    }
  }
  res.score = any_zero ? 0.0 : res.brevity_penalty * std::exp(log_sum / kBleuMaxOrder);
  return res;
}

inline BleuResult bleu_detail(const std::string& candidate, const std::vector<std::string>& references) {
  return corpus_bleu({candidate}, {references});
}

inline double bleu(const std::string& candidate, const std::vector<std::string>& references) {
  return bleu_detail(candidate, references).score;
}

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

inline RougeL rouge_l(const std::string& candidate, const std::string& reference) {
  const auto c = tokenize(candidate);
  const auto r = tokenize(reference);
  RougeL out;
  if (c.empty() || r.empty()) return out;
  const double lcs = static_cast<double>(lcs_length(c, r));
  out.precision = lcs / static_cast<double>(c.size());
  out.recall = lcs / static_cast<double>(r.size());
  out.f1 = lcs == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

struct ScorePair {
  std::vector<double> automatic;
  std::vector<double> human;
};

/// Pearson correlation of fractional ranks. nullopt when either list is
/// constant; throws on mismatched lengths or fewer than two points.
inline std::optional<double> spearman(const ScorePair& pairs) {
  if (pairs.automatic.size() != pairs.human.size()) {
    throw ValidationError("spearman: lists differ in length", "human");
  }
  if (pairs.automatic.size() < 2) throw ValidationError("spearman: need at least two pairs", "automatic");
  const auto rx = fractional_ranks(pairs.automatic);
  const auto ry = fractional_ranks(pairs.human);
  const double n = static_cast<double>(rx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace chartfi
