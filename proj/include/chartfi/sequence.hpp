#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

namespace chartfi {

/// Length of the longest common subsequence of two random-access ranges.
/// O(|a|*|b|) time, O(min) memory.
template <typename RangeA, typename RangeB, typename Eq = std::equal_to<>>
std::size_t lcs_length(const RangeA& a, const RangeB& b, Eq eq = {}) {
  const std::size_t n = std::size(a);
  const std::size_t m = std::size(b);
  if (n == 0 || m == 0) return 0;
  std::vector<std::size_t> prev(m + 1, 0), cur(m + 1, 0);
  auto ia = std::begin(a);
  for (std::size_t i = 0; i < n; ++i, ++ia) {
    auto ib = std::begin(b);
    for (std::size_t j = 0; j < m; ++j, ++ib) {
      cur[j + 1] = eq(*ia, *ib) ? prev[j] + 1 : std::max(prev[j + 1], cur[j]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

/// Fractional (1-based) ranks; tied values share the mean of the ranks they span.
inline std::vector<double> fractional_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return values[x] < values[y]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace chartfi
