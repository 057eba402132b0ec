#pragma once

#include <cstddef>
#include <limits>
#include <vector>

namespace corefmeter {

/// Maximum-weight assignment on a dense rows x cols matrix (Hungarian
/// algorithm, O(n^3)). Returns, for each row, the matched column or
/// `npos` when rows > cols leaves it unmatched. Weights must be >= 0; with
/// an integral weight type the optimum is computed exactly.
template <class W>
std::vector<std::size_t> max_weight_assignment(const std::vector<std::vector<W>>& weight, std::size_t cols) {
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const std::size_t rows = weight.size();
  const std::size_t n = rows > cols ? rows : cols;
  std::vector<std::size_t> result(rows, npos);
  if (rows == 0 || cols == 0) return result;

  W max_w = W{};
  for (const auto& row : weight)
    for (const auto& w : row) max_w = w > max_w ? w : max_w;
  // Square cost matrix, 1-based as in the classical potentials formulation.
  auto cost = [&](std::size_t i, std::size_t j) -> W {
    if (i - 1 < rows && j - 1 < cols) return max_w - weight[i - 1][j - 1];
    return max_w;
  };

  const W inf = std::numeric_limits<W>::max() / 4;
  std::vector<W> u(n + 1, W{}), v(n + 1, W{}), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      W delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const W cur = cost(i0, j) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (std::size_t j = 1; j <= n; ++j) {
    if (p[j] >= 1 && p[j] <= rows && j <= cols) result[p[j] - 1] = j - 1;
  }
  return result;
}

}  // namespace corefmeter
