#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "ssc/types.hpp"

namespace ssc {

struct MatchingResult {
  std::vector<std::size_t> assignment;  // row r is matched to column assignment[r]
  double cost = 0.0;
};

namespace detail {

// Kuhn augmenting path restricted to allowed edges.
inline bool augment(std::size_t row, const std::vector<std::vector<std::size_t>>& allowed,
                    std::vector<std::size_t>& col_owner, std::vector<char>& seen) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  for (std::size_t c : allowed[row]) {
    if (seen[c]) continue;
    seen[c] = 1;
    if (col_owner[c] == none || augment(col_owner[c], allowed, col_owner, seen)) {
      col_owner[c] = row;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Exact minimum-cost perfect matching of a square cost matrix (Hungarian
/// method with potentials, O(K^3)). Among optimal permutations the
/// lexicographically smallest is returned: after solving, the optimal
/// permutations are exactly the perfect matchings on zero-reduced-cost edges,
/// and rows are fixed greedily to their smallest feasible column.
inline MatchingResult min_cost_matching(const Matrix<double>& costs) {
  require(costs.rows() == costs.cols(), "cost matrix must be square");
  for (double c : costs.values()) require(std::isfinite(c), "cost matrix entries must be finite");
  const std::size_t n = costs.rows();
  if (n == 0) return {};

  constexpr double inf = std::numeric_limits<double>::infinity();
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_v(n + 1);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::fill(min_v.begin(), min_v.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = costs(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double scale = 1.0;
  for (double c : costs.values()) scale = std::max(scale, std::abs(c));
  const double tol = 1e-9 * scale * static_cast<double>(n);
  std::vector<std::vector<std::size_t>> tight(n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c)
      if (costs(r, c) - u[r + 1] - v[c + 1] <= tol) tight[r].push_back(c);

  MatchingResult out;
  out.assignment.assign(n, none);
  std::vector<char> taken(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c : tight[r]) {
      if (taken[c]) continue;
      // Can rows r+1.. still be matched to the remaining columns?
      std::vector<std::vector<std::size_t>> rest(n);
      for (std::size_t q = r + 1; q < n; ++q)
        for (std::size_t cc : tight[q])
          if (!taken[cc] && cc != c) rest[q].push_back(cc);
      std::vector<std::size_t> col_owner(n, none);
      bool ok = true;
      for (std::size_t q = r + 1; q < n && ok; ++q) {
        std::vector<char> seen(n, 0);
        ok = detail::augment(q, rest, col_owner, seen);
      }
      if (ok) {
        out.assignment[r] = c;
        taken[c] = 1;
        break;
      }
    }
    require(out.assignment[r] != none, "matching refinement failed");
  }
  for (std::size_t r = 0; r < n; ++r) out.cost += costs(r, out.assignment[r]);
  return out;
}

}  // namespace ssc
