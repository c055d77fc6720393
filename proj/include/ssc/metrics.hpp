#pragma once

// Partition and mixture comparison metrics.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "ssc/matching.hpp"
#include "ssc/types.hpp"

namespace ssc {

struct ContingencyTable {
  Matrix<std::size_t> counts;
  std::vector<std::size_t> row_totals;
  std::vector<std::size_t> col_totals;
  std::size_t total = 0;

  static ContingencyTable build(std::span<const std::size_t> a, std::span<const std::size_t> b) {
    require(a.size() == b.size(), "labelings differ in length");
    require(!a.empty(), "labelings must be non-empty");
    const std::size_t ka = *std::max_element(a.begin(), a.end()) + 1;
    const std::size_t kb = *std::max_element(b.begin(), b.end()) + 1;
    ContingencyTable t;
    t.counts = Matrix<std::size_t>(ka, kb, 0);
    t.row_totals.assign(ka, 0);
    t.col_totals.assign(kb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++t.counts(a[i], b[i]);
      ++t.row_totals[a[i]];
      ++t.col_totals[b[i]];
    }
    t.total = a.size();
    return t;
  }
};

/// Normalized mutual information, 2 I(U;V) / (H(U) + H(V)), natural logs.
/// Two single-cluster labelings score 1; zero mutual information scores 0.
inline double nmi(std::span<const std::size_t> labels_a, std::span<const std::size_t> labels_b) {
  const auto t = ContingencyTable::build(labels_a, labels_b);
  const double n = static_cast<double>(t.total);
  auto entropy = [n](const std::vector<std::size_t>& totals) {
    double h = 0.0;
    for (auto c : totals)
      if (c > 0) {
        const double q = static_cast<double>(c) / n;
        h -= q * std::log(q);
      }
    return h;
  };
  const double hu = entropy(t.row_totals);
  const double hv = entropy(t.col_totals);
  if (hu + hv <= 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t u = 0; u < t.counts.rows(); ++u)
    for (std::size_t v = 0; v < t.counts.cols(); ++v) {
      const auto c = t.counts(u, v);
      if (c == 0) continue;
      const double joint = static_cast<double>(c) / n;
      mi += joint * std::log(static_cast<double>(c) * n /
                             (static_cast<double>(t.row_totals[u]) * static_cast<double>(t.col_totals[v])));
    }
  if (mi <= 0.0) return 0.0;
  return std::clamp(2.0 * mi / (hu + hv), 0.0, 1.0);
}

/// KL( N(mu1, var1 I) || N(mu2, var2 I) ) in D dimensions.
inline double kl_spherical_gaussian(std::span<const double> mu1, double var1, std::span<const double> mu2, double var2) {
  require(mu1.size() == mu2.size(), "mean dimensions differ");
  require(var1 > 0.0 && var2 > 0.0, "variances must be positive");
  const double d = static_cast<double>(mu1.size());
  return 0.5 * d * std::log(var2 / var1) + (d * var1 + squared_distance(mu1, mu2)) / (2.0 * var2) - 0.5 * d;
}

struct SphericalMixture {
  Matrix<double> means;          // K x D
  std::vector<double> variances; // K
  std::vector<double> weights;   // K, sums to 1; empty means uniform

  double weight(std::size_t r) const {
    return weights.empty() ? 1.0 / static_cast<double>(variances.size()) : weights[r];
  }
};

/// Matching-based approximation of KL(a || b): components are paired by a
/// minimum-cost matching on KL(a_r || b_s) + log(w_r / w'_s), and the matched
/// costs are averaged with a's weights.
inline double kl_mixtures_matched(const SphericalMixture& a, const SphericalMixture& b) {
  const std::size_t k = a.variances.size();
  require(b.variances.size() == k && a.means.rows() == k && b.means.rows() == k, "mixtures must have equal K");
  require(a.means.cols() == b.means.cols(), "mixture dimensions differ");
  Matrix<double> costs(k, k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t s = 0; s < k; ++s)
      costs(r, s) = kl_spherical_gaussian(a.means.row(r), a.variances[r], b.means.row(s), b.variances[s]) +
                    std::log(a.weight(r) / b.weight(s));
  const auto match = min_cost_matching(costs);
  double kl = 0.0;
  for (std::size_t r = 0; r < k; ++r) kl += a.weight(r) * costs(r, match.assignment[r]);
  return kl;
}

namespace detail {
inline std::size_t orphans(const Matrix<double>& from, const Matrix<double>& to) {
  std::vector<char> hit(to.rows(), 0);
  for (std::size_t r = 0; r < from.rows(); ++r) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < to.rows(); ++s) {
      const double d = squared_distance(from.row(r), to.row(s));
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    hit[best] = 1;
  }
  return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 0));
}
}  // namespace detail

/// Symmetric centroid index: the larger number of orphaned centers when each
/// set is mapped onto its nearest partner in the other.
inline std::size_t centroid_index(const Matrix<double>& centers_a, const Matrix<double>& centers_b) {
  require(centers_a.rows() == centers_b.rows(), "center sets must have equal K");
  require(centers_a.cols() == centers_b.cols(), "center dimensions differ");
  return std::max(detail::orphans(centers_a, centers_b), detail::orphans(centers_b, centers_a));
}

}  // namespace ssc
