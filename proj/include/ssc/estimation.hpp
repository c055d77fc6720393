#pragma once

// Closed-form parameter estimates for a fixed assignment.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ssc/types.hpp"

namespace ssc {

inline constexpr double kVarianceFloorScale = 1e-8;
inline constexpr double kMaxPriorRate = 1e12;

/// Lower bound for cluster variances: 1e-8 times the mean per-feature
/// variance of the whole dataset (1e-8 when the data are all identical).
inline double variance_floor(const Dataset& data) {
  const std::size_t n = data.n_samples(), d = data.n_features();
  std::vector<double> mean(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) mean[k] += data.sample(i)[k];
  for (auto& m : mean) m /= static_cast<double>(n);
  double scatter = 0.0;
  for (std::size_t i = 0; i < n; ++i) scatter += squared_distance(data.sample(i), mean);
  const double global = scatter / static_cast<double>(n * d);
  return global > 0.0 ? kVarianceFloorScale * global : kVarianceFloorScale;
}

/// Variance maximizing the spherical Gaussian term for a cluster with
/// n samples of dimension d and scatter sum ||x - mu||^2.
inline double cluster_variance(double scatter, double n, std::size_t d, double floor) {
  return std::max(scatter / (static_cast<double>(d) * n), floor);
}

namespace detail {
inline void check_shapes(const Dataset& data, const Assignment& z) {
  require(z.size() == data.n_samples(), "assignment length differs from sample count");
  require(z.n_clusters >= 1, "assignment needs at least one cluster");
}
inline void check_non_empty(const std::vector<std::size_t>& sizes) {
  for (auto n : sizes)
    if (n == 0) throw EmptyClusterError("empty cluster");
}
}  // namespace detail

inline Matrix<double> estimate_means(const Dataset& data, const Assignment& z) {
  detail::check_shapes(data, z);
  const auto sizes = z.cluster_sizes();
  detail::check_non_empty(sizes);
  Matrix<double> means(z.n_clusters, data.n_features(), 0.0);
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    auto row = means.row(z[i]);
    const auto x = data.sample(i);
    for (std::size_t k = 0; k < row.size(); ++k) row[k] += x[k];
  }
  for (std::size_t r = 0; r < z.n_clusters; ++r)
    for (auto& v : means.row(r)) v /= static_cast<double>(sizes[r]);
  return means;
}

/// sigma_r^2 = sum_{i in r} ||x_i - mu_r||^2 / (D n_r), floored.
inline std::vector<double> estimate_variances(const Dataset& data, const Assignment& z, const Matrix<double>& means,
                                              double floor) {
  detail::check_shapes(data, z);
  require(means.rows() == z.n_clusters && means.cols() == data.n_features(), "means shape mismatch");
  const auto sizes = z.cluster_sizes();
  detail::check_non_empty(sizes);
  std::vector<double> scatter(z.n_clusters, 0.0);
  for (std::size_t i = 0; i < data.n_samples(); ++i) scatter[z[i]] += squared_distance(data.sample(i), means.row(z[i]));
  std::vector<double> var(z.n_clusters);
  for (std::size_t r = 0; r < z.n_clusters; ++r)
    var[r] = cluster_variance(scatter[r], static_cast<double>(sizes[r]), data.n_features(), floor);
  return var;
}

inline std::vector<double> estimate_variances(const Dataset& data, const Assignment& z, const Matrix<double>& means) {
  return estimate_variances(data, z, means, variance_floor(data));
}

/// m_rs = sum_ij A_ij z_ir z_js over ordered pairs: a within-cluster edge adds
/// 2 to m_rr, a between-cluster edge adds 1 to both m_rs and m_sr.
inline Matrix<std::int64_t> ordered_edge_counts(std::span<const Edge> edges, const Assignment& z) {
  Matrix<std::int64_t> m(z.n_clusters, z.n_clusters, 0);
  for (const auto& e : edges) {
    require(e.i < z.size() && e.j < z.size(), "edge index out of range");
    m(z[e.i], z[e.j]) += e.count;
    m(z[e.j], z[e.i]) += e.count;
  }
  return m;
}

/// m / (n_r n_s + c lambda) with c = 2 on the diagonal; lambda = 0 gives the
/// maximum-likelihood rate. Zero edges give a zero rate.
inline double block_rate(std::int64_t m, double n_r, double n_s, double lambda, bool diagonal) {
  if (m == 0) return 0.0;
  return static_cast<double>(m) / (n_r * n_s + (diagonal ? 2.0 : 1.0) * lambda);
}

namespace detail {
inline Matrix<double> rates_from_counts(const Matrix<std::int64_t>& m, const std::vector<std::size_t>& sizes,
                                        double lambda_diag, double lambda_off) {
  const std::size_t k = sizes.size();
  Matrix<double> omega(k, k, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t s = 0; s < k; ++s) {
      if (m(r, s) == 0) continue;
      require(sizes[r] > 0 && sizes[s] > 0, "edges incident to an empty cluster");
      omega(r, s) = block_rate(m(r, s), static_cast<double>(sizes[r]), static_cast<double>(sizes[s]),
                               r == s ? lambda_diag : lambda_off, r == s);
    }
  return omega;
}
}  // namespace detail

inline BlockRates estimate_block_rates(const AnnotationGraphs& graphs, const Assignment& z) {
  require(graphs.n_samples() == z.size(), "graph and assignment sizes differ");
  const auto sizes = z.cluster_sizes();
  return {detail::rates_from_counts(ordered_edge_counts(graphs.must_edges(), z), sizes, 0.0, 0.0),
          detail::rates_from_counts(ordered_edge_counts(graphs.cannot_edges(), z), sizes, 0.0, 0.0)};
}

inline BlockRates estimate_block_rates_with_priors(const AnnotationGraphs& graphs, const Assignment& z,
                                                   const PriorRates& prior) {
  require(graphs.n_samples() == z.size(), "graph and assignment sizes differ");
  const auto sizes = z.cluster_sizes();
  return {detail::rates_from_counts(ordered_edge_counts(graphs.must_edges(), z), sizes, prior.lambda_plus_diag,
                                    prior.lambda_plus_offdiag),
          detail::rates_from_counts(ordered_edge_counts(graphs.cannot_edges(), z), sizes, prior.lambda_minus_diag,
                                    prior.lambda_minus_offdiag)};
}

/// Pairs within clusters, counted with replacement: sum_r n_r (n_r + 1) / 2.
inline double pairs_within(std::span<const std::size_t> sizes) {
  double acc = 0.0;
  for (auto n : sizes) acc += 0.5 * static_cast<double>(n) * static_cast<double>(n + 1);
  return acc;
}

/// Pairs between clusters: sum_{r<s} n_r n_s.
inline double pairs_between(std::span<const std::size_t> sizes) {
  double total = 0.0, squares = 0.0;
  for (auto n : sizes) {
    total += static_cast<double>(n);
    squares += static_cast<double>(n) * static_cast<double>(n);
  }
  return 0.5 * (total * total - squares);
}

/// Prior rates implied by cluster sizes, expert accuracy p and the annotation
/// totals. With q = (1-p)/p, the must-link graph expects f_in per within pair
/// and q f_in per between pair; the cannot-link graph uses 1/q instead.
/// A graph with no annotations gets rates capped at kMaxPriorRate.
inline PriorRates compute_prior_rates(std::span<const std::size_t> sizes, const PriorConfig& config,
                                      std::int64_t m_plus, std::int64_t m_minus) {
  require(config.enabled, "prior rates requested with priors disabled");
  require(m_plus >= 0 && m_minus >= 0 && m_plus + m_minus > 0, "prior rates need at least one annotation");
  const double p = config.clamped_accuracy();
  require(p > 0.0 && p < 1.0, "expert accuracy must lie strictly inside (0, 1)");
  const double odds_against = (1.0 - p) / p;
  const double odds_for = p / (1.0 - p);
  const double p_in = pairs_within(sizes);
  const double p_out = pairs_between(sizes);

  auto rate = [](double f) { return (f > 0.0 && 1.0 / f < kMaxPriorRate) ? 1.0 / f : kMaxPriorRate; };

  PriorRates out;
  out.f_plus_in = static_cast<double>(m_plus) / (p_in + odds_against * p_out);
  out.f_plus_out = odds_against * out.f_plus_in;
  out.f_minus_in = static_cast<double>(m_minus) / (p_in + odds_for * p_out);
  out.f_minus_out = odds_for * out.f_minus_in;
  out.lambda_plus_diag = rate(out.f_plus_in);
  out.lambda_plus_offdiag = rate(out.f_plus_out);
  out.lambda_minus_diag = rate(out.f_minus_in);
  out.lambda_minus_offdiag = rate(out.f_minus_out);
  return out;
}

inline PriorRates compute_prior_rates(const Assignment& z, const PriorConfig& config, std::int64_t m_plus,
                                      std::int64_t m_minus) {
  const auto sizes = z.cluster_sizes();
  return compute_prior_rates(std::span<const std::size_t>(sizes), config, m_plus, m_minus);
}

}  // namespace ssc
