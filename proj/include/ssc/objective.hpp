#pragma once

// Joint objective of the spherical Gaussian mixture and the two block models
// (must-link / cannot-link), optionally with exponential priors on the block
// rates. Parameters are always at their closed-form estimates, so the
// objective is a function of the assignment alone.
//
//   Q(Z) = - sum_i sum_r z_ir ( ||x_i - mu_r||^2 / sigma_r^2 + D log sigma_r^2 )
//          + sum_{g in +,-} sum_rs ( m^g_rs log w^g_rs - w^g_rs n_r n_s )
//          [ + sum_{r<=s} ( log(l+_rs l-_rs) - l+_rs w+_rs - l-_rs w-_rs ) ]
//
// with m_rs counted over ordered sample pairs and 0 log 0 = 0.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ssc/estimation.hpp"
#include "ssc/types.hpp"

namespace ssc {

/// Literal GMM term for given parameters.
inline double gmm_loglik(const Dataset& data, const Assignment& z, const GaussianParams& g) {
  require(z.size() == data.n_samples(), "assignment length differs from sample count");
  require(g.means.rows() == z.n_clusters && g.variances.size() == z.n_clusters, "parameter count differs from K");
  require(g.means.cols() == data.n_features(), "mean dimension differs from feature count");
  const double d = static_cast<double>(data.n_features());
  double acc = 0.0;
  for (std::size_t i = 0; i < data.n_samples(); ++i) {
    const std::size_t r = z[i];
    const double var = g.variances[r];
    require(var > 0.0, "variances must be positive");
    acc += squared_distance(data.sample(i), g.means.row(r)) / var + d * std::log(var);
  }
  return -acc;
}

/// Block-model term for one graph: sum over ordered pairs (i, j) of
/// A_ij log w - w, which equals 2 sum_edges c log w - sum_rs w n_r n_s.
inline double sbm_loglik(std::span<const Edge> edges, const Assignment& z, const Matrix<double>& rates) {
  require(rates.rows() == z.n_clusters && rates.cols() == z.n_clusters, "rate matrix must be K x K");
  double acc = 0.0;
  for (const auto& e : edges) {
    require(e.i < z.size() && e.j < z.size(), "edge index out of range");
    const double w = rates(z[e.i], z[e.j]);
    if (w <= 0.0) return -std::numeric_limits<double>::infinity();
    acc += 2.0 * static_cast<double>(e.count) * std::log(w);
  }
  const auto sizes = z.cluster_sizes();
  for (std::size_t r = 0; r < z.n_clusters; ++r)
    for (std::size_t s = 0; s < z.n_clusters; ++s)
      acc -= rates(r, s) * static_cast<double>(sizes[r]) * static_cast<double>(sizes[s]);
  return acc;
}

/// Read-only context shared by all solutions of one clustering run.
class Problem {
 public:
  Problem(const Dataset& data, const AnnotationGraphs& graphs, std::size_t n_clusters, PriorConfig prior = {})
      : data_(&data), graphs_(&graphs), k_(n_clusters), prior_(prior) {
    require(graphs.n_samples() == data.n_samples(), "graphs and dataset disagree on sample count");
    if (k_ == 0) throw InvalidInput("K must be at least 1");
    if (data.n_samples() < k_) throw InvalidInput("fewer samples than clusters");
    if (prior_.enabled) {
      prior_.clamped_accuracy();
      if (graphs.m_total() == 0) throw InvalidInput("prior mode needs at least one annotation");
    }
    floor_ = ssc::variance_floor(data);

    const std::size_t n = data.n_samples(), d = data.n_features();
    center_.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) center_[k] += data.sample(i)[k];
    for (auto& c : center_) c /= static_cast<double>(n);
    centered_ = Matrix<double>(n, d);
    centered_norms_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      double sq = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        centered_(i, k) = data.sample(i)[k] - center_[k];
        sq += centered_(i, k) * centered_(i, k);
      }
      centered_norms_[i] = sq;
    }
    for (std::size_t i = 0; i < n; ++i) (graphs.is_annotated(i) ? annotated_ : unannotated_).push_back(i);
  }

  const Dataset& data() const { return *data_; }
  const AnnotationGraphs& graphs() const { return *graphs_; }
  std::size_t n_clusters() const { return k_; }
  std::size_t n_samples() const { return data_->n_samples(); }
  std::size_t n_features() const { return data_->n_features(); }
  const PriorConfig& prior() const { return prior_; }
  double variance_floor() const { return floor_; }

  /// Features shifted by the dataset mean; cluster sums are kept in this frame.
  std::span<const double> centered(std::size_t i) const { return centered_.row(i); }
  double centered_norm(std::size_t i) const { return centered_norms_[i]; }
  std::span<const double> center() const { return center_; }

  const std::vector<std::size_t>& annotated() const { return annotated_; }
  const std::vector<std::size_t>& unannotated() const { return unannotated_; }

 private:
  const Dataset* data_;
  const AnnotationGraphs* graphs_;
  std::size_t k_;
  PriorConfig prior_;
  double floor_ = 0.0;
  std::vector<double> center_;
  Matrix<double> centered_;
  std::vector<double> centered_norms_;
  std::vector<std::size_t> annotated_;
  std::vector<std::size_t> unannotated_;
};

/// Sufficient statistics of an assignment.
struct ClusterStats {
  std::vector<std::size_t> counts;
  Matrix<double> sums;         // K x D, centered frame
  std::vector<double> sumsq;   // K, centered frame
  Matrix<std::int64_t> must;   // K x K ordered-pair edge counts
  Matrix<std::int64_t> cannot;

  static ClusterStats compute(const Problem& p, const Assignment& z) {
    const std::size_t k = p.n_clusters();
    ClusterStats s;
    s.counts.assign(k, 0);
    s.sums = Matrix<double>(k, p.n_features(), 0.0);
    s.sumsq.assign(k, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
      const std::size_t r = z[i];
      ++s.counts[r];
      auto row = s.sums.row(r);
      const auto x = p.centered(i);
      for (std::size_t d = 0; d < row.size(); ++d) row[d] += x[d];
      s.sumsq[r] += p.centered_norm(i);
    }
    s.must = ordered_edge_counts(p.graphs().must_edges(), z);
    s.cannot = ordered_edge_counts(p.graphs().cannot_edges(), z);
    return s;
  }

  /// Moves sample i from cluster `from` to `to`; `labels` are the labels before the move.
  void move(const Problem& p, std::span<const std::size_t> labels, std::size_t i, std::size_t from,
            std::size_t to) {
    --counts[from];
    ++counts[to];
    const auto x = p.centered(i);
    auto src = sums.row(from);
    auto dst = sums.row(to);
    for (std::size_t d = 0; d < x.size(); ++d) {
      src[d] -= x[d];
      dst[d] += x[d];
    }
    sumsq[from] -= p.centered_norm(i);
    sumsq[to] += p.centered_norm(i);
    auto shift = [&](Matrix<std::int64_t>& m, std::span<const Neighbor> nbrs) {
      for (const auto& nb : nbrs) {
        const std::size_t t = labels[nb.sample];
        m(from, t) -= nb.count;
        m(t, from) -= nb.count;
        m(to, t) += nb.count;
        m(t, to) += nb.count;
      }
    };
    shift(must, p.graphs().must_neighbors(i));
    shift(cannot, p.graphs().cannot_neighbors(i));
  }
};

/// Objective split into its additive parts.
struct ObjectiveParts {
  double gmm = 0.0;
  double must = 0.0;
  double cannot = 0.0;
  double prior = 0.0;
  double total() const { return gmm + must + cannot + prior; }
};

namespace detail {

struct GaussianTerm {
  double value;
  double variance;
};

inline GaussianTerm gaussian_term(std::size_t n, std::span<const double> sum, double sumsq, double floor) {
  const double count = static_cast<double>(n);
  double norm = 0.0;
  for (double v : sum) norm += v * v;
  const double scatter = std::max(sumsq - norm / count, 0.0);
  const double var = cluster_variance(scatter, count, sum.size(), floor);
  return {-(scatter / var + static_cast<double>(sum.size()) * count * std::log(var)), var};
}

inline double graph_term(const Matrix<std::int64_t>& m, const std::vector<std::size_t>& counts, double lambda_diag,
                         double lambda_off, Matrix<double>* rates_out) {
  const std::size_t k = counts.size();
  double acc = 0.0;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t s = 0; s < k; ++s) {
      const std::int64_t edges = m(r, s);
      if (edges == 0) {
        if (rates_out) (*rates_out)(r, s) = 0.0;
        continue;
      }
      const double nn = static_cast<double>(counts[r]) * static_cast<double>(counts[s]);
      const double w = block_rate(edges, static_cast<double>(counts[r]), static_cast<double>(counts[s]),
                                  r == s ? lambda_diag : lambda_off, r == s);
      if (rates_out) (*rates_out)(r, s) = w;
      acc += static_cast<double>(edges) * std::log(w) - w * nn;
    }
  return acc;
}

inline double prior_term(const PriorRates& pr, const Matrix<double>& plus, const Matrix<double>& minus) {
  const std::size_t k = plus.rows();
  double acc = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    acc += std::log(pr.lambda_plus_diag * pr.lambda_minus_diag) - pr.lambda_plus_diag * plus(r, r) -
           pr.lambda_minus_diag * minus(r, r);
    for (std::size_t s = r + 1; s < k; ++s)
      acc += std::log(pr.lambda_plus_offdiag * pr.lambda_minus_offdiag) - pr.lambda_plus_offdiag * plus(r, s) -
             pr.lambda_minus_offdiag * minus(r, s);
  }
  return acc;
}

/// Graph and prior parts from cluster statistics; fills rates/priors when given.
inline ObjectiveParts graph_parts(const Problem& p, const ClusterStats& s, BlockRates& rates,
                                  std::optional<PriorRates>& priors) {
  ObjectiveParts parts;
  if (p.prior().enabled) {
    priors = compute_prior_rates(std::span<const std::size_t>(s.counts), p.prior(), p.graphs().m_plus(),
                                 p.graphs().m_minus());
    parts.must = graph_term(s.must, s.counts, priors->lambda_plus_diag, priors->lambda_plus_offdiag, &rates.omega_plus);
    parts.cannot =
        graph_term(s.cannot, s.counts, priors->lambda_minus_diag, priors->lambda_minus_offdiag, &rates.omega_minus);
    parts.prior = prior_term(*priors, rates.omega_plus, rates.omega_minus);
  } else {
    priors.reset();
    parts.must = graph_term(s.must, s.counts, 0.0, 0.0, &rates.omega_plus);
    parts.cannot = graph_term(s.cannot, s.counts, 0.0, 0.0, &rates.omega_minus);
  }
  return parts;
}

}  // namespace detail

/// An assignment together with its statistics, closed-form parameters and
/// objective. Mutated only through relocate(); confined to one thread.
class Solution {
 public:
  static Solution evaluate(const Problem&&, Assignment) = delete;
  static Solution evaluate(const Problem& p, Assignment z) {
    require(z.size() == p.n_samples(), "assignment length differs from sample count");
    require(z.n_clusters == p.n_clusters(), "assignment K differs from problem K");
    Solution sol(p);
    sol.assignment_ = std::move(z);
    sol.stats_ = ClusterStats::compute(p, sol.assignment_);
    for (auto n : sol.stats_.counts)
      if (n == 0) throw EmptyClusterError("empty cluster");
    sol.refresh();
    return sol;
  }

  const Problem& problem() const { return *problem_; }
  const Assignment& assignment() const { return assignment_; }
  std::size_t label(std::size_t i) const { return assignment_[i]; }
  std::size_t n_clusters() const { return assignment_.n_clusters; }
  const GaussianParams& gaussians() const { return gaussians_; }
  const BlockRates& rates() const { return rates_; }
  const std::optional<PriorRates>& priors() const { return priors_; }
  const ClusterStats& stats() const { return stats_; }
  double objective() const { return parts_.total(); }
  const ObjectiveParts& parts() const { return parts_; }

  /// Q(Z with sample i moved to `target`) - Q(Z), parameters re-estimated
  /// on both sides. Only the two affected clusters and the sample's edges are
  /// touched.
  double relocation_delta(std::size_t i, std::size_t target) const {
    require(i < assignment_.size(), "sample index out of range");
    require(target < n_clusters(), "target cluster out of range");
    const std::size_t from = assignment_[i];
    require(target != from, "target equals current cluster");
    if (stats_.counts[from] == 1) throw EmptyClusterError("relocation would empty the source cluster");

    scratch_ = stats_;
    scratch_.move(*problem_, assignment_.labels, i, from, target);
    const double floor = problem_->variance_floor();
    const double gmm_from = detail::gaussian_term(scratch_.counts[from], scratch_.sums.row(from),
                                                  scratch_.sumsq[from], floor).value;
    const double gmm_to =
        detail::gaussian_term(scratch_.counts[target], scratch_.sums.row(target), scratch_.sumsq[target], floor)
            .value;
    const auto graph = detail::graph_parts(*problem_, scratch_, scratch_rates_, scratch_priors_);
    const double graph_before = parts_.must + parts_.cannot + parts_.prior;
    const double graph_after = graph.must + graph.cannot + graph.prior;
    return (gmm_from + gmm_to - gmm_terms_[from] - gmm_terms_[target]) + (graph_after - graph_before);
  }

  void relocate(std::size_t i, std::size_t target) {
    require(i < assignment_.size() && target < n_clusters(), "index out of range");
    const std::size_t from = assignment_[i];
    if (from == target) return;
    if (stats_.counts[from] == 1) throw EmptyClusterError("relocation would empty the source cluster");
    stats_.move(*problem_, assignment_.labels, i, from, target);
    assignment_.labels[i] = target;
    refresh();
  }

  /// Largest deviation between the cached state and a from-scratch rebuild:
  /// relative for statistics, absolute for the objective.
  double consistency_error() const {
    const auto fresh = evaluate(*problem_, assignment_);
    double err = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); };
    for (std::size_t r = 0; r < n_clusters(); ++r) {
      if (fresh.stats_.counts[r] != stats_.counts[r]) return std::numeric_limits<double>::infinity();
      err = std::max(err, rel(fresh.stats_.sumsq[r], stats_.sumsq[r]));
      for (std::size_t d = 0; d < stats_.sums.cols(); ++d)
        err = std::max(err, rel(fresh.stats_.sums(r, d), stats_.sums(r, d)));
    }
    if (!(fresh.stats_.must == stats_.must) || !(fresh.stats_.cannot == stats_.cannot))
      return std::numeric_limits<double>::infinity();
    return std::max(err, std::abs(fresh.objective() - objective()));
  }

 private:
  explicit Solution(const Problem& p) : problem_(&p) {}

  void refresh() {
    const Problem& p = *problem_;
    const std::size_t k = p.n_clusters(), d = p.n_features();
    gaussians_.means = Matrix<double>(k, d);
    gaussians_.variances.assign(k, 0.0);
    gmm_terms_.assign(k, 0.0);
    double gmm = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const auto t = detail::gaussian_term(stats_.counts[r], stats_.sums.row(r), stats_.sumsq[r], p.variance_floor());
      gmm_terms_[r] = t.value;
      gmm += t.value;
      gaussians_.variances[r] = t.variance;
      for (std::size_t j = 0; j < d; ++j)
        gaussians_.means(r, j) = stats_.sums(r, j) / static_cast<double>(stats_.counts[r]) + p.center()[j];
    }
    rates_.omega_plus = Matrix<double>(k, k, 0.0);
    rates_.omega_minus = Matrix<double>(k, k, 0.0);
    parts_ = detail::graph_parts(p, stats_, rates_, priors_);
    parts_.gmm = gmm;
    scratch_rates_ = rates_;
  }

  const Problem* problem_;
  Assignment assignment_;
  ClusterStats stats_;
  GaussianParams gaussians_;
  BlockRates rates_;
  std::optional<PriorRates> priors_;
  std::vector<double> gmm_terms_;
  ObjectiveParts parts_;

  mutable ClusterStats scratch_;
  mutable BlockRates scratch_rates_;
  mutable std::optional<PriorRates> scratch_priors_;
};

inline Solution evaluate_objective(const Problem& p, Assignment z) { return Solution::evaluate(p, std::move(z)); }

inline double relocation_delta(const Solution& s, std::size_t sample, std::size_t target_cluster) {
  return s.relocation_delta(sample, target_cluster);
}

}  // namespace ssc
