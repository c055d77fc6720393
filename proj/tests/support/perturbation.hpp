#pragma once

// Closed-form optimality checks: nudging an estimated parameter by epsilon
// must lower the objective it maximizes. Downward steps on positive
// parameters are capped at half the value. Objectives are evaluated with the
// oracle formulas, parameters come from the library under test.

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "ssc/estimation.hpp"

namespace perturbation {

struct Tally {
  int checks = 0;
  int failures = 0;
  void record(bool ok) {
    ++checks;
    if (!ok) ++failures;
  }
  void merge(const Tally& o) {
    checks += o.checks;
    failures += o.failures;
  }
};

inline std::vector<double> unit_vector(std::mt19937_64& gen, std::size_t d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> u(d);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : u) {
      v = normal(gen);
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& v : u) v /= norm;
  return u;
}

/// Means and variances from the library; gmm term from the oracle.
inline Tally gaussians(const ssc::Dataset& data, const std::vector<std::size_t>& labels, std::size_t k,
                       std::mt19937_64& gen, int directions, double eps) {
  const ssc::Assignment z(labels, k);
  const auto means = ssc::estimate_means(data, z);
  const auto vars = ssc::estimate_variances(data, z, means);
  oracle::Moments base;
  base.sizes = z.cluster_sizes();
  base.means.assign(k, {});
  for (std::size_t r = 0; r < k; ++r) base.means[r].assign(means.row(r).begin(), means.row(r).end());
  base.variances = vars;
  const double q0 = oracle::gmm_term(data, labels, base);
  Tally t;
  for (std::size_t r = 0; r < k; ++r) {
    for (int dir = 0; dir < directions; ++dir) {
      auto m = base;
      const auto u = unit_vector(gen, data.n_features());
      for (std::size_t j = 0; j < u.size(); ++j) m.means[r][j] += eps * u[j];
      t.record(oracle::gmm_term(data, labels, m) < q0);
    }
    for (double step : {-std::min(eps, 0.5 * base.variances[r]), eps}) {
      auto m = base;
      m.variances[r] += step;
      t.record(oracle::gmm_term(data, labels, m) < q0);
    }
  }
  return t;
}

/// Maximum-likelihood block rates; per-graph block-model term from the oracle.
inline Tally block_rates(const ssc::AnnotationGraphs& g, const std::vector<std::size_t>& labels, std::size_t k,
                         double eps) {
  const ssc::Assignment z(labels, k);
  const auto rates = ssc::estimate_block_rates(g, z);
  const std::size_t n = labels.size();
  Tally t;
  auto check = [&](const std::vector<ssc::Edge>& edges, const ssc::Matrix<double>& w) {
    const auto a = oracle::dense(edges, n);
    const auto m = oracle::block_counts(a, labels, k);
    const double q0 = oracle::sbm_term(a, labels, w);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t s = 0; s < k; ++s) {
        if (m(r, s) == 0.0) continue;
        for (double step : {-std::min(eps, 0.5 * w(r, s)), eps}) {
          auto w2 = w;
          w2(r, s) += step;
          t.record(oracle::sbm_term(a, labels, w2) < q0);
        }
      }
  };
  check(g.must_edges(), rates.omega_plus);
  check(g.cannot_edges(), rates.omega_minus);
  return t;
}

/// Prior-adjusted rates against the per-entry posterior term
/// m log w - (n_r n_s + c lambda) w, c = 2 on the diagonal.
inline Tally posterior_rates(const ssc::AnnotationGraphs& g, const std::vector<std::size_t>& labels, std::size_t k,
                             double p, double eps) {
  const ssc::Assignment z(labels, k);
  const auto sizes = z.cluster_sizes();
  const auto pr = ssc::compute_prior_rates(z, ssc::PriorConfig{true, p}, g.m_plus(), g.m_minus());
  const auto rates = ssc::estimate_block_rates_with_priors(g, z, pr);
  const std::size_t n = labels.size();
  Tally t;
  auto check = [&](const std::vector<ssc::Edge>& edges, const ssc::Matrix<double>& w, bool plus) {
    const auto m = oracle::block_counts(oracle::dense(edges, n), labels, k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t s = 0; s < k; ++s) {
        if (m(r, s) == 0.0) continue;
        const double lambda = plus ? pr.plus(r, s) : pr.minus(r, s);
        const double c = r == s ? 2.0 : 1.0;
        const double nn = double(sizes[r]) * double(sizes[s]);
        auto term = [&](double x) { return m(r, s) * std::log(x) - (nn + c * lambda) * x; };
        for (double step : {-std::min(eps, 0.5 * w(r, s)), eps}) t.record(term(w(r, s) + step) < term(w(r, s)));
      }
  };
  check(g.must_edges(), rates.omega_plus, true);
  check(g.cannot_edges(), rates.omega_minus, false);
  return t;
}

}  // namespace perturbation
