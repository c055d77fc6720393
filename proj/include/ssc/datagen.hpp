#pragma once

// Synthetic benchmarks: spherical Gaussian mixtures with uniformly drawn
// means and variances, plus noisy expert pairwise annotations.

#include <cstdint>
#include <utility>
#include <vector>

#include "ssc/random.hpp"
#include "ssc/types.hpp"

namespace ssc {

/// Lower bound applied to sampled component variances.
inline constexpr double kMinGeneratedVariance = 1e-8;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct MixtureSpec {
  std::size_t n_samples = 200;
  std::size_t n_features = 10;
  std::size_t n_clusters = 4;
  Interval mean_range{-1.0, 1.0};
  Interval variance_range{0.0, 5.0};
  std::uint64_t seed = 1;
};

struct ExpertSpec {
  double accuracy = 0.9;
  std::size_t n_annotations = 0;
  std::uint64_t seed = 1;
};

struct GroundTruth {
  std::vector<std::size_t> labels;
  Matrix<double> means;
  std::vector<double> variances;
  std::size_t n_clusters() const { return variances.size(); }
};

inline std::pair<Dataset, GroundTruth> generate_mixture(const MixtureSpec& spec) {
  if (spec.n_clusters < 1 || spec.n_samples < spec.n_clusters || spec.n_features < 1)
    throw InvalidInput("mixture spec needs N >= K >= 1 and D >= 1");
  auto finite_range = [](Interval r) { return std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo <= r.hi; };
  if (!finite_range(spec.mean_range) || !finite_range(spec.variance_range) || spec.variance_range.lo < 0.0)
    throw InvalidInput("mixture ranges must be finite, ordered, with non-negative variances");

  Rng rng(spec.seed);
  const std::size_t k = spec.n_clusters, d = spec.n_features, n = spec.n_samples;
  GroundTruth truth;
  truth.means = Matrix<double>(k, d);
  truth.variances.resize(k);
  for (std::size_t r = 0; r < k; ++r) {
    for (auto& v : truth.means.row(r)) v = rng.uniform(spec.mean_range.lo, spec.mean_range.hi);
    truth.variances[r] =
        std::max(rng.uniform(spec.variance_range.lo, spec.variance_range.hi), kMinGeneratedVariance);
  }
  Matrix<double> x(n, d);
  truth.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = rng.uniform_index(k);
    truth.labels[i] = r;
    const double sigma = std::sqrt(truth.variances[r]);
    for (std::size_t j = 0; j < d; ++j) x(i, j) = truth.means(r, j) + sigma * rng.normal();
  }
  return {Dataset(std::move(x)), std::move(truth)};
}

/// Draws m unordered pairs i != j uniformly with replacement; a pair from
/// groups (r, s) becomes a must-link with probability must_prob(r, s),
/// otherwise a cannot-link.
inline std::vector<Annotation> draw_annotations(std::span<const std::size_t> labels, const Matrix<double>& must_prob,
                                                std::size_t m, std::uint64_t seed) {
  const std::size_t n = labels.size();
  if (m > 0 && n < 2) throw InvalidInput("annotations need at least two samples");
  Rng rng(seed);
  std::vector<Annotation> out;
  out.reserve(m);
  for (std::size_t t = 0; t < m; ++t) {
    const std::size_t i = rng.uniform_index(n);
    std::size_t j = rng.uniform_index(n - 1);
    if (j >= i) ++j;
    const bool must = rng.bernoulli(must_prob(labels[i], labels[j]));
    out.push_back({std::min(i, j), std::max(i, j), must ? Link::must : Link::cannot});
  }
  return out;
}

/// p on the diagonal, 1 - p elsewhere.
inline Matrix<double> uniform_accuracy_matrix(std::size_t k, double p) {
  Matrix<double> m(k, k, 1.0 - p);
  for (std::size_t r = 0; r < k; ++r) m(r, r) = p;
  return m;
}

inline AnnotationGraphs generate_annotations(const GroundTruth& truth, const ExpertSpec& spec) {
  if (!(spec.accuracy >= 0.0 && spec.accuracy <= 1.0)) throw InvalidInput("expert accuracy must lie in [0, 1]");
  const auto probs = uniform_accuracy_matrix(truth.n_clusters(), spec.accuracy);
  const auto ann = draw_annotations(truth.labels, probs, spec.n_annotations, spec.seed);
  return AnnotationGraphs(truth.labels.size(), ann);
}

}  // namespace ssc
