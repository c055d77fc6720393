#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ssc/datagen.hpp"

using namespace ssc;

namespace {

MixtureSpec spec(std::size_t n, std::size_t d, std::size_t k, std::uint64_t seed) {
  MixtureSpec s;
  s.n_samples = n;
  s.n_features = d;
  s.n_clusters = k;
  s.seed = seed;
  return s;
}

bool correct(const GroundTruth& t, const Edge& e, Link link) {
  return (t.labels[e.i] == t.labels[e.j]) == (link == Link::must);
}

}  // namespace

TEST_CASE("zero variance puts every sample on its mean") {
  auto s = spec(50, 3, 3, 4);
  s.variance_range = {0.0, 0.0};
  const auto [data, truth] = generate_mixture(s);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(data.sample(i)[j] - truth.means(truth.labels[i], j)) < 1e-3);
  for (double v : truth.variances) CHECK(v == kMinGeneratedVariance);
}

TEST_CASE("drawn parameters respect their ranges") {
  auto s = spec(30, 4, 5, 9);
  s.mean_range = {-3.0, 2.0};
  s.variance_range = {0.5, 1.5};
  const auto [data, truth] = generate_mixture(s);
  CHECK(truth.n_clusters() == 5);
  CHECK(data.n_samples() == 30);
  CHECK(data.n_features() == 4);
  for (double m : truth.means.values()) {
    CHECK(m >= -3.0);
    CHECK(m <= 2.0);
  }
  for (double v : truth.variances) {
    CHECK(v >= 0.5);
    CHECK(v <= 1.5);
  }
  for (auto y : truth.labels) CHECK(y < 5);
}

TEST_CASE("sample means of a single component obey the central limit bound") {
  const std::size_t n = 10000, d = 3;
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [data, truth] = generate_mixture(spec(n, d, 1, seed));
    const double bound = 4.0 * std::sqrt(truth.variances[0] / double(n));
    bool ok = true;
    for (std::size_t j = 0; j < d; ++j) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += data.sample(i)[j];
      mean /= double(n);
      ok = ok && std::abs(mean - truth.means(0, j)) <= bound;
    }
    if (ok) ++within;
  }
  CHECK(within >= 99);
}

TEST_CASE("component sizes are close to uniform") {
  const std::size_t n = 10000, k = 4;
  const auto [data, truth] = generate_mixture(spec(n, 2, k, 3));
  std::vector<double> counts(k, 0.0);
  for (auto y : truth.labels) counts[y] += 1.0;
  const double sd = std::sqrt(double(n) * 0.25 * 0.75);
  for (double c : counts) CHECK(std::abs(c - double(n) / 4.0) <= 4.0 * sd);
}

TEST_CASE("generation is deterministic in the seed") {
  const auto a = generate_mixture(spec(100, 5, 3, 17));
  const auto b = generate_mixture(spec(100, 5, 3, 17));
  const auto c = generate_mixture(spec(100, 5, 3, 18));
  auto same = [](const Dataset& x, const Dataset& y) {
    return std::ranges::equal(x.samples().values(), y.samples().values());
  };
  CHECK(same(a.first, b.first));
  CHECK(a.second.labels == b.second.labels);
  CHECK_FALSE(same(a.first, c.first));
  const ExpertSpec e{0.7, 300, 5};
  CHECK(generate_annotations(a.second, e) == generate_annotations(b.second, e));
}

TEST_CASE("perfect experts produce only correct links") {
  const auto [data, truth] = generate_mixture(spec(80, 2, 3, 6));
  const auto g = generate_annotations(truth, ExpertSpec{1.0, 500, 2});
  CHECK(g.m_total() == 500);
  for (const auto& e : g.must_edges()) CHECK(correct(truth, e, Link::must));
  for (const auto& e : g.cannot_edges()) CHECK(correct(truth, e, Link::cannot));
}

TEST_CASE("no annotations gives empty graphs") {
  const auto [data, truth] = generate_mixture(spec(20, 2, 2, 1));
  const auto g = generate_annotations(truth, ExpertSpec{0.9, 0, 1});
  CHECK(g.m_total() == 0);
  CHECK(g.must_edges().empty());
  CHECK(g.cannot_edges().empty());
  for (std::size_t i = 0; i < 20; ++i) CHECK_FALSE(g.is_annotated(i));
}

TEST_CASE("fraction of correct links matches the expert accuracy") {
  const auto [data, truth] = generate_mixture(spec(500, 2, 4, 12));
  const auto g = generate_annotations(truth, ExpertSpec{0.8, 100000, 13});
  double right = 0.0;
  for (const auto& e : g.must_edges())
    if (correct(truth, e, Link::must)) right += double(e.count);
  for (const auto& e : g.cannot_edges())
    if (correct(truth, e, Link::cannot)) right += double(e.count);
  const double fraction = right / double(g.m_total());
  CHECK(fraction >= 0.796);
  CHECK(fraction <= 0.804);
}

TEST_CASE("annotation graphs conserve counts and have no self edges") {
  const auto [data, truth] = generate_mixture(spec(15, 2, 3, 2));
  const auto g = generate_annotations(truth, ExpertSpec{0.6, 400, 8});
  std::int64_t plus = 0, minus = 0;
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : g.must_edges()) {
    CHECK(e.i < e.j);
    CHECK(e.count > 0);
    CHECK(seen.insert({e.i, e.j}).second);
    plus += e.count;
  }
  seen.clear();
  for (const auto& e : g.cannot_edges()) {
    CHECK(e.i < e.j);
    CHECK(seen.insert({e.i, e.j}).second);
    minus += e.count;
  }
  CHECK(plus == g.m_plus());
  CHECK(minus == g.m_minus());
  CHECK(plus + minus == 400);
  for (std::size_t i = 0; i < 15; ++i) {
    std::int64_t degree = 0;
    for (const auto& nb : g.must_neighbors(i)) {
      CHECK(nb.sample != i);
      degree += nb.count;
      bool mirrored = false;
      for (const auto& back : g.must_neighbors(nb.sample)) mirrored = mirrored || (back.sample == i && back.count == nb.count);
      CHECK(mirrored);
    }
    CHECK(degree >= 0);
  }
}

TEST_CASE("invalid generator specs are rejected") {
  auto s = spec(5, 2, 6, 1);
  CHECK_THROWS_AS(generate_mixture(s), InvalidInput);
  s = spec(5, 0, 2, 1);
  CHECK_THROWS_AS(generate_mixture(s), InvalidInput);
  s = spec(5, 2, 0, 1);
  CHECK_THROWS_AS(generate_mixture(s), InvalidInput);
  s = spec(5, 2, 2, 1);
  s.mean_range = {1.0, -1.0};
  CHECK_THROWS_AS(generate_mixture(s), InvalidInput);
  s = spec(5, 2, 2, 1);
  s.variance_range = {-1.0, 1.0};
  CHECK_THROWS_AS(generate_mixture(s), InvalidInput);
  s = spec(5, 2, 2, 1);
  s.mean_range = {0.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(generate_mixture(s), InvalidInput);

  const auto [data, truth] = generate_mixture(spec(10, 2, 2, 1));
  CHECK_THROWS_AS(generate_annotations(truth, ExpertSpec{1.5, 10, 1}), InvalidInput);
  CHECK_THROWS_AS(generate_annotations(truth, ExpertSpec{std::nan(""), 10, 1}), InvalidInput);
  GroundTruth one;
  one.labels = {0};
  one.variances = {1.0};
  CHECK_THROWS_AS(generate_annotations(one, ExpertSpec{0.9, 1, 1}), InvalidInput);
  CHECK_NOTHROW(generate_annotations(one, ExpertSpec{0.9, 0, 1}));
}
