#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "perturbation.hpp"
#include "ssc/estimation.hpp"

using namespace ssc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Dataset points(std::size_t d, std::initializer_list<double> v) {
  Matrix<double> m(v.size() / d, d);
  std::copy(v.begin(), v.end(), m.values().begin());
  return Dataset(std::move(m));
}

std::vector<std::size_t> random_sizes_labels(std::mt19937_64& gen, std::size_t n, std::size_t k) {
  std::vector<std::size_t> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = i < k ? i : std::uniform_int_distribution<std::size_t>(0, k - 1)(gen);
  std::shuffle(labels.begin(), labels.end(), gen);
  return labels;
}

}  // namespace

TEST_CASE("means of a symmetric pair and of a singleton") {
  const auto data = points(2, {0, 0, 2, 2, 7, -3});
  const auto means = estimate_means(data, Assignment({0, 0, 1}, 2));
  CHECK(means(0, 0) == 1.0);
  CHECK(means(0, 1) == 1.0);
  CHECK(means(1, 0) == 7.0);
  CHECK(means(1, 1) == -3.0);
}

TEST_CASE("means match a streaming mean") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal(2.0, 3.0);
  Matrix<double> x(10, 3);
  for (auto& v : x.values()) v = normal(gen);
  const Dataset data(x);
  const auto means = estimate_means(data, Assignment(std::vector<std::size_t>(10, 0), 1));
  for (std::size_t j = 0; j < 3; ++j) {
    double running = 0.0;
    for (std::size_t i = 0; i < 10; ++i) running += (x(i, j) - running) / double(i + 1);
    CHECK_THAT(means(0, j), WithinAbs(running, 1e-12));
  }
}

TEST_CASE("variances divide the scatter by D n") {
  const auto data = points(2, {0, 0, 2, 2, 7, -3});
  const Assignment z({0, 0, 1}, 2);
  const auto means = estimate_means(data, z);
  const auto vars = estimate_variances(data, z, means);
  CHECK_THAT(vars[0], WithinAbs(4.0 / (2.0 * 2.0), 1e-15));
  CHECK(vars[1] == variance_floor(data));
}

TEST_CASE("one-dimensional variance is the second moment about the mean") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> unif(-4.0, 9.0);
  Matrix<double> x(25, 1);
  for (auto& v : x.values()) v = unif(gen);
  const Dataset data(x);
  const Assignment z(std::vector<std::size_t>(25, 0), 1);
  const auto vars = estimate_variances(data, z, estimate_means(data, z));
  double mean = 0.0;
  for (double v : x.values()) mean += v;
  mean /= 25.0;
  double second = 0.0;
  for (double v : x.values()) second += (v - mean) * (v - mean);
  CHECK_THAT(vars[0], WithinAbs(second / 25.0, 1e-12));
}

TEST_CASE("variance floor scales with the data") {
  const auto flat = points(2, {1, 1, 1, 1});
  CHECK(variance_floor(flat) == 1e-8);
  const auto spread = points(1, {0, 2});
  CHECK_THAT(variance_floor(spread), WithinRel(1e-8, 1e-12));
  CHECK_THAT(variance_floor(spread), WithinRel(oracle::global_floor(spread), 1e-12));
}

TEST_CASE("estimators reject empty clusters") {
  const auto data = points(1, {0, 1, 2});
  const Assignment z({0, 0, 0}, 2);
  CHECK_THROWS_AS(estimate_means(data, z), EmptyClusterError);
  CHECK_THROWS_AS(estimate_variances(data, z, Matrix<double>(2, 1, 0.0)), EmptyClusterError);
}

TEST_CASE("maximum-likelihood block rates") {
  SECTION("no edges") {
    const auto r = estimate_block_rates(AnnotationGraphs(4), Assignment({0, 1, 0, 1}, 2));
    for (double v : r.omega_plus.values()) CHECK(v == 0.0);
    for (double v : r.omega_minus.values()) CHECK(v == 0.0);
  }
  SECTION("two between-cluster edges, sizes 2 and 4") {
    const AnnotationGraphs g(6, std::vector<Annotation>{{0, 2, Link::must}, {1, 3, Link::must}});
    const Assignment z({0, 0, 1, 1, 1, 1}, 2);
    const auto r = estimate_block_rates(g, z);
    CHECK(r.omega_plus(0, 1) == 0.25);
    CHECK(r.omega_plus(1, 0) == 0.25);
    CHECK(r.omega_plus(0, 0) == 0.0);
    const auto m = oracle::block_counts(oracle::dense(g.must_edges(), 6), z.labels, 2);
    CHECK(m(0, 1) == 2.0);
  }
  SECTION("one edge in a three-sample cluster") {
    const AnnotationGraphs g(3, std::vector<Annotation>{{0, 1, Link::cannot}});
    const Assignment z({0, 0, 0}, 1);
    CHECK_THAT(estimate_block_rates(g, z).omega_minus(0, 0), WithinAbs(2.0 / 9.0, 1e-15));
    CHECK(oracle::block_counts(oracle::dense(g.cannot_edges(), 3), z.labels, 1)(0, 0) == 2.0);
  }
}

TEST_CASE("prior-adjusted block rates") {
  CHECK_THAT(block_rate(4, std::sqrt(8.0), std::sqrt(8.0), 1.0, true), WithinAbs(0.4, 1e-12));
  CHECK(block_rate(0, 3.0, 3.0, 1e6, true) == 0.0);
  CHECK(block_rate(0, 3.0, 5.0, 0.5, false) == 0.0);
  CHECK(block_rate(3, 2.0, 5.0, 2.0, false) == 3.0 / 12.0);

  const AnnotationGraphs g(6, std::vector<Annotation>{{0, 1, Link::must}, {0, 3, Link::cannot}, {4, 5, Link::must}});
  const Assignment z({0, 0, 0, 1, 1, 1}, 2);
  PriorRates tiny;
  tiny.lambda_plus_diag = tiny.lambda_plus_offdiag = tiny.lambda_minus_diag = tiny.lambda_minus_offdiag = 1e-14;
  const auto ml = estimate_block_rates(g, z);
  const auto near = estimate_block_rates_with_priors(g, z, tiny);
  for (std::size_t t = 0; t < 4; ++t) {
    CHECK_THAT(near.omega_plus.values()[t], WithinRel(ml.omega_plus.values()[t], 1e-12));
    CHECK_THAT(near.omega_minus.values()[t], WithinRel(ml.omega_minus.values()[t], 1e-12));
  }
}

TEST_CASE("prior rates hand examples") {
  SECTION("p = 1/2 makes within and between rates equal") {
    const std::vector<std::size_t> sizes{3, 5, 2};
    const auto pr = compute_prior_rates(std::span<const std::size_t>(sizes), PriorConfig{true, 0.5}, 7, 4);
    CHECK_THAT(pr.f_plus_in, WithinRel(7.0 / (pairs_within(sizes) + pairs_between(sizes)), 1e-14));
    CHECK_THAT(pr.f_plus_in, WithinRel(pr.f_plus_out, 1e-14));
    CHECK_THAT(pr.f_minus_in, WithinRel(pr.f_minus_out, 1e-14));
  }
  SECTION("K = 2, sizes (2, 2), five must-links, p = 1/2") {
    const std::vector<std::size_t> sizes{2, 2};
    CHECK(pairs_within(sizes) == 6.0);
    CHECK(pairs_between(sizes) == 4.0);
    const auto pr = compute_prior_rates(std::span<const std::size_t>(sizes), PriorConfig{true, 0.5}, 5, 0);
    CHECK_THAT(pr.f_plus_in, WithinAbs(0.5, 1e-15));
    CHECK_THAT(pr.lambda_plus_diag, WithinAbs(2.0, 1e-12));
    CHECK(pr.lambda_minus_diag == kMaxPriorRate);
    CHECK(pr.lambda_minus_offdiag == kMaxPriorRate);
  }
  SECTION("p near one") {
    const std::vector<std::size_t> sizes{4, 6};
    const auto pr = compute_prior_rates(std::span<const std::size_t>(sizes), PriorConfig{true, 1.0}, 20, 10);
    CHECK_THAT(pr.f_plus_in, WithinRel(20.0 / pairs_within(sizes), 1e-4));
    CHECK(pr.f_minus_in < 1e-4);
    CHECK(pr.lambda_minus_diag > 1e4);
    CHECK(pr.lambda_minus_diag <= kMaxPriorRate);
    CHECK(std::isfinite(pr.lambda_plus_offdiag));
    CHECK(pr.lambda_plus_offdiag > 0.0);
  }
  SECTION("contract violations") {
    const std::vector<std::size_t> sizes{2, 2};
    CHECK_THROWS_AS(compute_prior_rates(std::span<const std::size_t>(sizes), PriorConfig{false, 0.9}, 1, 1),
                    ContractViolation);
    CHECK_THROWS_AS(compute_prior_rates(std::span<const std::size_t>(sizes), PriorConfig{true, 0.9}, 0, 0),
                    ContractViolation);
    CHECK_THROWS_AS(compute_prior_rates(std::span<const std::size_t>(sizes), PriorConfig{true, 1.2}, 1, 1),
                    ContractViolation);
  }
}

TEST_CASE("prior rates satisfy the count identities and agree with the oracle") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 1 + trial % 5;
    const std::size_t n = k + std::uniform_int_distribution<std::size_t>(0, 40)(gen);
    const auto labels = random_sizes_labels(gen, n, k);
    const Assignment z(labels, k);
    const double p = 0.1 * double(1 + trial % 9);
    const std::int64_t mp = std::uniform_int_distribution<std::int64_t>(1, 80)(gen);
    const std::int64_t mm = std::uniform_int_distribution<std::int64_t>(1, 80)(gen);
    const auto pr = compute_prior_rates(z, PriorConfig{true, p}, mp, mm);
    const auto sizes = z.cluster_sizes();
    const double pin = pairs_within(sizes), pout = pairs_between(sizes);
    CHECK_THAT(pr.f_plus_in * pin + pr.f_plus_out * pout, WithinRel(double(mp), 1e-9));
    CHECK_THAT(pr.f_minus_in * pin + pr.f_minus_out * pout, WithinRel(double(mm), 1e-9));
    CHECK_THAT(pr.f_plus_in * (1 - p), WithinAbs(pr.f_plus_out * p, 1e-12));
    CHECK_THAT(pr.f_minus_in * p, WithinAbs(pr.f_minus_out * (1 - p), 1e-12));
    const auto ref = oracle::prior_rates(sizes, p, double(mp), double(mm));
    CHECK_THAT(pr.lambda_plus_diag, WithinRel(ref.l_plus_in, 1e-12));
    CHECK_THAT(pr.lambda_plus_offdiag, WithinRel(ref.l_plus_out, 1e-12));
    CHECK_THAT(pr.lambda_minus_diag, WithinRel(ref.l_minus_in, 1e-12));
    CHECK_THAT(pr.lambda_minus_offdiag, WithinRel(ref.l_minus_out, 1e-12));
  }
}

TEST_CASE("closed-form estimates are local maxima") {
  perturbation::Tally total;
  std::mt19937_64 gen(31);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = oracle::small_instance(seed, 30, 3, 3, 40, 0.85);
    total.merge(perturbation::gaussians(inst.data, inst.truth, 3, gen, 10, 1e-3));
    total.merge(perturbation::block_rates(inst.graphs, inst.truth, 3, 1e-3));
    total.merge(perturbation::posterior_rates(inst.graphs, inst.truth, 3, 0.85, 1e-3));
  }
  CHECK(total.checks > 500);
  CHECK(total.failures == 0);
}
