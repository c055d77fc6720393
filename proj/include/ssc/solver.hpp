#pragma once

// Hybrid genetic search over hard assignments. Each repetition keeps a
// population of locally optimal solutions; new solutions come from a
// center-matching crossover, a one-center mutation and a two-phase local
// search (relocation of annotated samples, K-means on the rest).

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ssc/matching.hpp"
#include "ssc/objective.hpp"
#include "ssc/parallel.hpp"
#include "ssc/random.hpp"

namespace ssc {

struct SolverConfig {
  std::size_t n_clusters = 2;
  std::size_t pi1 = 10;               // population size after survivor selection
  std::size_t pi2 = 20;               // size that triggers survivor selection
  std::size_t max_iterations = 500;   // per repetition
  std::size_t repetitions = 50;
  std::uint64_t seed = 1;
  PriorConfig prior;
  double improvement_tolerance = 1e-9;
  std::size_t max_local_search_rounds = 20;
  std::size_t max_kmeans_iterations = 1000;

  void validate() const {
    if (n_clusters == 0) throw InvalidInput("K must be at least 1");
    if (pi1 < 1 || pi1 >= pi2) throw InvalidInput("population sizes must satisfy 1 <= pi1 < pi2");
    if (repetitions < 1) throw InvalidInput("repetitions must be at least 1");
    if (!(improvement_tolerance >= 0.0)) throw InvalidInput("improvement tolerance must be non-negative");
  }
};

// ---------------------------------------------------------------------------
// Center-based assignment helpers

/// Index of the closest center; ties go to the lowest index.
inline std::size_t nearest_center(std::span<const double> x, const Matrix<double>& centers) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < centers.rows(); ++r) {
    const double d = squared_distance(x, centers.row(r));
    if (d < best_d) {
      best_d = d;
      best = r;
    }
  }
  return best;
}

inline std::vector<std::size_t> assign_to_centers(const Dataset& data, const Matrix<double>& centers) {
  std::vector<std::size_t> labels(data.n_samples());
  for (std::size_t i = 0; i < data.n_samples(); ++i) labels[i] = nearest_center(data.sample(i), centers);
  return labels;
}

/// Fills every empty cluster with the sample farthest from its own cluster
/// mean (ties: lowest sample index), never emptying another cluster.
/// Returns the number of samples moved.
inline std::size_t repair_empty_clusters(const Dataset& data, std::vector<std::size_t>& labels, std::size_t k) {
  if (data.n_samples() < k) throw InvalidInput("fewer samples than clusters");
  std::size_t moved = 0;
  for (;;) {
    std::vector<std::size_t> sizes(k, 0);
    for (auto y : labels) ++sizes[y];
    const auto empty = std::find(sizes.begin(), sizes.end(), 0);
    if (empty == sizes.end()) return moved;

    Matrix<double> means(k, data.n_features(), 0.0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      auto row = means.row(labels[i]);
      for (std::size_t d = 0; d < row.size(); ++d) row[d] += data.sample(i)[d];
    }
    for (std::size_t r = 0; r < k; ++r)
      if (sizes[r] > 0)
        for (auto& v : means.row(r)) v /= static_cast<double>(sizes[r]);

    std::size_t far = labels.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (sizes[labels[i]] < 2) continue;
      const double d = squared_distance(data.sample(i), means.row(labels[i]));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    labels[far] = static_cast<std::size_t>(empty - sizes.begin());
    ++moved;
  }
}

inline Assignment assignment_from_centers(const Dataset& data, const Matrix<double>& centers) {
  auto labels = assign_to_centers(data, centers);
  repair_empty_clusters(data, labels, centers.rows());
  return Assignment(std::move(labels), centers.rows());
}

// ---------------------------------------------------------------------------
// Genetic operators

/// Crossover with explicit per-pair choices: for matched pair r,
/// take_first[r] keeps parent1's center, otherwise parent2's partner.
inline Assignment crossover_with(const Solution& parent1, const Solution& parent2, const std::vector<bool>& take_first) {
  const std::size_t k = parent1.n_clusters();
  require(parent2.n_clusters() == k && take_first.size() == k, "crossover parents must share K");
  const auto& a = parent1.gaussians().means;
  const auto& b = parent2.gaussians().means;
  Matrix<double> costs(k, k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t s = 0; s < k; ++s) costs(r, s) = squared_distance(a.row(r), b.row(s));
  const auto match = min_cost_matching(costs);
  Matrix<double> centers(k, a.cols());
  for (std::size_t r = 0; r < k; ++r) {
    const auto src = take_first[r] ? a.row(r) : b.row(match.assignment[r]);
    std::copy(src.begin(), src.end(), centers.row(r).begin());
  }
  return assignment_from_centers(parent1.problem().data(), centers);
}

inline Assignment crossover(const Solution& parent1, const Solution& parent2, Rng& rng) {
  std::vector<bool> take_first(parent1.n_clusters());
  for (std::size_t r = 0; r < take_first.size(); ++r) take_first[r] = rng.bernoulli(0.5);
  return crossover_with(parent1, parent2, take_first);
}

/// Replaces one uniformly chosen center by a uniformly chosen sample and
/// reassigns every sample to its closest center.
inline Assignment mutation(const Solution& solution, Rng& rng) {
  const Dataset& data = solution.problem().data();
  Matrix<double> centers = solution.gaussians().means;
  const std::size_t removed = rng.uniform_index(centers.rows());
  const std::size_t sample = rng.uniform_index(data.n_samples());
  std::copy(data.sample(sample).begin(), data.sample(sample).end(), centers.row(removed).begin());
  return assignment_from_centers(data, centers);
}

// ---------------------------------------------------------------------------
// Local search

/// Relocation sweeps over (annotated sample, cluster) pairs in a fresh random
/// order per sweep; a move is applied when it raises the objective by more
/// than `tolerance`. Stops after a sweep without moves. Returns the number of
/// applied moves.
inline std::size_t fit_annotated(Solution& solution, Rng& rng, double tolerance) {
  const auto& annotated = solution.problem().annotated();
  const std::size_t k = solution.n_clusters();
  if (annotated.empty() || k < 2) return 0;
  std::vector<std::pair<std::size_t, std::size_t>> moves;
  moves.reserve(annotated.size() * k);
  for (auto i : annotated)
    for (std::size_t r = 0; r < k; ++r) moves.emplace_back(i, r);

  std::size_t applied = 0;
  bool improved = true;
  while (improved) {
    improved = false;
    rng.shuffle(moves.begin(), moves.end());
    for (const auto& [i, r] : moves) {
      const std::size_t from = solution.label(i);
      if (r == from || solution.stats().counts[from] == 1) continue;
      if (solution.relocation_delta(i, r) > tolerance) {
#if !defined(NDEBUG) || defined(SSC_DEBUG_CHECKS)
        const double before = solution.objective();
        solution.relocate(i, r);
        require(solution.objective() >= before, "relocation lowered the objective");
#else
        solution.relocate(i, r);
#endif
        ++applied;
        improved = true;
      }
    }
  }
  return applied;
}

struct KMeansOutcome {
  std::size_t label_changes = 0;
  std::size_t iterations = 0;
};

/// K-means over the unannotated samples: each is assigned to its closest
/// mean, then means are recomputed from all samples, until no label changes.
/// The solution is rebuilt afterwards so every cached quantity is current.
inline KMeansOutcome fit_unannotated(Solution& solution, std::size_t max_iterations = 1000) {
  const Problem& p = solution.problem();
  const auto& free = p.unannotated();
  KMeansOutcome out;
  if (free.empty()) return out;
  const Dataset& data = p.data();
  const std::size_t k = solution.n_clusters();
  std::vector<std::size_t> labels = solution.assignment().labels;
  Matrix<double> means = solution.gaussians().means;
  while (out.iterations < max_iterations) {
    ++out.iterations;
    std::size_t changed = 0;
    for (auto i : free) {
      const std::size_t y = nearest_center(data.sample(i), means);
      if (y != labels[i]) {
        labels[i] = y;
        ++changed;
      }
    }
    changed += repair_empty_clusters(data, labels, k);
    out.label_changes += changed;
    if (changed == 0) break;
    means = estimate_means(data, Assignment(labels, k));
  }
  if (out.label_changes > 0) solution = Solution::evaluate(p, Assignment(std::move(labels), k));
  return out;
}

/// Alternates both phases until neither changes the assignment. The
/// closest-mean phase ignores variances and may lower the objective, so when
/// `incumbent` is given it is replaced by any better intermediate state.
inline void offer_incumbent(std::optional<Solution>* incumbent, const Solution& s) {
  if (incumbent && (!*incumbent || s.objective() > (*incumbent)->objective())) *incumbent = s;
}

inline void local_search(Solution& solution, Rng& rng, const SolverConfig& config,
                         std::optional<Solution>* incumbent = nullptr) {
  auto offer = [&] { offer_incumbent(incumbent, solution); };
  for (std::size_t round = 0; round < config.max_local_search_rounds; ++round) {
    const std::size_t moves = fit_annotated(solution, rng, config.improvement_tolerance);
    offer();
    const auto km = fit_unannotated(solution, config.max_kmeans_iterations);
    offer();
    if (moves == 0 && km.label_changes == 0) return;
  }
}

// ---------------------------------------------------------------------------
// Population

struct Population {
  std::vector<Solution> solutions;

  /// Keeps the `size` best solutions (stable on equal objectives).
  void select_survivors(std::size_t size) {
    std::stable_sort(solutions.begin(), solutions.end(),
                     [](const Solution& a, const Solution& b) { return a.objective() > b.objective(); });
    if (solutions.size() > size) solutions.erase(solutions.begin() + static_cast<std::ptrdiff_t>(size), solutions.end());
  }

  const Solution& best() const {
    return *std::max_element(solutions.begin(), solutions.end(),
                             [](const Solution& a, const Solution& b) { return a.objective() < b.objective(); });
  }
};

namespace detail {
inline void check_member(const Solution& s) {
#if !defined(NDEBUG) || defined(SSC_DEBUG_CHECKS)
  for (auto n : s.stats().counts) require(n > 0, "population member has an empty cluster");
  require(s.consistency_error() <= 1e-6, "population member has a stale cached objective");
#else
  (void)s;
#endif
}
}  // namespace detail

/// K distinct random samples as centers, closest-center assignment, repair,
/// K-means on unannotated samples, then the full local search.
inline Solution initial_solution(const Problem& p, Rng& rng, const SolverConfig& config,
                                 std::optional<Solution>* incumbent = nullptr) {
  const Dataset& data = p.data();
  const std::size_t k = p.n_clusters();
  std::vector<std::size_t> idx(data.n_samples());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Matrix<double> centers(k, data.n_features());
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t j = r + rng.uniform_index(idx.size() - r);
    std::swap(idx[r], idx[j]);
    std::copy(data.sample(idx[r]).begin(), data.sample(idx[r]).end(), centers.row(r).begin());
  }
  Solution s = Solution::evaluate(p, assignment_from_centers(data, centers));
  fit_unannotated(s, config.max_kmeans_iterations);
  offer_incumbent(incumbent, s);
  local_search(s, rng, config, incumbent);
  return s;
}

inline Population initialize_population(const Problem& p, const SolverConfig& config, Rng& rng,
                                        std::optional<Solution>* incumbent = nullptr) {
  config.validate();
  Population pop;
  pop.solutions.reserve(config.pi2);
  for (std::size_t t = 0; t < config.pi1; ++t) {
    pop.solutions.push_back(initial_solution(p, rng, config, incumbent));
    detail::check_member(pop.solutions.back());
  }
  return pop;
}

struct RepetitionResult {
  std::size_t repetition = 0;
  Solution best;
  double milliseconds = 0.0;
  std::vector<double> incumbent_trace;  // best objective after init and after every iteration
};

/// One independent repetition with its own RNG stream (seed + repetition).
inline RepetitionResult run_repetition(const Problem& p, const SolverConfig& config, std::size_t repetition) {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(config.seed + repetition);
  std::optional<Solution> best;
  Population pop = initialize_population(p, config, rng, &best);
  std::vector<double> trace{best->objective()};
  trace.reserve(config.max_iterations + 1);

  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    const std::size_t size = pop.solutions.size();
    std::size_t a = rng.uniform_index(size), b = a;
    if (size > 1) {
      b = rng.uniform_index(size - 1);
      if (b >= a) ++b;
    }
    const Assignment child = crossover(pop.solutions[a], pop.solutions[b], rng);
    Solution offspring = Solution::evaluate(p, child);
    offspring = Solution::evaluate(p, mutation(offspring, rng));
    local_search(offspring, rng, config, &best);
    detail::check_member(offspring);
    pop.solutions.push_back(std::move(offspring));
    if (pop.solutions.size() >= config.pi2) pop.select_survivors(config.pi1);
    trace.push_back(best->objective());
  }
  const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return {repetition, std::move(*best), ms, std::move(trace)};
}

struct RunResult {
  std::vector<RepetitionResult> repetitions;
  std::size_t best_index = 0;

  const Solution& best() const { return repetitions[best_index].best; }
};

RunResult run(const Problem&&, const SolverConfig&, std::size_t = 1) = delete;

/// All repetitions (in parallel when threads > 1); the best objective wins,
/// ties to the lowest repetition index.
inline RunResult run(const Problem& p, const SolverConfig& config, std::size_t threads = 1) {
  config.validate();
  require(config.n_clusters == p.n_clusters(), "config K differs from problem K");
  std::vector<std::optional<RepetitionResult>> slots(config.repetitions);
  parallel_for(config.repetitions, threads,
               [&](std::size_t rep) { slots[rep].emplace(run_repetition(p, config, rep)); });
  RunResult out;
  out.repetitions.reserve(slots.size());
  for (auto& s : slots) out.repetitions.push_back(std::move(*s));
  for (std::size_t r = 1; r < out.repetitions.size(); ++r)
    if (out.repetitions[r].best.objective() > out.repetitions[out.best_index].best.objective()) out.best_index = r;
  return out;
}

}  // namespace ssc
