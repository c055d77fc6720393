#pragma once

// Command implementations behind the `ssc` executable. Each command returns
// a process exit code: 0 on success, 2 on usage or input errors. Results go
// to `out`, diagnostics to `err`.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssc/datagen.hpp"
#include "ssc/io.hpp"
#include "ssc/metrics.hpp"
#include "ssc/parallel.hpp"
#include "ssc/random.hpp"
#include "ssc/solver.hpp"

namespace ssc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;

inline std::string format_fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// Comma-separated reals, e.g. "0.8,0.9,1.0".
inline std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = text.find(',', start);
    const std::string field = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    double v = 0.0;
    if (!io::detail::parse_real(field, v)) throw InvalidInput("invalid list entry '" + field + "' in '" + text + "'");
    out.push_back(v);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateOptions {
  std::size_t n = 200;
  std::size_t d = 10;
  std::size_t k = 4;
  double p = 0.9;
  std::optional<std::size_t> m;  // defaults to n
  std::uint64_t seed = 1;
  std::string out = "synthetic";
};

struct Instance {
  Dataset data;
  GroundTruth truth;
  AnnotationGraphs graphs;
};

/// Mixture and annotations for a generate seed; streams are split so the
/// mixture does not depend on p or m.
inline Instance make_instance(std::size_t n, std::size_t d, std::size_t k, double p, std::size_t m,
                              std::uint64_t mixture_seed, std::uint64_t annotation_seed) {
  MixtureSpec ms;
  ms.n_samples = n;
  ms.n_features = d;
  ms.n_clusters = k;
  ms.seed = mixture_seed;
  auto [data, truth] = generate_mixture(ms);
  auto graphs = generate_annotations(truth, ExpertSpec{p, m, annotation_seed});
  return {std::move(data), std::move(truth), std::move(graphs)};
}

inline int cmd_generate(const GenerateOptions& o, std::ostream& err) {
  return guarded(err, [&] {
    if (!(o.p >= 0.0 && o.p <= 1.0)) throw InvalidInput("--p must lie in [0, 1]");
    const auto inst = make_instance(o.n, o.d, o.k, o.p, o.m.value_or(o.n), derive_seed(o.seed, 1), derive_seed(o.seed, 2));
    io::write_features(o.out + ".features.csv", inst.data);
    io::write_labels(o.out + ".labels.txt", inst.truth.labels);
    io::write_annotations(o.out + ".annotations.txt", inst.graphs);
    io::write_params(o.out + ".params.csv", inst.truth.means, inst.truth.variances);
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// cluster

struct ClusterOptions {
  std::string data;
  std::size_t k = 2;
  std::optional<std::string> annotations;
  std::optional<double> priors;  // expert accuracy; enables prior mode
  std::size_t pi1 = 10;
  std::size_t pi2 = 20;
  std::size_t iters = 500;
  std::size_t reps = 50;
  std::uint64_t seed = 1;
  std::string out = "ssc";
  std::optional<std::string> truth;        // labels, for NMI in the report
  std::optional<std::string> true_params;  // params.csv, for KL and CI in the report
  bool timing = false;                     // real wall times instead of 0 in the ms column
};

struct Evaluation {
  std::optional<double> nmi;
  std::optional<double> kl;
  std::optional<std::size_t> ci;
};

inline Evaluation evaluate_solution(const Solution& s, const std::vector<std::size_t>* truth,
                                    const io::MixtureParams* true_params) {
  Evaluation e;
  if (truth) e.nmi = nmi(s.assignment().labels, *truth);
  if (true_params && true_params->means.rows() == s.n_clusters()) {
    const SphericalMixture fitted{s.gaussians().means, s.gaussians().variances, {}};
    const SphericalMixture reference{true_params->means, true_params->variances, {}};
    e.kl = kl_mixtures_matched(fitted, reference);
    e.ci = centroid_index(s.gaussians().means, true_params->means);
  }
  return e;
}

inline std::string report_row(const std::string& key, double objective, const Evaluation& e, double ms) {
  std::string row = key + ',' + io::format_real(objective) + ',';
  row += (e.nmi ? format_fixed(*e.nmi) : std::string()) + ',';
  row += (e.kl ? format_fixed(*e.kl) : std::string()) + ',';
  row += (e.ci ? std::to_string(*e.ci) : std::string()) + ',';
  row += format_fixed(ms, 1) + '\n';
  return row;
}

inline int cmd_cluster(const ClusterOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Dataset data = io::read_features(o.data);
    if (o.k == 0) throw InvalidInput("--k must be at least 1");
    if (o.k > data.n_samples())
      throw InvalidInput("--k " + std::to_string(o.k) + " exceeds the number of samples " +
                         std::to_string(data.n_samples()));
    const AnnotationGraphs graphs =
        o.annotations ? io::read_annotations(*o.annotations, data.n_samples()) : AnnotationGraphs(data.n_samples());

    std::optional<std::vector<std::size_t>> truth;
    if (o.truth) {
      truth = io::read_labels(*o.truth);
      if (truth->size() != data.n_samples()) throw InvalidInput("--truth length differs from the number of samples");
    }
    std::optional<io::MixtureParams> true_params;
    if (o.true_params) {
      true_params = io::read_params(*o.true_params);
      if (true_params->means.cols() != data.n_features()) throw InvalidInput("--true-params dimension mismatch");
    }

    SolverConfig config;
    config.n_clusters = o.k;
    config.pi1 = o.pi1;
    config.pi2 = o.pi2;
    config.max_iterations = o.iters;
    config.repetitions = o.reps;
    config.seed = o.seed;
    if (o.priors) {
      if (!(*o.priors >= 0.0 && *o.priors <= 1.0)) throw InvalidInput("--priors must lie in [0, 1]");
      if (graphs.m_total() == 0) {
        err << "warning: no annotations; prior mode disabled\n";
      } else {
        config.prior = PriorConfig{true, *o.priors};
      }
    }
    config.validate();

    const Problem problem(data, graphs, o.k, config.prior);
    const auto result = run(problem, config, worker_count());

    std::string report = "repetition,objective,nmi,kl,ci,ms\n";
    for (const auto& rep : result.repetitions) {
      const auto e = evaluate_solution(rep.best, truth ? &*truth : nullptr, true_params ? &*true_params : nullptr);
      report += report_row(std::to_string(rep.repetition), rep.best.objective(), e, o.timing ? rep.milliseconds : 0.0);
    }
    const auto& best = result.best();
    const auto e = evaluate_solution(best, truth ? &*truth : nullptr, true_params ? &*true_params : nullptr);
    report += report_row("best", best.objective(), e,
                         o.timing ? result.repetitions[result.best_index].milliseconds : 0.0);

    io::write_labels(o.out + ".assign.txt", best.assignment().labels);
    io::write_params(o.out + ".params.csv", best.gaussians().means, best.gaussians().variances);
    io::write_file_atomic(o.out + ".report.csv", report);
    out << io::format_real(best.objective()) << '\n';
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// evaluate

struct EvaluateOptions {
  std::string pred;
  std::string truth;
  std::optional<std::string> pred_params;
  std::optional<std::string> true_params;
};

inline int cmd_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto pred = io::read_labels(o.pred);
    const auto truth = io::read_labels(o.truth);
    if (pred.size() != truth.size())
      throw InvalidInput("--pred has " + std::to_string(pred.size()) + " labels but --truth has " +
                         std::to_string(truth.size()));
    if (o.pred_params.has_value() != o.true_params.has_value())
      throw InvalidInput("--pred-params and --true-params must be given together");
    std::string text = "nmi=" + format_fixed(nmi(pred, truth)) + '\n';
    if (o.pred_params) {
      const auto a = io::read_params(*o.pred_params);
      const auto b = io::read_params(*o.true_params);
      if (a.means.rows() != b.means.rows() || a.means.cols() != b.means.cols())
        throw InvalidInput("parameter files differ in K or D");
      text += "kl=" + format_fixed(kl_mixtures_matched({a.means, a.variances, {}}, {b.means, b.variances, {}})) + '\n';
      text += "ci=" + std::to_string(centroid_index(a.means, b.means)) + '\n';
    }
    out << text;
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// benchmark

struct BenchmarkOptions {
  std::size_t datasets = 10;
  std::size_t n = 200;
  std::size_t d = 10;
  std::size_t k = 4;
  std::vector<double> p_list{0.8, 0.9, 1.0};
  std::vector<double> m_list{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};  // multiples of n
  std::uint64_t seed = 1;
  std::size_t pi1 = 10;
  std::size_t pi2 = 20;
  std::size_t iters = 500;
  std::size_t reps = 10;
  bool with_priors = true;  // also solve every m > 0 cell in prior mode
  bool timing = false;
};

struct BenchmarkRow {
  std::size_t dataset_id = 0;
  double p = 0.0;
  std::size_t m = 0;
  bool priors = false;
  double nmi = 0.0;
  double kl = 0.0;
  std::size_t ci = 0;
  double objective = 0.0;
  double ms = 0.0;
};

inline std::size_t annotation_count(double multiplier, std::size_t n) {
  return static_cast<std::size_t>(std::llround(multiplier * static_cast<double>(n)));
}

/// One row per (dataset, p, m, variant), ordered by dataset, p, m, then
/// no-priors before priors. At m = 0 the prior variant is inert and repeats
/// the no-prior result, so the row count is
/// datasets * |p_list| * |m_list| * (with_priors ? 2 : 1).
inline std::vector<BenchmarkRow> run_benchmark(const BenchmarkOptions& o, std::size_t threads) {
  if (o.datasets == 0 || o.p_list.empty() || o.m_list.empty()) throw InvalidInput("empty benchmark grid");
  for (double p : o.p_list)
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInput("p values must lie in [0, 1]");
  for (double m : o.m_list)
    if (!(m >= 0.0) || !std::isfinite(m)) throw InvalidInput("m multipliers must be non-negative");

  struct Task {
    std::size_t dataset, p_index, m_index;
    bool priors;
  };
  std::vector<Task> tasks;
  for (std::size_t ds = 0; ds < o.datasets; ++ds)
    for (std::size_t pi = 0; pi < o.p_list.size(); ++pi)
      for (std::size_t mi = 0; mi < o.m_list.size(); ++mi) {
        const bool empty = annotation_count(o.m_list[mi], o.n) == 0;
        // Without annotations every p gives the same instance: solve it once.
        if (empty && pi > 0) continue;
        tasks.push_back({ds, pi, mi, false});
        if (o.with_priors && !empty) tasks.push_back({ds, pi, mi, true});
      }

  std::vector<BenchmarkRow> results(tasks.size());
  parallel_for(tasks.size(), threads, [&](std::size_t t) {
    const Task& task = tasks[t];
    const double p = o.p_list[task.p_index];
    const std::size_t m = annotation_count(o.m_list[task.m_index], o.n);
    const auto inst = make_instance(o.n, o.d, o.k, p, m, derive_seed(o.seed, task.dataset, 1),
                                    derive_seed(o.seed, task.dataset, 1000 + task.p_index, task.m_index));
    SolverConfig config;
    config.n_clusters = o.k;
    config.pi1 = o.pi1;
    config.pi2 = o.pi2;
    config.max_iterations = o.iters;
    config.repetitions = o.reps;
    config.seed = derive_seed(o.seed, task.dataset, 7);
    if (task.priors) config.prior = PriorConfig{true, p};
    const Problem problem(inst.data, inst.graphs, o.k, config.prior);
    const auto start = std::chrono::steady_clock::now();
    const auto result = run(problem, config, 1);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const auto& best = result.best();
    const io::MixtureParams truth{inst.truth.means, inst.truth.variances};
    const auto e = evaluate_solution(best, &inst.truth.labels, &truth);
    results[t] = {task.dataset, p, m, task.priors, *e.nmi, *e.kl, *e.ci, best.objective(), o.timing ? ms : 0.0};
  });

  std::vector<BenchmarkRow> rows;
  for (std::size_t ds = 0; ds < o.datasets; ++ds)
    for (std::size_t pi = 0; pi < o.p_list.size(); ++pi)
      for (std::size_t mi = 0; mi < o.m_list.size(); ++mi) {
        const std::size_t m = annotation_count(o.m_list[mi], o.n);
        auto find = [&](std::size_t p_index, bool priors) {
          for (std::size_t t = 0; t < tasks.size(); ++t)
            if (tasks[t].dataset == ds && tasks[t].p_index == p_index && tasks[t].m_index == mi &&
                tasks[t].priors == priors)
              return results[t];
          throw ContractViolation("benchmark task missing");
        };
        BenchmarkRow base = find(m == 0 ? 0 : pi, false);
        base.p = o.p_list[pi];
        rows.push_back(base);
        if (o.with_priors) {
          BenchmarkRow with = m == 0 ? base : find(pi, true);
          with.priors = true;
          rows.push_back(with);
        }
      }
  return rows;
}

inline std::string benchmark_csv(const std::vector<BenchmarkRow>& rows) {
  std::string s = "dataset_id,p,m,priors,nmi,kl,ci,objective,ms\n";
  char p_buf[32];
  for (const auto& r : rows) {
    std::snprintf(p_buf, sizeof p_buf, "%g", r.p);
    s += std::to_string(r.dataset_id) + ',' + p_buf + ',' + std::to_string(r.m) + ',' + (r.priors ? "1" : "0") + ',' +
         format_fixed(r.nmi) + ',' + format_fixed(r.kl) + ',' + std::to_string(r.ci) + ',' + format_fixed(r.objective) +
         ',' + format_fixed(r.ms, 1) + '\n';
  }
  return s;
}

inline int cmd_benchmark(const BenchmarkOptions& o, const std::optional<std::string>& out_path, std::ostream& out,
                         std::ostream& err) {
  return guarded(err, [&] {
    const auto csv = benchmark_csv(run_benchmark(o, worker_count()));
    if (out_path) io::write_file_atomic(*out_path, csv);
    else out << csv;
    return kExitOk;
  });
}

}  // namespace ssc::cli
