// ssc: generate synthetic benchmarks, cluster with pairwise annotations,
// evaluate partitions and run benchmark sweeps.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ssc/cli.hpp"

int main(int argc, char** argv) {
  using namespace ssc::cli;
  CLI::App app{"Semi-supervised clustering with noisy must-link / cannot-link annotations"};
  app.require_subcommand(1);

  GenerateOptions gen;
  std::optional<std::size_t> gen_m;
  auto* generate = app.add_subcommand("generate", "Write a synthetic mixture with expert annotations");
  generate->add_option("--n", gen.n, "Number of samples")->capture_default_str();
  generate->add_option("--d", gen.d, "Number of features")->capture_default_str();
  generate->add_option("--k", gen.k, "Number of clusters")->capture_default_str();
  generate->add_option("--p", gen.p, "Expert accuracy in [0, 1]")->capture_default_str();
  generate->add_option("--m", gen_m, "Number of annotations (default: N)");
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Output prefix")->capture_default_str();

  ClusterOptions cl;
  auto* cluster = app.add_subcommand("cluster", "Fit the joint mixture / block-model likelihood");
  cluster->add_option("--data", cl.data, "features.csv")->required();
  cluster->add_option("--k", cl.k, "Number of clusters")->required();
  cluster->add_option("--annotations", cl.annotations, "annotations.txt");
  cluster->add_option("--priors", cl.priors, "Expert accuracy; enables prior mode");
  cluster->add_option("--pi1", cl.pi1, "Population size after selection")->capture_default_str();
  cluster->add_option("--pi2", cl.pi2, "Population size triggering selection")->capture_default_str();
  cluster->add_option("--iters", cl.iters, "Iterations per repetition")->capture_default_str();
  cluster->add_option("--reps", cl.reps, "Independent repetitions")->capture_default_str();
  cluster->add_option("--seed", cl.seed, "Random seed")->capture_default_str();
  cluster->add_option("--out", cl.out, "Output prefix")->capture_default_str();
  cluster->add_option("--truth", cl.truth, "Ground-truth labels for the report");
  cluster->add_option("--true-params", cl.true_params, "Ground-truth params.csv for the report");
  cluster->add_flag("--timing", cl.timing, "Record wall times in the report");

  EvaluateOptions ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compare a partition (and parameters) against ground truth");
  evaluate->add_option("--pred", ev.pred, "Predicted labels")->required();
  evaluate->add_option("--truth", ev.truth, "Ground-truth labels")->required();
  evaluate->add_option("--pred-params", ev.pred_params, "Fitted params.csv");
  evaluate->add_option("--true-params", ev.true_params, "Ground-truth params.csv");

  BenchmarkOptions bm;
  std::string p_list = "0.8,0.9,1.0";
  std::string m_list = "0,0.5,1,1.5,2,2.5,3,3.5,4";
  std::optional<std::string> bm_out;
  bool no_priors = false;
  auto* benchmark = app.add_subcommand("benchmark", "Sweep accuracy and annotation counts over synthetic mixtures");
  benchmark->add_option("--datasets", bm.datasets, "Number of mixtures")->capture_default_str();
  benchmark->add_option("--n", bm.n, "Samples per mixture")->capture_default_str();
  benchmark->add_option("--d", bm.d, "Features")->capture_default_str();
  benchmark->add_option("--k", bm.k, "Clusters")->capture_default_str();
  benchmark->add_option("--p-list", p_list, "Comma-separated expert accuracies")->capture_default_str();
  benchmark->add_option("--m-list", m_list, "Comma-separated annotation counts as multiples of N")->capture_default_str();
  benchmark->add_option("--seed", bm.seed, "Random seed")->capture_default_str();
  benchmark->add_option("--pi1", bm.pi1, "Population size after selection")->capture_default_str();
  benchmark->add_option("--pi2", bm.pi2, "Population size triggering selection")->capture_default_str();
  benchmark->add_option("--iters", bm.iters, "Iterations per repetition")->capture_default_str();
  benchmark->add_option("--reps", bm.reps, "Repetitions per cell")->capture_default_str();
  benchmark->add_option("--out", bm_out, "Write CSV here instead of standard output");
  benchmark->add_flag("--no-priors", no_priors, "Skip the prior-mode variant");
  benchmark->add_flag("--timing", bm.timing, "Record wall times in the ms column");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (generate->parsed()) {
      gen.m = gen_m;
      return cmd_generate(gen, std::cerr);
    }
    if (cluster->parsed()) return cmd_cluster(cl, std::cout, std::cerr);
    if (evaluate->parsed()) return cmd_evaluate(ev, std::cout, std::cerr);
    if (benchmark->parsed()) {
      return guarded(std::cerr, [&] {
        bm.p_list = parse_real_list(p_list);
        bm.m_list = parse_real_list(m_list);
        bm.with_priors = !no_priors;
        return cmd_benchmark(bm, bm_out, std::cout, std::cerr);
      });
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
