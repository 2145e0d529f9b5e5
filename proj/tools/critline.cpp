// critline: evaluate, optimise and verify three-piece mollifier bounds.

#include <iostream>

#include "CLI11.hpp"

#include "app.hpp"

int main(int argc, char** argv) {
  using critline::app::RunOptions;
  RunOptions run;
  CLI::App cli{"Zero-proportion bounds from the three-piece mollifier"};
  cli.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    auto* cfg = sub->add_option("-c,--config", run.config_path, "key-value configuration file");
    auto* preset = sub->add_option("-p,--preset", run.preset, "built-in configuration")
                       ->check(CLI::IsMember({"paper_kappa", "paper_kappa_star"}));
    cfg->excludes(preset);
    sub->add_option("-o,--out", run.out_path, "report path (default stdout)");
    sub->add_option("-w,--workers", run.workers, "worker threads, 0 for all cores")->capture_default_str();
    sub->add_option("--nodes", run.nodes.all, "nodes per dimension for every term");
    sub->add_option("--nodes-c1", run.nodes.c1);
    sub->add_option("--nodes-c12", run.nodes.c12);
    sub->add_option("--nodes-c2", run.nodes.c2);
    sub->add_option("--nodes-c3", run.nodes.c3);
    sub->add_option("--nodes-c23", run.nodes.c23);
    sub->add_option("--nodes-c31", run.nodes.c31);
  };

  auto* eval = cli.add_subcommand("eval", "evaluate the six terms and the bound");
  common(eval);
  eval->add_option("-f,--format", run.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* sweep = cli.add_subcommand("sweep", "bound over a grid of R at fixed polynomials");
  common(sweep);
  sweep->add_option("-f,--format", run.format, "csv or json")->check(CLI::IsMember({"json", "csv"}));
  sweep->add_option("--r-min", run.r_min)->capture_default_str();
  sweep->add_option("--r-max", run.r_max)->capture_default_str();
  sweep->add_option("--r-steps", run.r_steps)->capture_default_str();

  auto* verify = cli.add_subcommand("verify", "identity and operator-reduction checks");
  common(verify);
  verify->add_option("--seed", run.seed)->capture_default_str();
  verify->add_option("--samples", run.identity_samples, "random points per identity sweep")->capture_default_str();

  auto* optimize = cli.add_subcommand("optimize", "maximise the bound from a starting configuration");
  common(optimize);
  optimize->add_option("--budget", run.budget, "objective evaluations")->capture_default_str();
  optimize->add_option("--restarts", run.restarts)->capture_default_str();
  optimize->add_option("--search-nodes", run.search_nodes, "nodes per dimension for every term during the search")
      ->check(CLI::Range(2, 64));
  optimize->add_option("--seed", run.seed)->capture_default_str();
  optimize->add_option("--trace", run.trace_path, "CSV of best bound per evaluation");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : critline::app::kConfigError;
  }
  run.command = cli.get_subcommands().front()->get_name();
  return critline::app::run_command(run);
}
