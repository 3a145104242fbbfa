#include <iostream>

#include <CLI11.hpp>

#include "lexprompt/app.hpp"

namespace app = lexprompt::app;

int main(int argc, char** argv) {
  CLI::App cli{"Greedy word-substitution prompt optimizer"};
  cli.require_subcommand(1);

  std::string config;
  app::Overrides ov;
  std::string order;
  std::string trace_path;
  std::string out_path;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--run-dir", ov.run_dir, "output directory");
    sub->add_option("--template", ov.template_path, "template file");
  };
  auto search = [&](CLI::App* sub) {
    sub->add_option("--seed", ov.seed, "base seed");
    sub->add_option("--k", ov.candidate_k, "candidates per word");
    sub->add_option("--fraction", ov.target_fraction, "fraction of words to edit");
    sub->add_option("--n-ref", ov.reference_size, "reference batch size");
  };

  auto* optimize = cli.add_subcommand("optimize", "run the search and write traces");
  common(optimize);
  search(optimize);
  optimize->add_option("--seeds", ov.seeds, "number of seeds (base seed + 0..n-1)");
  optimize->add_option("--order", order, "influence or random")
      ->check(CLI::IsMember({"influence", "random"}));

  auto* evaluate = cli.add_subcommand("evaluate", "score a template on a pool");
  common(evaluate);
  evaluate->add_option("--pool", ov.pool, "eval or proxy")->check(CLI::IsMember({"eval", "proxy"}));

  auto* influence = cli.add_subcommand("influence", "rank words by deletion influence");
  common(influence);
  search(influence);

  auto* neighborhood = cli.add_subcommand("neighborhood", "score every one-word variant");
  common(neighborhood);
  neighborhood->add_option("--k", ov.neighborhood_k, "candidates per word");
  neighborhood->add_option("--pool", ov.pool, "eval or proxy")
      ->check(CLI::IsMember({"eval", "proxy"}));

  auto* report = cli.add_subcommand("report", "summarize a trace file");
  report->add_option("trace", trace_path, "trace JSON")->required();
  report->add_option("--out", out_path, "also write the report here");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e) == 0 ? 0 : app::kUsage;
  }

  if (report->parsed()) {
    std::optional<std::filesystem::path> out;
    if (!out_path.empty()) out = out_path;
    return app::cmd_report(trace_path, out, std::cout, std::cerr);
  }

  app::RunConfig cfg;
  try {
    cfg = app::load_run_config(config);
    if (!order.empty()) ov.order = lexprompt::parse_order_mode(order);
    app::apply_overrides(cfg, ov);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kUsage;
  }

  if (optimize->parsed()) return app::cmd_optimize(cfg, ov.seeds.value_or(1), std::cout, std::cerr);
  if (evaluate->parsed()) return app::cmd_evaluate(cfg, ov.pool, std::cout, std::cerr);
  if (influence->parsed()) return app::cmd_influence(cfg, std::cout, std::cerr);
  return app::cmd_neighborhood(cfg, ov.pool, std::cout, std::cerr);
}
