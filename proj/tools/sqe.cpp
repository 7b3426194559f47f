#include <CLI11.hpp>

#include <iostream>

#include "sqe/experiments.hpp"

int main(int argc, char** argv) {
  using namespace sqe;
  CLI::App app{"sqe: stochastic quantization experiments on the 2-torus"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  for (const auto& name : experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "flat YAML key: value file");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--replicas", replicas, "overrides the config replica count");
    sub->add_option("--out", out_dir, "artifact directory");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  ExperimentConfig cfg;
  try {
    ConfigOverrides ov;
    if (seed) {
      ov.has_seed = true;
      ov.seed = *seed;
    }
    if (replicas) ov.values["replicas"] = {double(*replicas)};
    const std::filesystem::path p = config_path;
    cfg = parse_config(experiment, config_path.empty() ? nullptr : &p, ov);
    if (!out_dir.empty()) cfg.out = out_dir;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  std::cout << cfg.echo() << std::flush;
  ExperimentReport rep;
  try {
    rep = run_experiment(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  try {
    write_artifacts(rep, cfg.out);
  } catch (const std::exception& e) {
    std::cerr << "could not write artifacts: " << e.what() << "\n";
  }
  std::cout << report_summary(rep);
  return rep.exit_code();
}
