#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>

#include "rwgd/cli/commands.hpp"
#include "rwgd/cli/config.hpp"
#include "rwgd/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Randomly weighted gradient descent experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  bool no_plot = false;
  app.add_option("--config", config_path, "experiment config (JSON)")->required();
  app.add_option("--out", out_dir, "output directory, overrides outputs.csv_dir");
  app.add_option("--seed", seed, "base seed, overrides the config seed");
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--no-plot", no_plot, "skip SVG output");

  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Monte Carlo trajectory ensemble with the squared-distance envelope"},
      {"moments", "exact first and second moments by recursion"},
      {"bounds", "assumption checks and closed-form bounds as JSON"},
      {"figure1", "uniform versus importance weighting ensembles"},
      {"figure2", "asymptotic risk under two noise maps"},
      {"oracle", "recursion versus exhaustive enumeration"},
  };
  for (const auto& [name, description] : commands) {
    app.add_subcommand(name, description)->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  rwgd::cli::ExperimentConfig config;
  try {
    config = rwgd::cli::load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (out_dir) config.outputs.csv_dir = *out_dir;
  if (seed) config.seed = *seed;
  if (no_plot) config.outputs.plot = false;

  const rwgd::cli::RunContext run{threads, &std::cerr, &std::cout};
  return rwgd::cli::run_command(app.get_subcommands().front()->get_name(), config, run);
}
