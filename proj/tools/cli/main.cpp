#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "tcmerton/errors.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium consumption and investment under non-constant discounting"};
  app.require_subcommand(1);
  tcm::cli::CommandOptions opts;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opts.config, "INI configuration file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", opts.out, "Output directory (overrides TCMERTON_OUT and the config)");
    cmd->add_option("--seed", opts.seed, "Monte Carlo seed");
  };
  auto* solve = app.add_subcommand("solve", "Fixed point, p_bar, controls and value surface");
  common(solve);
  auto* simulate = app.add_subcommand("simulate", "Simulate equilibrium paths from solve output");
  common(simulate);
  simulate->add_option("--t0", opts.t0, "Start time (a grid node)");
  simulate->add_option("--x0", opts.x0, "Initial wealth");
  auto* verify = app.add_subcommand("verify", "Run the check suite and write report.json");
  common(verify);
  verify->add_flag("--strict", opts.strict, "Treat warnings as failures");
  verify->add_option("--x0", opts.x0, "Initial wealth for the Monte Carlo checks");

  CLI11_PARSE(app, argc, argv);
  try {
    if (solve->parsed()) return tcm::cli::cmd_solve(opts, std::cerr);
    if (simulate->parsed()) return tcm::cli::cmd_simulate(opts, std::cerr);
    return tcm::cli::cmd_verify(opts, std::cout, std::cerr);
  } catch (const tcm::ValidationError& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
