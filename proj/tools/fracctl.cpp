#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "commands.hpp"
#include "fracctl/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of Caputo-fractional diffusion with nonlocal initial conditions"};
  app.require_subcommand(1);

  fracctl::cli::CommandOptions options;
  std::string solver;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", options.config, "Problem configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", options.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--alpha", options.alpha, "Override the fractional order")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--solver", solver, "State solver")->check(CLI::IsMember({"l1", "gl", "mild"}));
    sub->add_option("--seed", options.seed, "Seed for sampled diagnostics")->capture_default_str();
  };

  auto* solve = app.add_subcommand("solve", "Solve the state equation for the configured control");
  auto* optimize = app.add_subcommand("optimize", "Minimize the cost by conjugate gradients");
  auto* study = app.add_subcommand("study", "Convergence study in dt or h");
  auto* validate = app.add_subcommand("validate", "Run assumption, gradient and optimality checks");
  for (auto* sub : {solve, optimize, study, validate}) add_common(sub);
  study->add_option("--axis", options.axis, "Refinement axis")->check(CLI::IsMember({"dt", "h"}))->capture_default_str();
  study->add_option("--levels", options.levels, "Number of refinement levels (>= 3)")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  if (!solver.empty()) options.solver = fracctl::parse_solver_kind(solver);

  const std::string name = app.get_subcommands().front()->get_name();
  return fracctl::cli::run_command(name, options, std::cout, std::cerr);
}
