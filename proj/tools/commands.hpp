#pragma once

// Subcommands behind the fracctl executable. Each returns the process exit
// code: 0 success, 1 configuration error, 2 numerical failure or failed check.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "fracctl/problem.hpp"

namespace fracctl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

struct CommandOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir = "out";
  std::optional<double> alpha;
  std::optional<SolverKind> solver;
  std::uint64_t seed = 1;
  std::string axis = "dt";
  std::size_t levels = 4;
};

int cmd_solve(const CommandOptions& options, std::ostream& log);
int cmd_optimize(const CommandOptions& options, std::ostream& log);
int cmd_study(const CommandOptions& options, std::ostream& log);
int cmd_validate(const CommandOptions& options, std::ostream& log);

/// Dispatches by name and maps exceptions to exit codes, printing the
/// message(s) to `err`.
int run_command(const std::string& name, const CommandOptions& options, std::ostream& log, std::ostream& err);

struct OrderFit {
  double order = 0.0;
  double r_squared = 0.0;
};

/// Least-squares slope of log(error) against log(step).
OrderFit fit_order(std::span<const double> steps, std::span<const double> errors);

}  // namespace fracctl::cli
