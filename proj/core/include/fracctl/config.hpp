#pragma once

// Text configuration: sections [problem] [nonlocal] [cost] [solver] holding
// `key = value` lines; `#` starts a comment. The grammar and defaults are
// documented in docs/config.md.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fracctl/problem.hpp"

namespace fracctl {

struct ConfigOverrides {
  std::optional<double> alpha;
  std::optional<SolverKind> solver;
};

struct LoadedConfig {
  ProblemConfig problem;
  /// "section.key" and raw value for every line read, in file order.
  std::vector<std::pair<std::string, std::string>> entries;
};

/// Parses and validates a configuration. Every problem found (unknown keys,
/// malformed values, missing required keys, smallness violation, nonlocal
/// times off the grid) is reported in a single ConfigError.
LoadedConfig parse_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Same, from text; relative file references resolve against `base_dir`.
LoadedConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                               const ConfigOverrides& overrides = {});

std::optional<SolverKind> parse_solver_kind(std::string_view name);
std::string to_string(SolverKind kind);
std::string to_string(CostKind kind);

}  // namespace fracctl
