#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fracctl {

/// Invalid argument to a numerical routine (out-of-range order, bad grid, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rejected problem configuration. Carries every problem found, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  explicit ConfigError(const std::string& problem) : ConfigError(std::vector<std::string>{problem}) {}

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

/// An iteration (Picard sweep, nonlocal fixed point, CG, ...) failed to converge.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_ratio)
      : std::runtime_error(what), last_ratio_(last_ratio) {}

  /// Last observed contraction ratio (or other iteration diagnostic).
  double last_ratio() const noexcept { return last_ratio_; }

 private:
  double last_ratio_;
};

}  // namespace fracctl
