#include "fracctl/errors.hpp"

#include <utility>

namespace fracctl {

namespace {

std::string join_problems(const std::vector<std::string>& problems) {
  if (problems.empty()) return "invalid configuration";
  std::string out = problems.front();
  for (std::size_t i = 1; i < problems.size(); ++i) {
    out += "; ";
    out += problems[i];
  }
  return out;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error(join_problems(problems)), problems_(std::move(problems)) {}

}  // namespace fracctl
