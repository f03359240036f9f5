#pragma once

#include <string>

#include "fracctl/problem.hpp"

namespace fracctl {

/// Compiles an arithmetic expression in the variables t and x.
///
/// Grammar: numbers, t, x, pi, e, + - * / ^ (right-associative), parentheses
/// and the functions sin cos tan sinh cosh tanh exp log sqrt abs erf erfc gamma.
/// Throws ConfigError pointing at the offending position.
SpaceTimeField compile_expression(const std::string& text);

}  // namespace fracctl
