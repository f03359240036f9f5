#include <cmath>
#include <numbers>

#include "doctest.h"

#include "fracctl/errors.hpp"
#include "fracctl/expression.hpp"

using namespace fracctl;
using doctest::Approx;

namespace {
double eval(const std::string& text, double t = 0.0, double x = 0.0) { return compile_expression(text)(t, x); }
}  // namespace

TEST_CASE("arithmetic and precedence") {
  CHECK(eval("1 + 2 * 3") == 7.0);
  CHECK(eval("(1 + 2) * 3") == 9.0);
  CHECK(eval("2 ^ 3 ^ 2") == 512.0);
  CHECK(eval("-2 ^ 2") == -4.0);
  CHECK(eval("8 / 4 / 2") == 1.0);
  CHECK(eval("1.5e-1 * 10") == Approx(1.5));
  CHECK(eval("- -3") == 3.0);
}

TEST_CASE("variables, constants and functions") {
  CHECK(eval("sin(pi*x)", 0.0, 0.5) == Approx(1.0));
  CHECK(eval("exp(-x^2)*sin(pi*x)", 0.0, 0.3) == Approx(std::exp(-0.09) * std::sin(0.3 * std::numbers::pi)));
  CHECK(eval("(1+t)*x*(1-x)", 2.0, 0.5) == Approx(0.75));
  CHECK(eval("e") == Approx(std::exp(1.0)));
  CHECK(eval("sqrt(abs(-16)) + log(1) + erf(0) + erfc(0) + gamma(5)") == Approx(4.0 + 0.0 + 0.0 + 1.0 + 24.0));
  CHECK(eval("cos(0) + tan(0) + sinh(0) + cosh(0) + tanh(0)") == Approx(2.0));
}

TEST_CASE("syntax errors name the position") {
  for (const char* bad : {"", "1 +", "sin(x", "foo(x)", "y + 1", "2 * * 3", "1 2", "sin x", "(", "3)"}) {
    INFO("expression: '" << bad << "'");
    CHECK_THROWS_AS(compile_expression(bad), ConfigError);
  }
  try {
    compile_expression("x + $");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("position 5") != std::string::npos);
  }
}
