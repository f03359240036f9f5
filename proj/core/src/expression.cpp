#include "fracctl/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <unordered_map>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

namespace {

using Unary = double (*)(double);

const std::unordered_map<std::string, Unary>& functions() {
  static const std::unordered_map<std::string, Unary> table{
      {"sin", [](double v) { return std::sin(v); }},     {"cos", [](double v) { return std::cos(v); }},
      {"tan", [](double v) { return std::tan(v); }},     {"sinh", [](double v) { return std::sinh(v); }},
      {"cosh", [](double v) { return std::cosh(v); }},   {"tanh", [](double v) { return std::tanh(v); }},
      {"exp", [](double v) { return std::exp(v); }},     {"log", [](double v) { return std::log(v); }},
      {"sqrt", [](double v) { return std::sqrt(v); }},   {"abs", [](double v) { return std::abs(v); }},
      {"erf", [](double v) { return std::erf(v); }},     {"erfc", [](double v) { return std::erfc(v); }},
      {"gamma", [](double v) { return std::tgamma(v); }},
  };
  return table;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  SpaceTimeField parse() {
    SpaceTimeField out = expression();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected character");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError(fmt::format("expression '{}': {} at position {}", text_, why, pos_ + 1));
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  SpaceTimeField expression() {
    SpaceTimeField lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = [a = lhs, b = term()](double t, double x) { return a(t, x) + b(t, x); };
      } else if (accept('-')) {
        lhs = [a = lhs, b = term()](double t, double x) { return a(t, x) - b(t, x); };
      } else {
        return lhs;
      }
    }
  }

  SpaceTimeField term() {
    SpaceTimeField lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = [a = lhs, b = unary()](double t, double x) { return a(t, x) * b(t, x); };
      } else if (accept('/')) {
        lhs = [a = lhs, b = unary()](double t, double x) { return a(t, x) / b(t, x); };
      } else {
        return lhs;
      }
    }
  }

  SpaceTimeField unary() {
    if (accept('-')) return [a = unary()](double t, double x) { return -a(t, x); };
    if (accept('+')) return unary();
    return power();
  }

  SpaceTimeField power() {
    SpaceTimeField base = primary();
    if (accept('^')) return [a = base, b = unary()](double t, double x) { return std::pow(a(t, x), b(t, x)); };
    return base;
  }

  SpaceTimeField primary() {
    skip_space();
    if (pos_ >= text_.size()) fail("unexpected end");
    if (accept('(')) {
      SpaceTimeField inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = text_.c_str() + pos_;
      char* end = nullptr;
      const double value = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      return [value](double, double) { return value; };
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
      const std::string name = text_.substr(start, pos_ - start);
      if (name == "t") return [](double t, double) { return t; };
      if (name == "x") return [](double, double x) { return x; };
      if (name == "pi") return [](double, double) { return std::numbers::pi; };
      if (name == "e") return [](double, double) { return std::numbers::e; };
      const auto it = functions().find(name);
      if (it == functions().end()) {
        pos_ = start;
        fail(fmt::format("unknown name '{}'", name));
      }
      if (!accept('(')) fail(fmt::format("expected '(' after {}", name));
      SpaceTimeField arg = expression();
      if (!accept(')')) fail("expected ')'");
      return [f = it->second, a = arg](double t, double x) { return f(a(t, x)); };
    }
    fail("unexpected character");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

SpaceTimeField compile_expression(const std::string& text) { return Parser(text).parse(); }

}  // namespace fracctl
