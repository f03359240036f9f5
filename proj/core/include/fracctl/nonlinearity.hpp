#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace fracctl {

/// Pointwise reaction term f(t, u) applied at the nodes.
///
/// Built-ins: zero, linear_decay f = -rate u, cubic_decay f = -rate u^3. A
/// table is a piecewise-linear interpolant of (u, f) pairs, extended linearly
/// past its end points. zero and linear_decay satisfy |f| <= rate |u|; cubic
/// decay has no global linear growth bound.
class Nonlinearity {
 public:
  enum class Kind { Zero, LinearDecay, CubicDecay, Table };

  static Nonlinearity zero();
  static Nonlinearity linear_decay(double rate);
  static Nonlinearity cubic_decay(double rate);
  static Nonlinearity table(std::vector<std::pair<double, double>> points);

  Kind kind() const noexcept { return kind_; }
  std::string name() const;
  double rate() const noexcept { return rate_; }

  double value(double t, double u) const;
  double derivative(double t, double u) const;

  Eigen::VectorXd apply(double t, const Eigen::VectorXd& u) const;
  Eigen::VectorXd jacobian_diagonal(double t, const Eigen::VectorXd& u) const;

  /// kappa when f(t, u) = kappa u exactly (zero gives 0), otherwise empty.
  std::optional<double> linear_coefficient() const noexcept;
  bool is_linear() const noexcept { return linear_coefficient().has_value(); }

 private:
  Nonlinearity(Kind kind, double rate, std::vector<std::pair<double, double>> points)
      : kind_(kind), rate_(rate), points_(std::move(points)) {}

  Kind kind_;
  double rate_ = 0.0;
  std::vector<std::pair<double, double>> points_;
};

}  // namespace fracctl
