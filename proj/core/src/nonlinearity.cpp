#include "fracctl/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

Nonlinearity Nonlinearity::zero() { return Nonlinearity(Kind::Zero, 0.0, {}); }

Nonlinearity Nonlinearity::linear_decay(double rate) {
  if (!std::isfinite(rate) || rate < 0.0) throw DomainError(fmt::format("decay rate must be >= 0, got {}", rate));
  return Nonlinearity(Kind::LinearDecay, rate, {});
}

Nonlinearity Nonlinearity::cubic_decay(double rate) {
  if (!std::isfinite(rate) || rate < 0.0) throw DomainError(fmt::format("decay rate must be >= 0, got {}", rate));
  return Nonlinearity(Kind::CubicDecay, rate, {});
}

Nonlinearity Nonlinearity::table(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("nonlinearity table needs at least two points");
  std::sort(points.begin(), points.end());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i].first) || !std::isfinite(points[i].second)) {
      throw DomainError("nonlinearity table has a non-finite entry");
    }
    if (i > 0 && points[i].first == points[i - 1].first) {
      throw DomainError(fmt::format("nonlinearity table repeats u = {}", points[i].first));
    }
  }
  return Nonlinearity(Kind::Table, 0.0, std::move(points));
}

std::string Nonlinearity::name() const {
  switch (kind_) {
    case Kind::Zero: return "zero";
    case Kind::LinearDecay: return "linear_decay";
    case Kind::CubicDecay: return "cubic_decay";
    case Kind::Table: return "table";
  }
  return "unknown";
}

double Nonlinearity::value(double /*t*/, double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::LinearDecay: return -rate_ * u;
    case Kind::CubicDecay: return -rate_ * u * u * u;
    case Kind::Table: {
      auto it = std::upper_bound(points_.begin(), points_.end(), u,
                                 [](double x, const auto& p) { return x < p.first; });
      std::size_t hi = static_cast<std::size_t>(it - points_.begin());
      hi = std::clamp<std::size_t>(hi, 1, points_.size() - 1);
      const auto& [u0, f0] = points_[hi - 1];
      const auto& [u1, f1] = points_[hi];
      return f0 + (f1 - f0) * (u - u0) / (u1 - u0);
    }
  }
  return 0.0;
}

double Nonlinearity::derivative(double /*t*/, double u) const {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::LinearDecay: return -rate_;
    case Kind::CubicDecay: return -3.0 * rate_ * u * u;
    case Kind::Table: {
      auto it = std::upper_bound(points_.begin(), points_.end(), u,
                                 [](double x, const auto& p) { return x < p.first; });
      std::size_t hi = static_cast<std::size_t>(it - points_.begin());
      hi = std::clamp<std::size_t>(hi, 1, points_.size() - 1);
      return (points_[hi].second - points_[hi - 1].second) / (points_[hi].first - points_[hi - 1].first);
    }
  }
  return 0.0;
}

Eigen::VectorXd Nonlinearity::apply(double t, const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = value(t, u(i));
  return out;
}

Eigen::VectorXd Nonlinearity::jacobian_diagonal(double t, const Eigen::VectorXd& u) const {
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) out(i) = derivative(t, u(i));
  return out;
}

std::optional<double> Nonlinearity::linear_coefficient() const noexcept {
  switch (kind_) {
    case Kind::Zero: return 0.0;
    case Kind::LinearDecay: return -rate_;
    case Kind::CubicDecay: return rate_ == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    case Kind::Table: return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fracctl
