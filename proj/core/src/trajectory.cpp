#include "fracctl/trajectory.hpp"

#include <cmath>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

TimeGrid::TimeGrid(double final_time, std::size_t steps) : final_time_(final_time), steps_(steps) {
  if (!(final_time > 0.0) || !std::isfinite(final_time)) {
    throw DomainError(fmt::format("final time must be positive, got {}", final_time));
  }
  if (steps < 1) throw DomainError("time grid needs at least one step");
  dt_ = final_time / static_cast<double>(steps);
}

double TimeGrid::time(std::size_t n) const noexcept {
  if (n >= steps_) return final_time_;
  return final_time_ * static_cast<double>(n) / static_cast<double>(steps_);
}

long TimeGrid::nearest_index(double t) const noexcept {
  if (!std::isfinite(t)) return -1;
  const double k = std::round(t / dt_);
  if (k < 0.0 || k > static_cast<double>(steps_)) return -1;
  if (std::abs(t - k * dt_) > 0.5 * dt_) return -1;
  return static_cast<long>(k);
}

Trajectory Trajectory::zeros(const TimeGrid& grid, std::size_t dofs) {
  return Trajectory{grid, TrajectoryValues::Zero(static_cast<Eigen::Index>(grid.steps() + 1),
                                                 static_cast<Eigen::Index>(dofs))};
}

}  // namespace fracctl
