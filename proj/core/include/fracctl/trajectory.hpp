#pragma once

#include <cstddef>

#include <Eigen/Core>

namespace fracctl {

/// Uniform grid t_n = n dt on [0, T].
class TimeGrid {
 public:
  TimeGrid(double final_time, std::size_t steps);

  double final_time() const noexcept { return final_time_; }
  std::size_t steps() const noexcept { return steps_; }
  double dt() const noexcept { return dt_; }
  /// t_n; t_N is returned as T exactly.
  double time(std::size_t n) const noexcept;
  /// Index of the grid point nearest to t, or -1 when t is more than dt/2 off.
  long nearest_index(double t) const noexcept;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double final_time_;
  std::size_t steps_;
  double dt_;
};

using TrajectoryValues = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Space-time array of nodal (or modal) values: row n holds the values at t_n.
struct Trajectory {
  TimeGrid grid;
  TrajectoryValues values;

  static Trajectory zeros(const TimeGrid& grid, std::size_t dofs);

  std::size_t dofs() const noexcept { return static_cast<std::size_t>(values.cols()); }
  Eigen::VectorXd row(std::size_t n) const { return values.row(static_cast<Eigen::Index>(n)).transpose(); }
  void set_row(std::size_t n, const Eigen::VectorXd& v) { values.row(static_cast<Eigen::Index>(n)) = v.transpose(); }
  bool finite() const { return values.allFinite(); }
};

}  // namespace fracctl
