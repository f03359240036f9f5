#pragma once

// Small problem builders shared by the unit tests.

#include <cmath>
#include <numbers>

#include "fracctl/problem.hpp"

namespace fracctl::testing {

inline ProblemConfig desk_config(double alpha, std::size_t n_elems, std::size_t steps) {
  ProblemConfig cfg;
  cfg.alpha = FractionalOrder(alpha);
  cfg.n_elems = n_elems;
  cfg.steps = steps;
  cfg.final_time = 1.0;
  cfg.initial_state = [](double x) { return std::sin(std::numbers::pi * x); };
  return cfg;
}

/// 3 interior dofs, 8 steps: the instance used for gradient checks.
inline ProblemConfig tiny_config(double alpha, Nonlinearity f, CostKind cost) {
  ProblemConfig cfg = desk_config(alpha, 4, 8);
  cfg.nonlinearity = std::move(f);
  cfg.cost.kind = cost;
  cfg.cost.epsilon = 1e-2;
  cfg.cost.target = [](double x) { return 0.5 * x * (1.0 - x); };
  cfg.tol.step_tol = 1e-14;
  cfg.tol.nonlocal_tol = 1e-14;
  return cfg;
}

inline Trajectory seeded_control(const Problem& p, unsigned seed) {
  Trajectory v = Trajectory::zeros(p.grid, p.dofs());
  for (std::size_t n = 1; n <= p.grid.steps(); ++n) {
    for (std::size_t i = 0; i < p.dofs(); ++i) {
      const double s = std::sin(1.7 * static_cast<double>(seed + 3 * n + 5 * i) + 0.3 * static_cast<double>(i * n));
      v.values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = s;
    }
  }
  return v;
}

}  // namespace fracctl::testing
