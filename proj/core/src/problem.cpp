#include "fracctl/problem.hpp"

#include <cmath>
#include <string>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

double NonlocalSpec::weight_sum() const noexcept {
  double sum = 0.0;
  for (const auto& p : pairs) sum += std::abs(p.weight);
  return sum;
}

H1Report validate_h1(const NonlocalSpec& spec) {
  H1Report report;
  report.weight_sum = spec.weight_sum();
  report.margin = report.bound - report.weight_sum;
  report.pass = report.weight_sum < report.bound;
  return report;
}

Eigen::VectorXd Problem::apply_control_map(const Eigen::VectorXd& v) const {
  return identity_map ? v : Eigen::VectorXd(control_map * v);
}

Eigen::VectorXd Problem::apply_control_map_transpose(const Eigen::VectorXd& v) const {
  return identity_map ? v : Eigen::VectorXd(control_map.transpose() * v);
}

Trajectory project_trajectory(const SpaceTimeField& field, const SpaceMesh& mesh, const TimeGrid& grid) {
  Trajectory out = Trajectory::zeros(grid, mesh.dofs());
  if (!field) return out;
  for (std::size_t n = 0; n <= grid.steps(); ++n) {
    const double t = grid.time(n);
    out.set_row(n, l2_project([&](double x) { return field(t, x); }, mesh));
  }
  return out;
}

Problem discretize(const ProblemConfig& config) {
  std::vector<std::string> problems;
  auto check_positive = [&](double value, const char* name) {
    if (!(value > 0.0) || !std::isfinite(value)) problems.push_back(fmt::format("{} must be positive, got {}", name, value));
  };
  check_positive(config.tol.step_tol, "step_tol");
  check_positive(config.tol.nonlocal_tol, "nonlocal_tol");
  check_positive(config.tol.hammerstein_tol, "hammerstein_tol");
  check_positive(config.tol.eps1, "eps1");
  check_positive(config.tol.eps2, "eps2");
  check_positive(config.cost.epsilon, "epsilon");
  check_positive(config.cost.r0_scale, "R0_scale");
  check_positive(config.cost.w0_scale, "W0_scale");
  check_positive(config.cost.scale, "cost scale");
  check_positive(config.diffusion, "diffusion");
  if (!(config.tol.delta >= 0.0)) problems.push_back(fmt::format("delta must be >= 0, got {}", config.tol.delta));
  if (config.tol.max_iter == 0) problems.push_back("max_iter must be positive");
  if (config.tol.max_outer == 0) problems.push_back("max_outer must be positive");
  if (config.steps < 2) problems.push_back(fmt::format("N must be at least 2, got {}", config.steps));
  if (config.n_elems < 2) problems.push_back(fmt::format("n_elems must be at least 2, got {}", config.n_elems));
  if (!(config.x_lo < config.x_hi)) problems.push_back(fmt::format("degenerate domain ({}, {})", config.x_lo, config.x_hi));
  check_positive(config.final_time, "T");

  const H1Report h1 = validate_h1(config.nonlocal);
  if (!h1.pass) {
    problems.push_back(fmt::format("nonlocal weights violate sum |c_k| < 1: sum = {}, margin = {}", h1.weight_sum,
                                   h1.margin));
  }
  if (!problems.empty()) throw ConfigError(problems);

  Problem p{config,
            build_mesh(config.x_lo, config.x_hi, config.n_elems),
            {},
            {},
            TimeGrid(config.final_time, config.steps),
            {},
            true,
            {},
            {},
            Trajectory::zeros(TimeGrid(config.final_time, config.steps), config.n_elems - 1),
            {}};
  p.mass = assemble_mass(p.mesh);
  p.stiffness = assemble_stiffness(p.mesh, config.diffusion);
  const auto dofs = static_cast<Eigen::Index>(p.dofs());

  double previous = 0.0;
  for (const auto& pair : config.nonlocal.pairs) {
    const long index = p.grid.nearest_index(pair.time);
    if (!(pair.time > 0.0) || index <= 0) {
      problems.push_back(fmt::format("nonlocal time {} is not within dt/2 of a grid point in (0, T]", pair.time));
      continue;
    }
    if (pair.time <= previous) problems.push_back("nonlocal times must be strictly increasing");
    previous = pair.time;
    p.nonlocal_index.push_back(static_cast<std::size_t>(index));
  }

  if (config.control_map) {
    if (config.control_map->rows() != dofs || config.control_map->cols() != dofs) {
      problems.push_back(fmt::format("B is {}x{}, expected {}x{}", config.control_map->rows(),
                                     config.control_map->cols(), dofs, dofs));
    } else {
      p.control_map = *config.control_map;
      p.identity_map = false;
    }
  }

  if (config.control_values) {
    if (config.control_values->rows() != static_cast<Eigen::Index>(config.steps + 1) ||
        config.control_values->cols() != dofs) {
      problems.push_back(fmt::format("control data is {}x{}, expected {}x{}", config.control_values->rows(),
                                     config.control_values->cols(), config.steps + 1, dofs));
    } else {
      p.control.values = *config.control_values;
    }
  } else if (config.control) {
    p.control = project_trajectory(config.control, p.mesh, p.grid);
  }
  if (!problems.empty()) throw ConfigError(problems);

  p.initial_state = config.initial_state ? l2_project(config.initial_state, p.mesh) : Eigen::VectorXd::Zero(dofs);
  p.target = config.cost.target ? l2_project(config.cost.target, p.mesh) : Eigen::VectorXd::Zero(dofs);
  // Control row 0 never enters the scheme: slab (t_{n-1}, t_n] carries row n.
  p.control.values.row(0).setZero();
  return p;
}

}  // namespace fracctl
