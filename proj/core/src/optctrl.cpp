#include "fracctl/optctrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <fmt/format.h>

#include "fracctl/errors.hpp"
#include "fracctl/mildsolve.hpp"

namespace fracctl {

namespace {

void require_conforming(const Problem& problem, const Trajectory& t, const char* what) {
  if (t.values.rows() != static_cast<Eigen::Index>(problem.grid.steps() + 1) || t.dofs() != problem.dofs()) {
    throw DomainError(fmt::format("{} is {}x{}, expected {}x{}", what, t.values.rows(), t.dofs(),
                                  problem.grid.steps() + 1, problem.dofs()));
  }
}

/// Weight of dt <v^n, v^n>_M in the cost, before the overall scale.
double control_weight(const CostSpec& cost) {
  return cost.kind == CostKind::QuadraticIntegral ? cost.epsilon * cost.r0_scale : 0.5 * cost.epsilon;
}

double cost_with_target(const Problem& problem, const Trajectory& state, const Trajectory& control,
                        const Eigen::VectorXd& target) {
  require_conforming(problem, state, "state");
  require_conforming(problem, control, "control");
  const auto& cost = problem.config.cost;
  const std::size_t steps = problem.grid.steps();
  const double dt = problem.grid.dt();

  double control_part = 0.0;
  for (std::size_t n = 1; n <= steps; ++n) {
    const Eigen::VectorXd v = control.row(n);
    control_part += dt * l2_inner(problem.mesh, v, v);
  }
  double state_part = 0.0;
  if (cost.kind == CostKind::QuadraticIntegral) {
    for (std::size_t n = 0; n < steps; ++n) {
      const Eigen::VectorXd u = state.row(n);
      state_part += dt * cost.w0_scale * l2_inner(problem.mesh, u, u);
    }
  } else {
    const Eigen::VectorXd miss = state.row(steps) - target;
    state_part = 0.5 * l2_inner(problem.mesh, miss, miss);
  }
  return cost.scale * (state_part + control_weight(cost) * control_part);
}

/// dJ/du^n as dual vectors.
Trajectory state_load(const Problem& problem, const Trajectory& state) {
  const auto& cost = problem.config.cost;
  const std::size_t steps = problem.grid.steps();
  const auto& mass = problem.mass.entries;
  Trajectory load = Trajectory::zeros(problem.grid, problem.dofs());
  if (cost.kind == CostKind::QuadraticIntegral) {
    const double w = 2.0 * cost.scale * problem.grid.dt() * cost.w0_scale;
    for (std::size_t n = 0; n < steps; ++n) load.set_row(n, w * (mass * state.row(n)));
  } else {
    load.set_row(steps, cost.scale * (mass * (state.row(steps) - problem.target)));
  }
  return load;
}

Trajectory gradient_from_state(const Problem& problem, const StepSolver& solver, const Trajectory& state,
                               const Trajectory& control) {
  const Trajectory adj = solver.adjoint(state, state_load(problem, state));
  const auto& cost = problem.config.cost;
  const double dt = problem.grid.dt();
  const double own = 2.0 * cost.scale * control_weight(cost);
  Trajectory grad = Trajectory::zeros(problem.grid, problem.dofs());
  for (std::size_t n = 1; n <= problem.grid.steps(); ++n) {
    Eigen::VectorXd coupling =
        problem.identity_map
            ? Eigen::VectorXd(adj.row(n))
            : mass_solve(problem.mesh, problem.apply_control_map_transpose(problem.mass.entries * adj.row(n)));
    grad.set_row(n, own * control.row(n) + coupling / dt);
  }
  return grad;
}

void require_stepping(const Problem& problem) {
  if (problem.config.solver == SolverKind::Mild) {
    throw ConfigError("optimization needs a time-stepping solver (l1 or gl); the mild solver has no discrete adjoint");
  }
}

double max_l2_deviation(const Problem& problem, const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= problem.grid.steps(); ++n) {
    const Eigen::VectorXd d = a.row(n) - b.row(n);
    worst = std::max(worst, std::sqrt(std::max(0.0, l2_inner(problem.mesh, d, d))));
  }
  return worst;
}

}  // namespace

double cost_evaluate(const Problem& problem, const Trajectory& state, const Trajectory& control) {
  return cost_with_target(problem, state, control, problem.target);
}

double cost_quadratic_part(const Problem& problem, const Trajectory& state, const Trajectory& control) {
  return cost_with_target(problem, state, control, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(problem.dofs())));
}

double final_tracking_error(const Problem& problem, const Trajectory& state) {
  require_conforming(problem, state, "state");
  const Eigen::VectorXd miss = state.row(problem.grid.steps()) - problem.target;
  return 0.5 * l2_inner(problem.mesh, miss, miss);
}

double control_inner(const Problem& problem, const Trajectory& a, const Trajectory& b) {
  require_conforming(problem, a, "control");
  require_conforming(problem, b, "control");
  double sum = 0.0;
  for (std::size_t n = 1; n <= problem.grid.steps(); ++n) sum += l2_inner(problem.mesh, a.row(n), b.row(n));
  return problem.grid.dt() * sum;
}

double control_norm(const Problem& problem, const Trajectory& a) {
  return std::sqrt(std::max(0.0, control_inner(problem, a, a)));
}

Trajectory gradient_adjoint(const Problem& problem, const Trajectory& control) {
  require_conforming(problem, control, "control");
  const StepSolver solver(problem);
  const Trajectory state = solver.solve(control).first;
  return gradient_from_state(problem, solver, state, control);
}

Trajectory gradient_fd_partials(const Problem& problem, const Trajectory& control, double h_fd) {
  require_conforming(problem, control, "control");
  if (!(h_fd > 0.0)) throw DomainError(fmt::format("finite-difference step must be positive, got {}", h_fd));
  const StepSolver solver(problem);
  auto cost_at = [&](const Trajectory& v) { return cost_evaluate(problem, solver.solve(v).first, v); };

  Trajectory partials = Trajectory::zeros(problem.grid, problem.dofs());
  Trajectory probe = control;
  for (std::size_t n = 1; n <= problem.grid.steps(); ++n) {
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(problem.dofs()); ++i) {
      const auto row = static_cast<Eigen::Index>(n);
      const double saved = probe.values(row, i);
      probe.values(row, i) = saved + h_fd;
      const double up = cost_at(probe);
      probe.values(row, i) = saved - h_fd;
      const double down = cost_at(probe);
      probe.values(row, i) = saved;
      partials.values(row, i) = (up - down) / (2.0 * h_fd);
    }
  }
  return partials;
}

Trajectory gradient_fd(const Problem& problem, const Trajectory& control, double h_fd) {
  Trajectory partials = gradient_fd_partials(problem, control, h_fd);
  for (std::size_t n = 1; n <= problem.grid.steps(); ++n) {
    partials.set_row(n, mass_solve(problem.mesh, partials.row(n)) / problem.grid.dt());
  }
  return partials;
}

Trajectory riesz_to_partials(const Problem& problem, const Trajectory& gradient) {
  require_conforming(problem, gradient, "gradient");
  Trajectory out = Trajectory::zeros(problem.grid, problem.dofs());
  for (std::size_t n = 1; n <= problem.grid.steps(); ++n) {
    out.set_row(n, problem.grid.dt() * (problem.mass.entries * gradient.row(n)));
  }
  return out;
}

ControlObjective::ControlObjective(const Problem& problem) : problem_(problem), solver_(problem_) {
  require_stepping(problem_);
}

std::size_t ControlObjective::size() const { return problem_.grid.steps() * problem_.dofs(); }

Eigen::VectorXd ControlObjective::flatten(const Trajectory& control) const {
  require_conforming(problem_, control, "control");
  const auto d = static_cast<Eigen::Index>(problem_.dofs());
  Eigen::VectorXd x(static_cast<Eigen::Index>(size()));
  for (std::size_t n = 1; n <= problem_.grid.steps(); ++n) {
    x.segment(static_cast<Eigen::Index>(n - 1) * d, d) = control.row(n);
  }
  return x;
}

Trajectory ControlObjective::unflatten(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(size())) throw DomainError("control vector has the wrong length");
  const auto d = static_cast<Eigen::Index>(problem_.dofs());
  Trajectory control = Trajectory::zeros(problem_.grid, problem_.dofs());
  for (std::size_t n = 1; n <= problem_.grid.steps(); ++n) {
    control.set_row(n, x.segment(static_cast<Eigen::Index>(n - 1) * d, d));
  }
  return control;
}

Trajectory ControlObjective::state(const Trajectory& control) const { return solver_.solve(control).first; }

double ControlObjective::value(const Eigen::VectorXd& x) {
  const Trajectory control = unflatten(x);
  return cost_evaluate(problem_, state(control), control);
}

Eigen::VectorXd ControlObjective::gradient(const Eigen::VectorXd& x) {
  const Trajectory control = unflatten(x);
  return flatten(gradient_from_state(problem_, solver_, state(control), control));
}

double ControlObjective::inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  const auto d = static_cast<Eigen::Index>(problem_.dofs());
  double sum = 0.0;
  for (std::size_t n = 0; n < problem_.grid.steps(); ++n) {
    const auto offset = static_cast<Eigen::Index>(n) * d;
    sum += l2_inner(problem_.mesh, a.segment(offset, d), b.segment(offset, d));
  }
  return problem_.grid.dt() * sum;
}

std::optional<double> ControlObjective::curvature(const Eigen::VectorXd& direction) {
  if (!problem_.config.nonlinearity.is_linear()) return std::nullopt;
  const Trajectory control = unflatten(direction);
  return cost_quadratic_part(problem_, solver_.solve_homogeneous(control), control);
}

void ControlObjective::set_penalty(double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError(fmt::format("control penalty must be positive, got {}", epsilon));
  problem_.config.cost.epsilon = epsilon;
}

LineSearchResult line_search(Objective& objective, const Eigen::VectorXd& x, const Eigen::VectorXd& direction,
                             const Eigen::VectorXd& gradient, double value_at_x, double trial) {
  const double slope = objective.inner(gradient, direction);
  if (!(slope < 0.0)) throw DomainError(fmt::format("not a descent direction (slope {:.3e})", slope));

  LineSearchResult result;
  if (const auto curvature = objective.curvature(direction)) {
    if (!(*curvature > 0.0)) throw DomainError("objective is not strictly convex along the search direction");
    result.step = -slope / (2.0 * *curvature);
    result.value = objective.value(x + result.step * direction);
    result.evaluations = 1;
    return result;
  }

  constexpr double kArmijo = 1e-4;
  constexpr int kMaxHalvings = 30;
  if (!(trial > 0.0) || !std::isfinite(trial)) trial = 1.0;
  const double at_trial = objective.value(x + trial * direction);
  result.evaluations = 1;
  const double bend = (at_trial - value_at_x - slope * trial) / (trial * trial);
  double step = (bend > 0.0 && std::isfinite(at_trial)) ? -slope / (2.0 * bend) : trial;
  for (int i = 0; i <= kMaxHalvings; ++i) {
    const double value = objective.value(x + step * direction);
    ++result.evaluations;
    if (std::isfinite(value) && value <= value_at_x + kArmijo * step * slope) {
      result.step = step;
      result.value = value;
      return result;
    }
    step *= 0.5;
  }
  throw ConvergenceError("line search found no Armijo step", step);
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::InnerTol: return "inner_tol";
    case StopReason::OuterTol: return "outer_tol";
    case StopReason::MaxIter: return "max_iter";
  }
  return "unknown";
}

CgResult cg_minimize(Objective& objective, const Eigen::VectorXd& x0, const CgOptions& options) {
  if (!(options.eps1 > 0.0) || !(options.eps2 > 0.0)) throw DomainError("eps1 and eps2 must be positive");
  if (!(options.delta >= 0.0)) throw DomainError("delta must be non-negative");
  auto norm = [&](const Eigen::VectorXd& v) { return std::sqrt(std::max(0.0, objective.inner(v, v))); };
  const std::size_t restart_every = std::max<std::size_t>(1, objective.size());

  CgResult result{x0, {}};
  OptimizeReport& report = result.report;
  Eigen::VectorXd& x = result.minimizer;
  double value = objective.value(x);
  Eigen::VectorXd grad = objective.gradient(x);
  report.cost_history.push_back(value);
  report.grad_norm_history.push_back(norm(grad));
  report.epsilon_schedule.push_back(objective.penalty());
  double last_step = 1.0;

  for (std::size_t cycle = 0; cycle < options.max_outer; ++cycle) {
    report.outer_cycles = cycle + 1;
    const Eigen::VectorXd cycle_start = x;
    Eigen::VectorXd direction = -grad;
    double grad_sq = objective.inner(grad, grad);
    std::size_t since_restart = 0;
    bool exhausted = false;
    bool stalled = false;

    while (grad_sq > 0.0) {
      if (report.iterations >= options.max_iter) {
        exhausted = true;
        break;
      }
      LineSearchResult search;
      try {
        search = line_search(objective, x, direction, grad, value, last_step);
      } catch (const DomainError&) {
        if (since_restart == 0) throw;
        direction = -grad;
        since_restart = 0;
        continue;
      } catch (const ConvergenceError&) {
        if (since_restart == 0) throw;
        direction = -grad;
        since_restart = 0;
        continue;
      }
      if (search.value > value + 1e-12 * std::max(1.0, std::abs(value))) {
        throw ConvergenceError(fmt::format("cost increased from {:.17g} to {:.17g}", value, search.value), search.step);
      }
      if (search.value >= value) {
        // No representable decrease left along a descent direction.
        stalled = true;
        break;
      }
      const Eigen::VectorXd change = search.step * direction;
      x += change;
      value = search.value;
      last_step = search.step;
      const Eigen::VectorXd next_grad = objective.gradient(x);
      const double next_sq = objective.inner(next_grad, next_grad);
      ++report.iterations;
      report.cost_history.push_back(value);
      report.grad_norm_history.push_back(std::sqrt(std::max(0.0, next_sq)));
      report.step_sizes.push_back(search.step);
      report.epsilon_schedule.push_back(objective.penalty());

      const bool settled = norm(change) <= options.eps1;
      ++since_restart;
      if (since_restart >= restart_every) {
        direction = -next_grad;
        since_restart = 0;
      } else {
        direction = -next_grad + (next_sq / grad_sq) * direction;
      }
      grad = next_grad;
      grad_sq = next_sq;
      if (settled) break;
    }
    if (exhausted) {
      report.stop_reason = StopReason::MaxIter;
      return result;
    }
    if ((stalled || grad_sq == 0.0) && options.delta == 0.0) {
      report.stop_reason = StopReason::InnerTol;
      return result;
    }

    if (options.delta > 0.0) {
      objective.set_penalty(objective.penalty() + options.delta);
      value = objective.value(x);
      grad = objective.gradient(x);
    }
    if (norm(x - cycle_start) <= options.eps2) {
      report.stop_reason = StopReason::OuterTol;
      return result;
    }
  }
  report.stop_reason = StopReason::MaxIter;
  return result;
}

std::pair<OptimalPair, OptimizeReport> cg_minimize(const Problem& problem, const Trajectory& control0) {
  ControlObjective objective(problem);
  const auto& tol = problem.config.tol;
  CgResult result = cg_minimize(objective, objective.flatten(control0),
                                CgOptions{tol.eps1, tol.eps2, tol.delta, tol.max_iter, tol.max_outer});
  Trajectory control = objective.unflatten(result.minimizer);
  Trajectory state = objective.state(control);
  OptimalPair pair{std::move(control), std::move(state)};
  const OptimalityResiduals residuals = optimality_residual(objective.problem(), pair);
  result.report.residual_state = residuals.state;
  result.report.residual_control = residuals.control;
  return {std::move(pair), std::move(result.report)};
}

OptimalPair kkt_direct_solve(const Problem& problem) {
  require_stepping(problem);
  if (!problem.config.nonlinearity.is_linear()) throw DomainError("kkt_direct_solve needs linear dynamics");
  const StepSolver solver(problem);
  const auto& cost = problem.config.cost;
  const std::size_t steps = problem.grid.steps();
  const auto d = static_cast<Eigen::Index>(problem.dofs());
  const Eigen::Index n_control = static_cast<Eigen::Index>(steps) * d;
  const Eigen::Index n_state = static_cast<Eigen::Index>(steps + 1) * d;
  const double dt = problem.grid.dt();
  const auto& mass = problem.mass.entries;

  // Cost as 1/2 (x - x_ref)^T W (x - x_ref) + 1/2 v^T C v with block-diagonal W, C.
  std::vector<double> state_weight(steps + 1, 0.0);
  Eigen::VectorXd reference = Eigen::VectorXd::Zero(n_state);
  if (cost.kind == CostKind::QuadraticIntegral) {
    for (std::size_t n = 0; n < steps; ++n) state_weight[n] = 2.0 * cost.scale * dt * cost.w0_scale;
  } else {
    state_weight[steps] = cost.scale;
    reference.segment(static_cast<Eigen::Index>(steps) * d, d) = problem.target;
  }
  const double control_block = 2.0 * cost.scale * control_weight(cost) * dt;

  Eigen::MatrixXd response(n_state, n_control);
  Trajectory unit = Trajectory::zeros(problem.grid, problem.dofs());
  for (std::size_t n = 1; n <= steps; ++n) {
    for (Eigen::Index i = 0; i < d; ++i) {
      unit.values(static_cast<Eigen::Index>(n), i) = 1.0;
      const Trajectory u = solver.solve_homogeneous(unit);
      unit.values(static_cast<Eigen::Index>(n), i) = 0.0;
      response.col(static_cast<Eigen::Index>(n - 1) * d + i) = u.values.reshaped<Eigen::RowMajor>();
    }
  }
  const Trajectory free = solver.solve(Trajectory::zeros(problem.grid, problem.dofs())).first;
  const Eigen::VectorXd offset = Eigen::VectorXd(free.values.reshaped<Eigen::RowMajor>()) - reference;

  Eigen::MatrixXd weighted(n_state, n_control);
  Eigen::VectorXd weighted_offset(n_state);
  for (std::size_t n = 0; n <= steps; ++n) {
    const auto rows = Eigen::seqN(static_cast<Eigen::Index>(n) * d, d);
    weighted(rows, Eigen::all) = state_weight[n] * (mass * response(rows, Eigen::all));
    weighted_offset(rows) = state_weight[n] * (mass * offset(rows));
  }
  Eigen::MatrixXd hessian = response.transpose() * weighted;
  for (std::size_t n = 0; n < steps; ++n) {
    const auto block = Eigen::seqN(static_cast<Eigen::Index>(n) * d, d);
    hessian(block, block) += control_block * mass;
  }
  hessian = 0.5 * (hessian + hessian.transpose()).eval();
  const Eigen::VectorXd rhs = -response.transpose() * weighted_offset;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
  if (ldlt.info() != Eigen::Success) throw DomainError("optimality system is singular");
  const Eigen::VectorXd x = ldlt.solve(rhs);

  Trajectory control = Trajectory::zeros(problem.grid, problem.dofs());
  for (std::size_t n = 1; n <= steps; ++n) control.set_row(n, x.segment(static_cast<Eigen::Index>(n - 1) * d, d));
  Trajectory state = solver.solve(control).first;
  return OptimalPair{std::move(control), std::move(state)};
}

OptimalityResiduals optimality_residual(const Problem& problem, const OptimalPair& pair) {
  require_conforming(problem, pair.control, "control");
  require_conforming(problem, pair.state, "state");
  OptimalityResiduals out;
  const std::size_t steps = problem.grid.steps();

  auto image = [&]() {
    if (problem.config.solver == SolverKind::Mild) {
      const MildSolver mild(problem);
      Trajectory out = mild.apply_K(mild.apply_N(pair.state));
      out.values += mild.apply_H(pair.control).values + mild.free_response().values;
      return out;
    }
    const StepSolver solver(problem);
    Trajectory forcing = Trajectory::zeros(problem.grid, problem.dofs());
    for (std::size_t n = 1; n <= steps; ++n) {
      forcing.set_row(n, problem.apply_control_map(pair.control.row(n)) +
                             solver.remainder(problem.grid.time(n), pair.state.row(n)));
    }
    return solver.solve_forced(forcing, problem.initial_state);
  };
  const Trajectory fixed_point = image();
  out.state = max_l2_deviation(problem, pair.state, fixed_point);
  out.control = control_norm(problem, gradient_adjoint(problem, pair.control));
  return out;
}

MonotonicityReport check_monotonicity(const Nonlinearity& f, std::size_t samples, double lo, double hi,
                                      std::uint64_t seed) {
  if (samples < 100) throw DomainError(fmt::format("monotonicity check needs at least 100 samples, got {}", samples));
  if (!(lo < hi)) throw DomainError("monotonicity box is empty");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> draw(lo, hi);
  MonotonicityReport report;
  report.mu = std::numeric_limits<double>::infinity();
  report.max_ratio = -std::numeric_limits<double>::infinity();
  std::size_t taken = 0;
  while (taken < samples) {
    const double x = draw(rng);
    const double y = draw(rng);
    if (std::abs(x - y) < 1e-9 * (hi - lo)) continue;
    const double ratio = (f.value(0.0, x) - f.value(0.0, y)) / (x - y);
    report.mu = std::min(report.mu, ratio);
    report.max_ratio = std::max(report.max_ratio, ratio);
    ++taken;
  }
  report.pass = report.max_ratio <= 0.0;
  return report;
}

AdjointOdeReport adjoint_ode_check(const Problem& problem) {
  std::vector<std::string> problems;
  if (!problem.alpha().classical()) problems.push_back("adjoint ODE check needs alpha = 1");
  if (!problem.config.nonlinearity.is_linear()) problems.push_back("adjoint ODE check needs linear f");
  if (problem.config.cost.kind != CostKind::QuadraticIntegral) problems.push_back("adjoint ODE check needs quadratic_integral");
  if (!problem.identity_map) problems.push_back("adjoint ODE check needs B = I");
  if (!problem.config.nonlocal.empty()) problems.push_back("adjoint ODE check needs an initial-value problem");
  if (!problems.empty()) throw ConfigError(problems);

  // Per mode, with a = lambda - kappa and c = W0 / (eps R0), the optimality
  // system is x' = -a x + v, v' = a v + c x, x(0) = x0, v(T) = 0. Writing
  // v = S x gives a scalar Riccati equation with the closed form
  //   x(t) = x0 w(T - t) / w(T),  w(s) = mu cosh(mu s) + a sinh(mu s),
  //   S(t) = -c tanh(mu (T - t)) / (mu + a tanh(mu (T - t))),  mu^2 = a^2 + c.
  // Every factor is evaluated scaled by exp(-mu s) so that stiff modes do not overflow.
  const auto& cost = problem.config.cost;
  const double kappa = *problem.config.nonlinearity.linear_coefficient();
  const double c = cost.w0_scale / (cost.epsilon * cost.r0_scale);
  const double final_time = problem.grid.final_time();
  const ModalBasis basis = generalized_eigs(problem.stiffness, problem.mass);
  const Eigen::VectorXd x0 = to_modal(basis, problem.mass, problem.initial_state);

  auto scaled_w = [](double mu, double a, double s) {
    const double e = std::exp(-2.0 * mu * s);
    return mu * (1.0 + e) + a * (1.0 - e);
  };
  Trajectory ode_state = Trajectory::zeros(problem.grid, problem.dofs());
  Trajectory ode_control = Trajectory::zeros(problem.grid, problem.dofs());
  for (std::size_t n = 0; n <= problem.grid.steps(); ++n) {
    const double t = problem.grid.time(n);
    const double to_go = final_time - t;
    Eigen::VectorXd x(x0.size());
    Eigen::VectorXd v(x0.size());
    for (Eigen::Index k = 0; k < x0.size(); ++k) {
      const double a = basis.eigenvalues(k) - kappa;
      const double mu = std::sqrt(a * a + c);
      x(k) = x0(k) * std::exp(-mu * t) * scaled_w(mu, a, to_go) / scaled_w(mu, a, final_time);
      const double th = std::tanh(mu * to_go);
      v(k) = -c * th / (mu + a * th) * x(k);
    }
    ode_state.set_row(n, to_nodal(basis, x));
    if (n > 0) ode_control.set_row(n, to_nodal(basis, v));
  }

  Problem classical = problem;
  classical.config.solver = SolverKind::L1;
  AdjointOdeReport report{0.0, OptimalPair{std::move(ode_control), std::move(ode_state)},
                          cg_minimize(classical, Trajectory::zeros(problem.grid, problem.dofs())).first};
  report.deviation = std::max(max_l2_deviation(problem, report.ode_pair.state, report.cg_pair.state),
                              max_l2_deviation(problem, report.ode_pair.control, report.cg_pair.control));
  return report;
}

}  // namespace fracctl
