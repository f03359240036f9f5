#include "fracctl/stepsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

MemoryKernel MemoryKernel::build(TimeScheme scheme, FractionalOrder alpha, double dt, std::size_t steps) {
  if (!(dt > 0.0)) throw DomainError(fmt::format("time step must be positive, got {}", dt));
  if (steps < 1) throw DomainError("memory kernel needs at least one step");
  const double a = alpha.value();
  MemoryKernel kernel;
  kernel.history.assign(steps + 1, 0.0);
  kernel.initial.assign(steps + 1, 0.0);

  if (scheme == TimeScheme::L1) {
    const double c = 1.0 / (std::tgamma(2.0 - a) * std::pow(dt, a));
    std::vector<double> b(steps, 0.0);
    if (alpha.classical()) {
      b[0] = 1.0;
    } else {
      b = l1_weights(alpha, steps).values;
    }
    kernel.lead = c * b[0];
    for (std::size_t k = 1; k < steps; ++k) kernel.history[k] = -c * (b[k - 1] - b[k]);
    for (std::size_t n = 1; n <= steps; ++n) kernel.initial[n] = -c * b[n - 1];
  } else {
    const double scale = std::pow(dt, -a);
    const auto w = gl_weights(alpha, steps).values;
    kernel.lead = scale * w[0];
    for (std::size_t k = 1; k <= steps; ++k) kernel.history[k] = scale * w[k];
    double partial = 0.0;
    for (std::size_t n = 1; n <= steps; ++n) {
      partial += w[n - 1];
      kernel.initial[n] = -scale * partial;
    }
  }
  return kernel;
}

namespace {

TimeScheme scheme_for(const Problem& problem) {
  return problem.config.solver == SolverKind::GL ? TimeScheme::GrunwaldLetnikov : TimeScheme::L1;
}

}  // namespace

StepSolver::StepSolver(const Problem& problem) : StepSolver(problem, scheme_for(problem)) {}

StepSolver::StepSolver(const Problem& problem, TimeScheme scheme)
    : problem_(&problem),
      scheme_(scheme),
      kernel_(MemoryKernel::build(scheme, problem.alpha(), problem.grid.dt(), problem.grid.steps())) {
  const auto linear = problem.config.nonlinearity.linear_coefficient();
  kappa_ = linear.value_or(0.0);
  has_remainder_ = !linear.has_value();
  step_matrix_ = (kernel_.lead - kappa_) * problem.mass.entries + problem.stiffness.entries;
  factor_.compute(step_matrix_);
  if (factor_.info() != Eigen::Success) {
    throw DomainError("step matrix is not positive definite (linear growth rate too large for this time step)");
  }
}

Eigen::VectorXd StepSolver::remainder(double t, const Eigen::VectorXd& u) const {
  if (!has_remainder_) return Eigen::VectorXd::Zero(u.size());
  return problem_->config.nonlinearity.apply(t, u) - kappa_ * u;
}

template <typename Load>
Trajectory StepSolver::march(const Eigen::VectorXd& u0, Load&& load, bool with_remainder) const {
  const Problem& p = *problem_;
  const std::size_t steps = p.grid.steps();
  const auto& mass = p.mass.entries;
  const double tol = p.config.tol.step_tol;

  Trajectory u = Trajectory::zeros(p.grid, p.dofs());
  u.set_row(0, u0);
  Eigen::VectorXd memory(u0.size());
  for (std::size_t n = 1; n <= steps; ++n) {
    memory = kernel_.initial[n] * u0;
    for (std::size_t k = 1; k < n; ++k) {
      memory.noalias() += kernel_.history[k] * u.values.row(static_cast<Eigen::Index>(n - k)).transpose();
    }
    const Eigen::VectorXd base = load(n) - memory;
    Eigen::VectorXd next;
    if (!with_remainder || !has_remainder_) {
      next = factor_.solve(mass * base);
    } else {
      const double t = p.grid.time(n);
      next = u.row(n - 1);
      double previous_increment = std::numeric_limits<double>::infinity();
      double ratio = 0.0;
      bool converged = false;
      for (std::size_t sweep = 0; sweep < p.config.tol.max_step_sweeps; ++sweep) {
        Eigen::VectorXd trial = factor_.solve(mass * (base + remainder(t, next)));
        const double increment = (trial - next).lpNorm<Eigen::Infinity>();
        next = std::move(trial);
        if (std::isfinite(previous_increment) && previous_increment > 0.0) ratio = increment / previous_increment;
        previous_increment = increment;
        if (increment <= tol * std::max(1.0, next.lpNorm<Eigen::Infinity>())) {
          converged = true;
          break;
        }
      }
      if (!converged) {
        throw ConvergenceError(fmt::format("Picard sweeps did not converge at step {} (last increment {:.3e})", n,
                                           previous_increment),
                               ratio);
      }
    }
    if (!next.allFinite()) {
      throw ConvergenceError(fmt::format("non-finite state at step {}", n), std::numeric_limits<double>::quiet_NaN());
    }
    u.set_row(n, next);
  }
  return u;
}

template <typename Load>
std::pair<Trajectory, FixedPointReport> StepSolver::nonlocal_march(Load&& load, bool with_remainder) const {
  const Problem& p = *problem_;
  FixedPointReport report;
  Eigen::VectorXd u0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dofs()));
  const auto& pairs = p.config.nonlocal.pairs;

  for (std::size_t it = 0; it < p.config.tol.max_outer; ++it) {
    const Trajectory u = march(u0, load, with_remainder);
    Eigen::VectorXd next = Eigen::VectorXd::Zero(u0.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) next += pairs[k].weight * u.row(p.nonlocal_index[k]);
    const double increment = l2_inner(p.mesh, next - u0, next - u0);
    const double norm = std::sqrt(std::max(0.0, increment));
    if (!report.increments.empty() && report.increments.back() > 0.0) {
      report.ratios.push_back(norm / report.increments.back());
    }
    report.increments.push_back(norm);
    report.iterations = it + 1;
    u0 = std::move(next);
    if (norm <= p.config.tol.nonlocal_tol) {
      report.converged = true;
      return {march(u0, load, with_remainder), std::move(report)};
    }
  }
  throw ConvergenceError(fmt::format("nonlocal fixed point did not converge in {} iterations (last increment {:.3e})",
                                     report.iterations, report.increments.back()),
                         report.last_ratio());
}

Trajectory StepSolver::solve_initial(const Trajectory& control, const Eigen::VectorXd& u0) const {
  const Problem& p = *problem_;
  if (control.values.rows() != static_cast<Eigen::Index>(p.grid.steps() + 1) ||
      control.dofs() != p.dofs() || static_cast<std::size_t>(u0.size()) != p.dofs()) {
    throw DomainError("control or initial state does not match the discretization");
  }
  return march(u0, [&](std::size_t n) { return p.apply_control_map(control.row(n)); }, true);
}

std::pair<Trajectory, FixedPointReport> StepSolver::solve(const Trajectory& control) const {
  const Problem& p = *problem_;
  if (p.config.nonlocal.empty()) {
    FixedPointReport report;
    report.iterations = 1;
    report.converged = true;
    return {solve_initial(control, p.initial_state), std::move(report)};
  }
  if (control.values.rows() != static_cast<Eigen::Index>(p.grid.steps() + 1) || control.dofs() != p.dofs()) {
    throw DomainError("control does not match the discretization");
  }
  return nonlocal_march([&](std::size_t n) { return p.apply_control_map(control.row(n)); }, true);
}

Trajectory StepSolver::solve_homogeneous(const Trajectory& control) const {
  const Problem& p = *problem_;
  if (p.config.nonlocal.empty()) return solve_initial(control, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.dofs())));
  return solve(control).first;
}

Trajectory StepSolver::solve_forced(const Trajectory& forcing, const Eigen::VectorXd& u0) const {
  const Problem& p = *problem_;
  auto load = [&](std::size_t n) { return forcing.row(n); };
  if (p.config.nonlocal.empty()) return march(u0, load, false);
  return nonlocal_march(load, false).first;
}

Trajectory StepSolver::adjoint(const Trajectory& state, const Trajectory& load) const {
  const Problem& p = *problem_;
  const std::size_t steps = p.grid.steps();
  const auto d = static_cast<Eigen::Index>(p.dofs());
  const auto& mass = p.mass.entries;
  const auto& pairs = p.config.nonlocal.pairs;

  // Transposed step Jacobians A - diag(r'(u^n)) M, one per step when the
  // remainder is nonlinear.
  std::vector<Eigen::PartialPivLU<Eigen::MatrixXd>> jacobians;
  if (has_remainder_) {
    jacobians.reserve(steps + 1);
    jacobians.emplace_back();
    for (std::size_t n = 1; n <= steps; ++n) {
      Eigen::VectorXd slope = problem_->config.nonlinearity.jacobian_diagonal(p.grid.time(n), state.row(n));
      slope.array() -= kappa_;
      jacobians.emplace_back(Eigen::MatrixXd(step_matrix_ - slope.asDiagonal() * mass));
    }
  }

  Trajectory adj = Trajectory::zeros(p.grid, p.dofs());
  auto sweep = [&](const Eigen::VectorXd& coupling) {
    Eigen::VectorXd memory(d);
    for (std::size_t n = steps; n >= 1; --n) {
      memory.setZero();
      for (std::size_t m = n + 1; m <= steps; ++m) {
        memory.noalias() += kernel_.history[m - n] * adj.values.row(static_cast<Eigen::Index>(m)).transpose();
      }
      Eigen::VectorXd rhs = load.row(n) - mass * memory;
      for (std::size_t k = 0; k < pairs.size(); ++k) {
        if (p.nonlocal_index[k] == n) rhs += pairs[k].weight * coupling;
      }
      adj.set_row(n, has_remainder_ ? Eigen::VectorXd(jacobians[n].solve(rhs)) : Eigen::VectorXd(factor_.solve(rhs)));
    }
  };

  if (pairs.empty()) {
    sweep(Eigen::VectorXd::Zero(d));
    return adj;
  }

  // Multiplier of the constraint u^0 = sum c_k u^{t_k}:
  // q = dJ/du^0 - M sum_n initial[n] p^n, solved by fixed point.
  Eigen::VectorXd coupling = load.row(0);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t it = 0; it < p.config.tol.max_outer; ++it) {
    sweep(coupling);
    Eigen::VectorXd memory = Eigen::VectorXd::Zero(d);
    for (std::size_t n = 1; n <= steps; ++n) memory += kernel_.initial[n] * adj.row(n);
    Eigen::VectorXd next = load.row(0) - mass * memory;
    const double increment = (next - coupling).norm();
    coupling = std::move(next);
    if (increment <= p.config.tol.nonlocal_tol * std::max(1.0, coupling.norm())) {
      sweep(coupling);
      return adj;
    }
    previous = increment;
  }
  throw ConvergenceError("adjoint nonlocal coupling did not converge", previous);
}

Trajectory solve_state_l1(const Problem& problem, const Trajectory& control, const Eigen::VectorXd& u0) {
  return StepSolver(problem, TimeScheme::L1).solve_initial(control, u0);
}

std::pair<Trajectory, FixedPointReport> solve_state_nonlocal(const Problem& problem, const Trajectory& control) {
  return StepSolver(problem, TimeScheme::L1).solve(control);
}

Trajectory solve_state_classical(const Problem& problem, const Trajectory& control, const Eigen::VectorXd& u0) {
  if (!problem.alpha().classical()) {
    throw DomainError(fmt::format("classical solve needs alpha = 1, got {}", problem.alpha().value()));
  }
  return solve_state_l1(problem, control, u0);
}

}  // namespace fracctl
