#include "fracctl/mildsolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

double solution_multiplier(FractionalOrder alpha, double lambda, double t) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("solution operator needs t >= 0, got {}", t));
  if (t == 0.0) return 1.0;
  const double a = alpha.value();
  return ml_eval(a, 1.0, -lambda * std::pow(t, a));
}

double resolvent_multiplier(FractionalOrder alpha, double lambda, double t) {
  if (!(t > 0.0)) throw DomainError(fmt::format("resolvent needs t > 0, got {}", t));
  const double a = alpha.value();
  const double ta = std::pow(t, a);
  return ta / t * ml_eval(a, a, -lambda * ta);
}

double integrated_multiplier(FractionalOrder alpha, double lambda, double t) {
  if (!(t >= 0.0)) throw DomainError(fmt::format("integrated resolvent needs t >= 0, got {}", t));
  if (t == 0.0) return 0.0;
  const double a = alpha.value();
  const double ta = std::pow(t, a);
  return ta * ml_eval(a, a + 1.0, -lambda * ta);
}

Eigen::VectorXd solution_op_apply(FractionalOrder alpha, const Eigen::VectorXd& eigenvalues, double t,
                                  const Eigen::VectorXd& coefficients) {
  if (eigenvalues.size() != coefficients.size()) throw DomainError("solution_op_apply: size mismatch");
  if (!(t >= 0.0)) throw DomainError(fmt::format("solution operator needs t >= 0, got {}", t));
  if (t == 0.0) return coefficients;
  Eigen::VectorXd out(coefficients.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = solution_multiplier(alpha, eigenvalues(k), t) * coefficients(k);
  return out;
}

Eigen::VectorXd resolvent_op_apply(FractionalOrder alpha, const Eigen::VectorXd& eigenvalues, double t,
                                   const Eigen::VectorXd& coefficients) {
  if (eigenvalues.size() != coefficients.size()) throw DomainError("resolvent_op_apply: size mismatch");
  Eigen::VectorXd out(coefficients.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = resolvent_multiplier(alpha, eigenvalues(k), t) * coefficients(k);
  return out;
}

ModalMultipliers::ModalMultipliers(FractionalOrder alpha, const Eigen::VectorXd& eigenvalues, const TimeGrid& grid) {
  const auto rows = static_cast<Eigen::Index>(grid.steps() + 1);
  solution_.resize(rows, eigenvalues.size());
  integrated_.resize(rows, eigenvalues.size());
  for (Eigen::Index n = 0; n < rows; ++n) {
    const double t = grid.time(static_cast<std::size_t>(n));
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
      solution_(n, k) = solution_multiplier(alpha, eigenvalues(k), t);
      integrated_(n, k) = integrated_multiplier(alpha, eigenvalues(k), t);
    }
  }
}

Eigen::VectorXd nonlocal_operator(const NonlocalSpec& spec, const Eigen::VectorXd& eigenvalues, FractionalOrder alpha) {
  const H1Report h1 = validate_h1(spec);
  if (!h1.pass) {
    throw ConfigError(fmt::format("nonlocal weights violate sum |c_k| < 1: sum = {}, margin = {}", h1.weight_sum,
                                  h1.margin));
  }
  Eigen::VectorXd out(eigenvalues.size());
  for (Eigen::Index k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (const auto& pair : spec.pairs) sum += pair.weight * solution_multiplier(alpha, eigenvalues(k), pair.time);
    out(k) = 1.0 / (1.0 - sum);
  }
  return out;
}

namespace {

ModalBasis modal_basis_of(const Problem& problem) { return generalized_eigs(problem.stiffness, problem.mass); }

}  // namespace

MildSolver::MildSolver(const Problem& problem, MildOptions options)
    : problem_(&problem),
      options_(options),
      kappa_(options.absorb_linear ? problem.config.nonlinearity.linear_coefficient().value_or(0.0) : 0.0),
      basis_(modal_basis_of(problem)),
      rates_(basis_.eigenvalues.array() - kappa_),
      multipliers_(problem.alpha(), rates_, problem.grid) {
  NonlocalSpec snapped;
  for (std::size_t k = 0; k < problem.config.nonlocal.pairs.size(); ++k) {
    snapped.pairs.push_back({problem.config.nonlocal.pairs[k].weight, problem.grid.time(problem.nonlocal_index[k])});
  }
  nonlocal_ = nonlocal_operator(snapped, rates_, problem.alpha());
}

Eigen::VectorXd MildSolver::to_modal(const Eigen::VectorXd& nodal) const {
  return fracctl::to_modal(basis_, problem_->mass, nodal);
}

Eigen::VectorXd MildSolver::to_nodal(const Eigen::VectorXd& modal) const { return fracctl::to_nodal(basis_, modal); }

Eigen::VectorXd MildSolver::convolve_resolvent(std::size_t n, const Trajectory& modal_forcing) const {
  if (n > problem_->grid.steps()) throw DomainError(fmt::format("time index {} beyond the grid", n));
  if (modal_forcing.grid != problem_->grid) throw DomainError("forcing slabs are not aligned with the grid");
  const auto& g = multipliers_.integrated_table();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(rates_.size());
  for (std::size_t j = 1; j <= n; ++j) {
    const auto far = static_cast<Eigen::Index>(n - j + 1);
    out.array() += modal_forcing.values.row(static_cast<Eigen::Index>(j)).transpose().array() *
                   (g.row(far) - g.row(far - 1)).transpose().array();
  }
  return out;
}

Trajectory MildSolver::modal_convolution(const Trajectory& modal_forcing) const {
  const std::size_t steps = problem_->grid.steps();
  const auto& g = multipliers_.integrated_table();
  TrajectoryValues slab(g.rows(), g.cols());
  slab.row(0).setZero();
  for (Eigen::Index m = 1; m < g.rows(); ++m) slab.row(m) = g.row(m) - g.row(m - 1);

  Trajectory out = Trajectory::zeros(problem_->grid, static_cast<std::size_t>(rates_.size()));
  for (std::size_t n = 1; n <= steps; ++n) {
    auto row = out.values.row(static_cast<Eigen::Index>(n));
    for (std::size_t j = 1; j <= n; ++j) {
      row.array() += modal_forcing.values.row(static_cast<Eigen::Index>(j)).array() *
                     slab.row(static_cast<Eigen::Index>(n - j + 1)).array();
    }
  }
  return out;
}

Eigen::VectorXd MildSolver::green_apply(std::size_t n, const Trajectory& forcing) const {
  if (forcing.grid != problem_->grid || forcing.dofs() != problem_->dofs()) {
    throw DomainError("forcing does not match the discretization");
  }
  Trajectory modal = Trajectory::zeros(problem_->grid, problem_->dofs());
  for (std::size_t j = 1; j <= problem_->grid.steps(); ++j) modal.set_row(j, to_modal(forcing.row(j)));

  Eigen::VectorXd out = convolve_resolvent(n, modal);
  const auto& pairs = problem_->config.nonlocal.pairs;
  if (!pairs.empty()) {
    Eigen::VectorXd memory = Eigen::VectorXd::Zero(out.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      memory += pairs[k].weight * convolve_resolvent(problem_->nonlocal_index[k], modal);
    }
    out.array() += multipliers_.solution(n).array() * nonlocal_.array() * memory.array();
  }
  return to_nodal(out);
}

Trajectory MildSolver::apply_K(const Trajectory& forcing) const {
  const Problem& p = *problem_;
  if (forcing.grid != p.grid || forcing.dofs() != p.dofs()) throw DomainError("forcing does not match the discretization");
  const std::size_t steps = p.grid.steps();

  Trajectory modal = Trajectory::zeros(p.grid, p.dofs());
  for (std::size_t j = 1; j <= steps; ++j) modal.set_row(j, to_modal(forcing.row(j)));
  Trajectory conv = modal_convolution(modal);

  const auto& pairs = p.config.nonlocal.pairs;
  if (!pairs.empty()) {
    Eigen::VectorXd memory = Eigen::VectorXd::Zero(rates_.size());
    for (std::size_t k = 0; k < pairs.size(); ++k) memory += pairs[k].weight * conv.row(p.nonlocal_index[k]);
    memory.array() *= nonlocal_.array();
    for (std::size_t n = 0; n <= steps; ++n) {
      conv.values.row(static_cast<Eigen::Index>(n)).array() +=
          multipliers_.solution_table().row(static_cast<Eigen::Index>(n)).array() * memory.transpose().array();
    }
  }
  Trajectory out = Trajectory::zeros(p.grid, p.dofs());
  out.values = conv.values * basis_.modes.transpose();
  return out;
}

Trajectory MildSolver::apply_H(const Trajectory& control) const {
  Trajectory mapped = control;
  for (std::size_t n = 0; n <= problem_->grid.steps(); ++n) {
    mapped.set_row(n, problem_->apply_control_map(control.row(n)));
  }
  return apply_K(mapped);
}

Trajectory MildSolver::apply_N(const Trajectory& state) const {
  const auto& f = problem_->config.nonlinearity;
  Trajectory out = Trajectory::zeros(state.grid, state.dofs());
  for (std::size_t n = 0; n <= state.grid.steps(); ++n) {
    const Eigen::VectorXd u = state.row(n);
    out.set_row(n, f.apply(state.grid.time(n), u) - kappa_ * u);
  }
  return out;
}

Trajectory MildSolver::free_response() const {
  const Problem& p = *problem_;
  Trajectory out = Trajectory::zeros(p.grid, p.dofs());
  if (!p.config.nonlocal.empty()) return out;
  const Eigen::VectorXd initial = to_modal(p.initial_state);
  for (std::size_t n = 0; n <= p.grid.steps(); ++n) {
    out.set_row(n, to_nodal((multipliers_.solution(n).array() * initial.array()).matrix()));
  }
  return out;
}

std::pair<Trajectory, HammersteinReport> MildSolver::hammerstein_solve(const Trajectory& control, double tol,
                                                                       std::size_t max_iter) const {
  if (!(tol > 0.0)) throw DomainError(fmt::format("Hammerstein tolerance must be positive, got {}", tol));
  const Problem& p = *problem_;
  Trajectory affine = apply_H(control);
  affine.values += free_response().values;

  HammersteinReport report;
  Trajectory u = affine;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Trajectory next = apply_K(apply_N(u));
    next.values += affine.values;
    double increment = 0.0;
    for (std::size_t n = 0; n <= p.grid.steps(); ++n) {
      const Eigen::VectorXd diff = next.row(n) - u.row(n);
      increment = std::max(increment, std::sqrt(std::max(0.0, l2_inner(p.mesh, diff, diff))));
    }
    if (!report.increments.empty() && report.increments.back() > 0.0) {
      report.last_ratio = increment / report.increments.back();
    }
    report.increments.push_back(increment);
    report.iterations = it + 1;
    u = std::move(next);
    if (!u.finite()) throw ConvergenceError("Hammerstein iteration produced non-finite values", report.last_ratio);
    if (increment <= tol) return {std::move(u), std::move(report)};
  }
  throw ConvergenceError(fmt::format("Hammerstein iteration did not converge in {} iterations (last increment {:.3e})",
                                     max_iter, report.increments.back()),
                         report.last_ratio);
}

Trajectory MildSolver::solve(const Trajectory& control) const {
  return hammerstein_solve(control, problem_->config.tol.hammerstein_tol, problem_->config.tol.hammerstein_max_iter)
      .first;
}

}  // namespace fracctl
