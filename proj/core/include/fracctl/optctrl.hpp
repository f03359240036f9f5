#pragma once

// Discrete optimal control: cost functionals, discrete-adjoint gradients,
// Fletcher-Reeves conjugate gradients with penalty continuation, a dense KKT
// solve for linear dynamics and optimality diagnostics.
//
// Controls live in the space of rows 1..N of a Trajectory (row n acts on the
// slab (t_{n-1}, t_n]; row 0 is held at zero) with inner product
//   <a, b>_Q = sum_{n=1}^N dt a_n^T M b_n.
// Gradients are Riesz representatives in that inner product.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fracctl/nonlinearity.hpp"
#include "fracctl/problem.hpp"
#include "fracctl/stepsolve.hpp"
#include "fracctl/trajectory.hpp"

namespace fracctl {

/// quadratic_integral:
///   scale [ sum_{n=0}^{N-1} dt W0 <u^n, u^n>_M + sum_{n=1}^{N} dt eps R0 <v^n, v^n>_M ]
/// final_tracking:
///   scale [ 1/2 <u^N - g, u^N - g>_M + eps/2 sum_{n=1}^{N} dt <v^n, v^n>_M ]
double cost_evaluate(const Problem& problem, const Trajectory& state, const Trajectory& control);

/// Quadratic part of the cost (target taken as zero); equals the exact second
/// order coefficient of the cost along a direction when the dynamics are linear
/// and `state` is the homogeneous response to `control`.
double cost_quadratic_part(const Problem& problem, const Trajectory& state, const Trajectory& control);

/// Tracking error 1/2 <u^N - g, u^N - g>_M.
double final_tracking_error(const Problem& problem, const Trajectory& state);

double control_inner(const Problem& problem, const Trajectory& a, const Trajectory& b);
double control_norm(const Problem& problem, const Trajectory& a);

/// Gradient of cost_evaluate(solve(control)) by the discrete adjoint of the
/// configured time-stepping scheme. Requires solver l1 or gl.
Trajectory gradient_adjoint(const Problem& problem, const Trajectory& control);

/// Raw partial derivatives dJ/dv^n_i by central differences (rows 1..N).
Trajectory gradient_fd_partials(const Problem& problem, const Trajectory& control, double h_fd);
/// Riesz gradient from central differences: (dt M)^{-1} applied to the partials.
Trajectory gradient_fd(const Problem& problem, const Trajectory& control, double h_fd);
/// dt M g per row: maps a Riesz gradient to raw partials.
Trajectory riesz_to_partials(const Problem& problem, const Trajectory& gradient);

/// Smooth objective over a flat vector, as seen by the minimizer.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t size() const = 0;
  virtual double value(const Eigen::VectorXd& x) = 0;
  /// Riesz gradient with respect to inner().
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) = 0;
  virtual double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const = 0;
  /// Q(d) such that value(x + s d) = value(x) + s <g, d> + s^2 Q(d) exactly,
  /// when the objective is quadratic; empty otherwise.
  virtual std::optional<double> curvature(const Eigen::VectorXd& direction) = 0;
  /// Control penalty weight, adjusted by continuation.
  virtual double penalty() const { return 0.0; }
  virtual void set_penalty(double /*epsilon*/) {}
};

/// The discrete control problem as an Objective over rows 1..N of the control.
/// Holds a reference to the Problem, which must outlive it.
class ControlObjective : public Objective {
 public:
  explicit ControlObjective(const Problem& problem);

  std::size_t size() const override;
  double value(const Eigen::VectorXd& x) override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) override;
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const override;
  std::optional<double> curvature(const Eigen::VectorXd& direction) override;
  double penalty() const override { return problem_.config.cost.epsilon; }
  void set_penalty(double epsilon) override;

  Eigen::VectorXd flatten(const Trajectory& control) const;
  Trajectory unflatten(const Eigen::VectorXd& x) const;
  const Problem& problem() const noexcept { return problem_; }
  Trajectory state(const Trajectory& control) const;

 private:
  Problem problem_;
  StepSolver solver_;
};

struct LineSearchResult {
  double step = 0.0;
  double value = 0.0;
  std::size_t evaluations = 0;
};

/// Quadratic objectives: exact minimizer -<g, d> / (2 Q(d)). Otherwise the
/// vertex of the parabola through value(x), the slope and value(x + trial d),
/// followed by Armijo backtracking (c = 1e-4, factor 0.5, at most 30 halvings).
/// Throws DomainError for a non-descent direction.
LineSearchResult line_search(Objective& objective, const Eigen::VectorXd& x, const Eigen::VectorXd& direction,
                             const Eigen::VectorXd& gradient, double value_at_x, double trial = 1.0);

enum class StopReason { InnerTol, OuterTol, MaxIter };
std::string to_string(StopReason reason);

struct CgOptions {
  double eps1 = 1e-8;   ///< inner stop on ||x_{i+1} - x_i||
  double eps2 = 1e-8;   ///< outer stop on the change over one penalty cycle
  double delta = 0.0;   ///< penalty increment per outer cycle
  std::size_t max_iter = 500;
  std::size_t max_outer = 200;
};

struct OptimizeReport {
  std::size_t iterations = 0;
  std::size_t outer_cycles = 0;
  std::vector<double> cost_history;       ///< entry 0 is the initial cost
  std::vector<double> grad_norm_history;  ///< same indexing
  std::vector<double> step_sizes;         ///< one per accepted iteration
  std::vector<double> epsilon_schedule;   ///< penalty in force at each cost entry
  StopReason stop_reason = StopReason::MaxIter;
  double residual_state = 0.0;
  double residual_control = 0.0;
};

struct CgResult {
  Eigen::VectorXd minimizer;
  OptimizeReport report;
};

/// Fletcher-Reeves conjugate gradients with a restart every size() iterations
/// and the penalty schedule eps <- eps + delta between cycles. Each cycle
/// starts from the steepest-descent direction. Throws ConvergenceError when
/// the cost increases within a cycle or a line search fails after a restart.
CgResult cg_minimize(Objective& objective, const Eigen::VectorXd& x0, const CgOptions& options);

struct OptimalPair {
  Trajectory control;
  Trajectory state;
};

/// Runs cg_minimize on the control problem from `control0` with the configured
/// tolerances, then fills the optimality residuals.
std::pair<OptimalPair, OptimizeReport> cg_minimize(const Problem& problem, const Trajectory& control0);

/// Dense solve of the optimality system for linear dynamics. Builds the
/// control-to-state matrix column by column from forward solves.
OptimalPair kkt_direct_solve(const Problem& problem);

struct OptimalityResiduals {
  double state = 0.0;    ///< max_n || x^n - (solution of the scheme forced by B v + r(x)) ||
  double control = 0.0;  ///< || gradient ||_Q
};

OptimalityResiduals optimality_residual(const Problem& problem, const OptimalPair& pair);

struct MonotonicityReport {
  double mu = 0.0;       ///< min over samples of (f(x) - f(y)) / (x - y)
  double max_ratio = 0.0;
  bool pass = true;      ///< max_ratio <= 0
};

/// Samples pairs uniformly in [lo, hi]^2 with a seeded generator.
MonotonicityReport check_monotonicity(const Nonlinearity& f, std::size_t samples, double lo, double hi,
                                      std::uint64_t seed = 1);

struct AdjointOdeReport {
  double deviation = 0.0;  ///< max over grid of the L2 difference of state and control
  /// Exact-in-time solution sampled on the grid.
  OptimalPair ode_pair;
  OptimalPair cg_pair;
};

/// alpha = 1 cross-check: solves the classical forward-backward optimality
/// system for the integral cost with weights rho = eps R0, omega = W0,
///   M x' = -K x + kappa M x + M u,            x(0) = x0,
///   M u' =  K u - kappa M u + (omega / rho) M x, u(T) = 0,
/// exactly in time (modal closed form on the spatial mesh), samples it on the
/// grid and compares with cg_minimize. Control row 0 is not compared.
/// Requires alpha = 1, linear f, quadratic_integral, B = I, no nonlocal pairs.
AdjointOdeReport adjoint_ode_check(const Problem& problem);

}  // namespace fracctl
