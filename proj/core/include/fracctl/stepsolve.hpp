#pragma once

// Fully discrete state solver: P1 in space, L1 (default) or Grunwald-Letnikov
// in time, with the nonlocal initial condition resolved by an outer fixed
// point. At alpha = 1 both schemes reduce to backward Euler.

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "fracctl/problem.hpp"
#include "fracctl/trajectory.hpp"

namespace fracctl {

enum class TimeScheme { L1, GrunwaldLetnikov };

/// Discrete Caputo derivative written as a memory sum:
///   D u^n = lead u^n + sum_{k=1}^{n-1} history[k] u^{n-k} + initial[n] u^0.
///
/// L1 with c = 1 / (Gamma(2 - alpha) dt^alpha) and weights b_j:
///   lead = c b_0, history[k] = -c (b_{k-1} - b_k), initial[n] = -c b_{n-1}.
/// Grunwald-Letnikov applied to u - u^0 with weights w_j:
///   lead = dt^-alpha, history[k] = dt^-alpha w_k, initial[n] = -dt^-alpha sum_{j<n} w_j.
struct MemoryKernel {
  double lead = 0.0;
  std::vector<double> history;  ///< index 0 unused
  std::vector<double> initial;  ///< index 0 unused

  static MemoryKernel build(TimeScheme scheme, FractionalOrder alpha, double dt, std::size_t steps);
};

struct FixedPointReport {
  std::size_t iterations = 0;
  std::vector<double> increments;  ///< L2 norm of successive u^0 updates
  std::vector<double> ratios;      ///< increments[i] / increments[i - 1]
  bool converged = false;

  double last_ratio() const noexcept { return ratios.empty() ? 0.0 : ratios.back(); }
};

/// Solves
///   (lead M + K - kappa M) u^n = M (B v^n + r(t_n, u^n)) - M (sum_k history[k] u^{n-k} + initial[n] u^0)
/// for n = 1..N, where kappa is the linear part of f and r = f - kappa u is
/// resolved by per-step Picard sweeps. Control row n acts on the slab
/// (t_{n-1}, t_n]; row 0 is ignored.
///
/// Holds a reference to the Problem, which must outlive the solver.
class StepSolver {
 public:
  explicit StepSolver(const Problem& problem);
  StepSolver(const Problem& problem, TimeScheme scheme);

  const Problem& problem() const noexcept { return *problem_; }
  const MemoryKernel& kernel() const noexcept { return kernel_; }
  TimeScheme scheme() const noexcept { return scheme_; }

  /// Initial-value solve from the given u^0.
  Trajectory solve_initial(const Trajectory& control, const Eigen::VectorXd& u0) const;

  /// Nonlocal solve when the problem has nonlocal pairs, otherwise the
  /// initial-value solve from the configured initial state.
  std::pair<Trajectory, FixedPointReport> solve(const Trajectory& control) const;

  /// Response to `control` with zero initial data (the linear part of the
  /// control-to-state map when f is linear).
  Trajectory solve_homogeneous(const Trajectory& control) const;

  /// Linear solve with the nonlinear remainder replaced by a given nodal
  /// forcing: (lead M + K - kappa M) u^n = M forcing^n - M (memory terms),
  /// with the nonlocal condition (or u0 when there are no pairs) applied.
  Trajectory solve_forced(const Trajectory& forcing, const Eigen::VectorXd& u0) const;

  /// Discrete adjoint of the scheme linearized at `state`. `load` row n holds
  /// dJ/du^n (row 0 is dJ/du^0). Returns the multipliers p^1..p^N (row 0 is
  /// zero); the raw gradient with respect to control row n is B^T M p^n.
  Trajectory adjoint(const Trajectory& state, const Trajectory& load) const;

  /// Remainder r(t, u) = f(t, u) - kappa u.
  Eigen::VectorXd remainder(double t, const Eigen::VectorXd& u) const;
  double linear_shift() const noexcept { return kappa_; }

 private:
  template <typename Load>
  Trajectory march(const Eigen::VectorXd& u0, Load&& load, bool with_remainder) const;
  template <typename Load>
  std::pair<Trajectory, FixedPointReport> nonlocal_march(Load&& load, bool with_remainder) const;

  const Problem* problem_;
  TimeScheme scheme_;
  MemoryKernel kernel_;
  double kappa_ = 0.0;
  bool has_remainder_ = false;
  Eigen::MatrixXd step_matrix_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
};

/// L1 initial-value solve.
Trajectory solve_state_l1(const Problem& problem, const Trajectory& control, const Eigen::VectorXd& u0);

/// L1 solve with the nonlocal condition (or the configured initial state when
/// there are no pairs).
std::pair<Trajectory, FixedPointReport> solve_state_nonlocal(const Problem& problem, const Trajectory& control);

/// Backward Euler; requires alpha = 1 and shares the L1 code path.
Trajectory solve_state_classical(const Problem& problem, const Trajectory& control, const Eigen::VectorXd& u0);

}  // namespace fracctl
