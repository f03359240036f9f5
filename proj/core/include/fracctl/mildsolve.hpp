#pragma once

// Spectral mild-solution engine. Each generalized eigenmode of the discrete
// operator evolves by scalar Mittag-Leffler multipliers; forcing that is
// constant on each time slab (t_{n-1}, t_n] is integrated against the
// resolvent exactly through
//   int_0^t s^{alpha-1} E_{alpha,alpha}(-lambda s^alpha) ds = t^alpha E_{alpha,alpha+1}(-lambda t^alpha).

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fracctl/femspace.hpp"
#include "fracctl/problem.hpp"
#include "fracctl/trajectory.hpp"

namespace fracctl {

/// E_alpha(-lambda t^alpha).
double solution_multiplier(FractionalOrder alpha, double lambda, double t);
/// t^{alpha-1} E_{alpha,alpha}(-lambda t^alpha); t must be positive.
double resolvent_multiplier(FractionalOrder alpha, double lambda, double t);
/// t^alpha E_{alpha,alpha+1}(-lambda t^alpha), the integral of the resolvent over [0, t].
double integrated_multiplier(FractionalOrder alpha, double lambda, double t);

/// Solution operator applied to modal coefficients; t = 0 returns the input.
Eigen::VectorXd solution_op_apply(FractionalOrder alpha, const Eigen::VectorXd& eigenvalues, double t,
                                  const Eigen::VectorXd& coefficients);
/// Resolvent applied to modal coefficients; rejects t <= 0.
Eigen::VectorXd resolvent_op_apply(FractionalOrder alpha, const Eigen::VectorXd& eigenvalues, double t,
                                   const Eigen::VectorXd& coefficients);

/// Per-mode multipliers cached at every grid time.
class ModalMultipliers {
 public:
  ModalMultipliers(FractionalOrder alpha, const Eigen::VectorXd& eigenvalues, const TimeGrid& grid);

  /// E_alpha(-lambda_k t_n^alpha) for all modes.
  Eigen::VectorXd solution(std::size_t n) const { return solution_.row(static_cast<Eigen::Index>(n)).transpose(); }
  /// t_n^alpha E_{alpha,alpha+1}(-lambda_k t_n^alpha) for all modes.
  Eigen::VectorXd integrated(std::size_t n) const { return integrated_.row(static_cast<Eigen::Index>(n)).transpose(); }

  const TrajectoryValues& solution_table() const noexcept { return solution_; }
  const TrajectoryValues& integrated_table() const noexcept { return integrated_; }

 private:
  TrajectoryValues solution_;
  TrajectoryValues integrated_;
};

/// 1 / (1 - sum_k c_k E_alpha(-lambda t_k^alpha)) per mode. Throws ConfigError
/// carrying the margin when the smallness condition fails.
Eigen::VectorXd nonlocal_operator(const NonlocalSpec& spec, const Eigen::VectorXd& eigenvalues, FractionalOrder alpha);

struct HammersteinReport {
  std::size_t iterations = 0;
  std::vector<double> increments;  ///< sup over grid of the L2 increment
  double last_ratio = 0.0;
};

struct MildOptions {
  /// Fold the linear part kappa u of f into the modal eigenvalues
  /// (lambda -> lambda - kappa), leaving only the remainder for the Picard
  /// iteration. Linear problems are then solved exactly in time.
  bool absorb_linear = true;
};

/// Holds a reference to the Problem, which must outlive the solver.
class MildSolver {
 public:
  explicit MildSolver(const Problem& problem, MildOptions options = {});

  const Problem& problem() const noexcept { return *problem_; }
  const ModalBasis& basis() const noexcept { return basis_; }
  /// Eigenvalues after the linear shift, the ones the multipliers use.
  const Eigen::VectorXd& rates() const noexcept { return rates_; }
  const ModalMultipliers& multipliers() const noexcept { return multipliers_; }
  const Eigen::VectorXd& nonlocal_multipliers() const noexcept { return nonlocal_; }

  Eigen::VectorXd to_modal(const Eigen::VectorXd& nodal) const;
  Eigen::VectorXd to_nodal(const Eigen::VectorXd& modal) const;

  /// int_0^{t_n} S(t_n - s) F(s) ds per mode, with row j of `modal_forcing`
  /// acting on the slab (t_{j-1}, t_j].
  Eigen::VectorXd convolve_resolvent(std::size_t n, const Trajectory& modal_forcing) const;

  /// Green-kernel application at t_n to a nodal forcing trajectory:
  /// sum_k c_k T(t_n) O conv(t_k) + conv(t_n), returned as nodal values.
  Eigen::VectorXd green_apply(std::size_t n, const Trajectory& forcing) const;

  /// (K w)(t_n) for every grid time.
  Trajectory apply_K(const Trajectory& forcing) const;
  /// K (B v).
  Trajectory apply_H(const Trajectory& control) const;
  /// Nodal nonlinearity; only the remainder f - kappa u when the linear part is absorbed.
  Trajectory apply_N(const Trajectory& state) const;
  /// Response to the initial state T(t) u0 when there are no nonlocal pairs, else zero.
  Trajectory free_response() const;

  /// Picard iteration u <- K N u + H v (+ free response) from u = H v.
  std::pair<Trajectory, HammersteinReport> hammerstein_solve(const Trajectory& control, double tol,
                                                             std::size_t max_iter) const;
  /// hammerstein_solve with the configured tolerance and iteration cap.
  Trajectory solve(const Trajectory& control) const;

 private:
  Trajectory modal_convolution(const Trajectory& modal_forcing) const;

  const Problem* problem_;
  MildOptions options_;
  double kappa_ = 0.0;
  ModalBasis basis_;
  Eigen::VectorXd rates_;
  ModalMultipliers multipliers_;
  Eigen::VectorXd nonlocal_;
};

}  // namespace fracctl
