#pragma once

// Problem description (continuous data as fields) and its discretization on a
// mesh and time grid.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fracctl/femspace.hpp"
#include "fracctl/fraccore.hpp"
#include "fracctl/nonlinearity.hpp"
#include "fracctl/trajectory.hpp"

namespace fracctl {

using SpaceTimeField = std::function<double(double t, double x)>;

struct NonlocalPair {
  double weight;
  double time;
};

/// Nonlocal initial condition u(0) = sum_k weight_k u(time_k). Empty means an
/// ordinary initial-value problem.
struct NonlocalSpec {
  std::vector<NonlocalPair> pairs;

  bool empty() const noexcept { return pairs.empty(); }
  double weight_sum() const noexcept;
};

/// Smallness check sum |c_k| < 1 / M_T. For the Dirichlet Laplacian every modal
/// multiplier E_alpha(-lambda t^alpha) lies in (0, 1], so M_T = 1.
struct H1Report {
  double weight_sum = 0.0;
  double bound = 1.0;
  double margin = 1.0;  ///< bound - weight_sum
  bool pass = true;
};

H1Report validate_h1(const NonlocalSpec& spec);

enum class SolverKind { L1, GL, Mild };
enum class CostKind { QuadraticIntegral, FinalTracking };

struct CostSpec {
  CostKind kind = CostKind::FinalTracking;
  double epsilon = 1e-4;  ///< control weight
  double r0_scale = 1.0;
  double w0_scale = 1.0;
  double scale = 1.0;     ///< overall positive factor
  SpaceField target;      ///< final_tracking only; empty means zero
};

struct Tolerances {
  double step_tol = 1e-10;
  double nonlocal_tol = 1e-10;
  double hammerstein_tol = 1e-10;
  double eps1 = 1e-8;
  double eps2 = 1e-8;
  double delta = 0.0;
  std::size_t max_iter = 500;
  std::size_t max_outer = 200;
  std::size_t max_step_sweeps = 25;
  std::size_t hammerstein_max_iter = 200;
};

struct ProblemConfig {
  FractionalOrder alpha{0.5};
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t n_elems = 0;
  double diffusion = 1.0;
  double final_time = 1.0;
  std::size_t steps = 0;
  Nonlinearity nonlinearity = Nonlinearity::zero();
  std::optional<Eigen::MatrixXd> control_map;  ///< B on interior dofs; empty is identity
  NonlocalSpec nonlocal;
  SpaceField initial_state;                    ///< used when nonlocal is empty; empty is zero
  SpaceTimeField control;                      ///< empty is zero
  std::optional<TrajectoryValues> control_values;  ///< explicit nodal control, overrides `control`
  CostSpec cost;
  SolverKind solver = SolverKind::L1;
  Tolerances tol;
};

/// A ProblemConfig projected onto its mesh and time grid.
struct Problem {
  ProblemConfig config;
  SpaceMesh mesh;
  SymMatrix mass;
  SymMatrix stiffness;
  TimeGrid grid;
  Eigen::MatrixXd control_map;
  bool identity_map = true;
  Eigen::VectorXd initial_state;
  Eigen::VectorXd target;
  Trajectory control;
  std::vector<std::size_t> nonlocal_index;  ///< grid index of each nonlocal time

  FractionalOrder alpha() const noexcept { return config.alpha; }
  std::size_t dofs() const noexcept { return mesh.dofs(); }
  /// B v for a nodal vector.
  Eigen::VectorXd apply_control_map(const Eigen::VectorXd& v) const;
  Eigen::VectorXd apply_control_map_transpose(const Eigen::VectorXd& v) const;
};

/// Validates and discretizes. Collects every problem into one ConfigError:
/// H1 violation, nonlocal times off the grid by more than dt/2, non-positive
/// tolerances, too few steps, mismatched B or control dimensions.
Problem discretize(const ProblemConfig& config);

/// Nodal vectors of a space-time field at every grid time (L2 projection).
Trajectory project_trajectory(const SpaceTimeField& field, const SpaceMesh& mesh, const TimeGrid& grid);

}  // namespace fracctl
