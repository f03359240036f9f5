#pragma once

// Piecewise-linear finite elements on a uniform 1D mesh with homogeneous
// Dirichlet conditions. Boundary nodes are eliminated, so every vector and
// matrix here lives on the interior degrees of freedom.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fracctl {

struct SpaceMesh {
  double x_lo = 0.0;
  double x_hi = 1.0;
  std::size_t n_elems = 0;
  std::vector<double> nodes;  ///< all nodes, boundary included
  double h = 0.0;

  std::size_t dofs() const noexcept { return n_elems - 1; }
  /// Coordinate of interior dof i (node i + 1).
  double dof_x(std::size_t i) const { return nodes[i + 1]; }
};

/// Symmetric matrix on the interior dofs. Stored densely; desk-scale problems
/// have at most ~1000 dofs.
struct SymMatrix {
  std::string name;
  Eigen::MatrixXd entries;

  Eigen::Index dimension() const noexcept { return entries.rows(); }
};

/// Mass-orthonormal generalized eigenpairs K phi = lambda M phi, ascending.
struct ModalBasis {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd modes;  ///< column k is phi_k

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
};

using SpaceField = std::function<double(double)>;

SpaceMesh build_mesh(double x_lo, double x_hi, std::size_t n_elems);

SymMatrix assemble_mass(const SpaceMesh& mesh);
SymMatrix assemble_stiffness(const SpaceMesh& mesh, double diffusion);

/// L2 projection onto the P1 space: solves M c = (f, phi_i) with 3-point
/// Gauss quadrature per element.
Eigen::VectorXd l2_project(const SpaceField& f, const SpaceMesh& mesh);

/// Solves M c = rhs for the mesh's P1 mass matrix (tridiagonal solve).
Eigen::VectorXd mass_solve(const SpaceMesh& mesh, Eigen::VectorXd rhs);

/// Nodal interpolant of f at the interior dofs.
Eigen::VectorXd interpolate(const SpaceField& f, const SpaceMesh& mesh);

/// Dense symmetric-definite eigensolve (Cholesky reduction of the mass
/// matrix). Throws DomainError naming the matrix that is not SPD.
ModalBasis generalized_eigs(const SymMatrix& stiffness, const SymMatrix& mass);

/// Discrete L2 inner product u^T M v.
double l2_inner(const SymMatrix& mass, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double l2_inner(const SpaceMesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
double l2_norm(const SymMatrix& mass, const Eigen::VectorXd& u);

/// Modal coefficients Phi^T M u of a nodal vector, and back.
Eigen::VectorXd to_modal(const ModalBasis& basis, const SymMatrix& mass, const Eigen::VectorXd& u);
Eigen::VectorXd to_nodal(const ModalBasis& basis, const Eigen::VectorXd& coefficients);

/// Prolongation of a P1 function on `coarse` to the nested mesh `fine`
/// (fine.n_elems must be a multiple of coarse.n_elems).
Eigen::VectorXd prolongate(const SpaceMesh& coarse, const SpaceMesh& fine, const Eigen::VectorXd& u);

}  // namespace fracctl
