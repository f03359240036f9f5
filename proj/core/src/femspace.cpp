#include "fracctl/femspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

namespace {

void require_dofs(const SpaceMesh& mesh, const Eigen::VectorXd& u, const char* who) {
  if (static_cast<std::size_t>(u.size()) != mesh.dofs()) {
    throw DomainError(fmt::format("{}: vector has {} entries, mesh has {} dofs", who, u.size(), mesh.dofs()));
  }
}

void require_spd(const SymMatrix& m) {
  if (m.entries.rows() != m.entries.cols() || m.entries.rows() == 0) {
    throw DomainError(fmt::format("matrix '{}' is not a non-empty square matrix", m.name));
  }
  if (!m.entries.isApprox(m.entries.transpose(), 1e-14)) {
    throw DomainError(fmt::format("matrix '{}' is not symmetric", m.name));
  }
  Eigen::LLT<Eigen::MatrixXd> llt(m.entries);
  if (llt.info() != Eigen::Success) {
    throw DomainError(fmt::format("matrix '{}' is not positive definite", m.name));
  }
}

SymMatrix tridiagonal(std::string name, std::size_t n, double diag, double off) {
  SymMatrix m{std::move(name), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n))};
  for (Eigen::Index i = 0; i < m.entries.rows(); ++i) {
    m.entries(i, i) = diag;
    if (i + 1 < m.entries.rows()) {
      m.entries(i, i + 1) = off;
      m.entries(i + 1, i) = off;
    }
  }
  return m;
}

// Thomas algorithm for the tridiagonal P1 mass matrix (diagonally dominant,
// so no pivoting is needed).
Eigen::VectorXd thomas_mass(const SpaceMesh& mesh, Eigen::VectorXd rhs) {
  const double diag = 2.0 * mesh.h / 3.0;
  const double off = mesh.h / 6.0;
  const Eigen::Index n = rhs.size();
  std::vector<double> upper(static_cast<std::size_t>(n));
  double pivot = diag;
  upper[0] = off / pivot;
  rhs(0) /= pivot;
  for (Eigen::Index i = 1; i < n; ++i) {
    pivot = diag - off * upper[static_cast<std::size_t>(i) - 1];
    upper[static_cast<std::size_t>(i)] = off / pivot;
    rhs(i) = (rhs(i) - off * rhs(i - 1)) / pivot;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) rhs(i) -= upper[static_cast<std::size_t>(i)] * rhs(i + 1);
  return rhs;
}

}  // namespace

SpaceMesh build_mesh(double x_lo, double x_hi, std::size_t n_elems) {
  if (!std::isfinite(x_lo) || !std::isfinite(x_hi) || !(x_lo < x_hi)) {
    throw DomainError(fmt::format("degenerate domain ({}, {})", x_lo, x_hi));
  }
  if (n_elems < 2) throw DomainError(fmt::format("need at least 2 elements, got {}", n_elems));

  SpaceMesh mesh;
  mesh.x_lo = x_lo;
  mesh.x_hi = x_hi;
  mesh.n_elems = n_elems;
  mesh.h = (x_hi - x_lo) / static_cast<double>(n_elems);
  mesh.nodes.resize(n_elems + 1);
  for (std::size_t i = 0; i <= n_elems; ++i) {
    mesh.nodes[i] = x_lo + (x_hi - x_lo) * static_cast<double>(i) / static_cast<double>(n_elems);
  }
  mesh.nodes.back() = x_hi;
  return mesh;
}

SymMatrix assemble_mass(const SpaceMesh& mesh) {
  return tridiagonal("mass", mesh.dofs(), 2.0 * mesh.h / 3.0, mesh.h / 6.0);
}

SymMatrix assemble_stiffness(const SpaceMesh& mesh, double diffusion) {
  if (!(diffusion > 0.0) || !std::isfinite(diffusion)) {
    throw DomainError(fmt::format("diffusion must be positive, got {}", diffusion));
  }
  return tridiagonal("stiffness", mesh.dofs(), 2.0 * diffusion / mesh.h, -diffusion / mesh.h);
}

Eigen::VectorXd l2_project(const SpaceField& f, const SpaceMesh& mesh) {
  // 3-point Gauss-Legendre on [0, 1].
  static constexpr std::array<double, 3> kPoints{0.1127016653792583, 0.5, 0.8872983346207417};
  static constexpr std::array<double, 3> kWeights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};

  const auto n = static_cast<Eigen::Index>(mesh.dofs());
  Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
  for (std::size_t e = 0; e < mesh.n_elems; ++e) {
    const double a = mesh.nodes[e];
    const double len = mesh.nodes[e + 1] - a;
    double left = 0.0;
    double right = 0.0;
    for (std::size_t q = 0; q < kPoints.size(); ++q) {
      const double value = f(a + kPoints[q] * len) * kWeights[q] * len;
      left += value * (1.0 - kPoints[q]);
      right += value * kPoints[q];
    }
    // Node e is dof e - 1; boundary nodes carry no dof.
    if (e >= 1) load(static_cast<Eigen::Index>(e) - 1) += left;
    if (e + 1 < mesh.n_elems) load(static_cast<Eigen::Index>(e)) += right;
  }
  return thomas_mass(mesh, load);
}

Eigen::VectorXd mass_solve(const SpaceMesh& mesh, Eigen::VectorXd rhs) {
  require_dofs(mesh, rhs, "mass_solve");
  return thomas_mass(mesh, std::move(rhs));
}

Eigen::VectorXd interpolate(const SpaceField& f, const SpaceMesh& mesh) {
  Eigen::VectorXd u(static_cast<Eigen::Index>(mesh.dofs()));
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = f(mesh.dof_x(static_cast<std::size_t>(i)));
  return u;
}

ModalBasis generalized_eigs(const SymMatrix& stiffness, const SymMatrix& mass) {
  require_spd(stiffness);
  require_spd(mass);
  if (stiffness.dimension() != mass.dimension()) {
    throw DomainError(fmt::format("'{}' is {}x{} but '{}' is {}x{}", stiffness.name, stiffness.dimension(),
                                  stiffness.dimension(), mass.name, mass.dimension(), mass.dimension()));
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(stiffness.entries, mass.entries,
                                                                     Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (solver.info() != Eigen::Success) throw DomainError("generalized eigensolve failed");

  ModalBasis basis{solver.eigenvalues(), solver.eigenvectors()};
  // Fix the sign of each mode so the result is reproducible: the first entry
  // of appreciable size is positive.
  for (Eigen::Index k = 0; k < basis.modes.cols(); ++k) {
    auto col = basis.modes.col(k);
    const double scale = col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) > 1e-8 * scale) {
        if (col(i) < 0.0) col = -col;
        break;
      }
    }
  }
  return basis;
}

double l2_inner(const SymMatrix& mass, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  if (u.size() != mass.dimension() || v.size() != mass.dimension()) {
    throw DomainError(fmt::format("l2_inner: sizes {} and {} do not match matrix dimension {}", u.size(), v.size(),
                                  mass.dimension()));
  }
  return u.dot(mass.entries * v);
}

double l2_inner(const SpaceMesh& mesh, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  require_dofs(mesh, u, "l2_inner");
  require_dofs(mesh, v, "l2_inner");
  const double diag = 2.0 * mesh.h / 3.0;
  const double off = mesh.h / 6.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    sum += diag * u(i) * v(i);
    if (i + 1 < u.size()) sum += off * (u(i) * v(i + 1) + u(i + 1) * v(i));
  }
  return sum;
}

double l2_norm(const SymMatrix& mass, const Eigen::VectorXd& u) {
  return std::sqrt(std::max(0.0, l2_inner(mass, u, u)));
}

Eigen::VectorXd to_modal(const ModalBasis& basis, const SymMatrix& mass, const Eigen::VectorXd& u) {
  return basis.modes.transpose() * (mass.entries * u);
}

Eigen::VectorXd to_nodal(const ModalBasis& basis, const Eigen::VectorXd& coefficients) {
  return basis.modes * coefficients;
}

Eigen::VectorXd prolongate(const SpaceMesh& coarse, const SpaceMesh& fine, const Eigen::VectorXd& u) {
  require_dofs(coarse, u, "prolongate");
  if (fine.n_elems % coarse.n_elems != 0 || fine.x_lo != coarse.x_lo || fine.x_hi != coarse.x_hi) {
    throw DomainError("prolongate: meshes are not nested");
  }
  const std::size_t ratio = fine.n_elems / coarse.n_elems;
  auto coarse_node = [&](std::size_t j) {
    return (j == 0 || j == coarse.n_elems) ? 0.0 : u(static_cast<Eigen::Index>(j) - 1);
  };
  Eigen::VectorXd out(static_cast<Eigen::Index>(fine.dofs()));
  for (std::size_t i = 1; i < fine.n_elems; ++i) {
    const std::size_t e = i / ratio;
    const double theta = static_cast<double>(i % ratio) / static_cast<double>(ratio);
    const double right = (theta == 0.0) ? 0.0 : coarse_node(e + 1);
    out(static_cast<Eigen::Index>(i) - 1) = (1.0 - theta) * coarse_node(e) + theta * right;
  }
  return out;
}

}  // namespace fracctl
