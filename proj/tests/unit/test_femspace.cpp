#include <cmath>
#include <numbers>

#include "doctest.h"

#include "fracctl/errors.hpp"
#include "fracctl/femspace.hpp"

using namespace fracctl;
using doctest::Approx;

namespace {
const double pi = std::numbers::pi;
double sine(double x) { return std::sin(pi * x); }
}  // namespace

TEST_CASE("mesh construction") {
  const SpaceMesh mesh = build_mesh(0.0, 2.0, 8);
  CHECK(mesh.dofs() == 7);
  CHECK(mesh.h == Approx(0.25));
  CHECK(mesh.nodes.front() == 0.0);
  CHECK(mesh.nodes.back() == 2.0);
  CHECK(mesh.dof_x(0) == Approx(0.25));

  CHECK_THROWS_AS(build_mesh(1.0, 1.0, 4), DomainError);
  CHECK_THROWS_AS(build_mesh(1.0, 0.0, 4), DomainError);
  CHECK_THROWS_AS(build_mesh(0.0, 1.0, 1), DomainError);
  CHECK_THROWS_AS(build_mesh(0.0, std::nan(""), 4), DomainError);
}

TEST_CASE("mass and stiffness stencils") {
  const SpaceMesh mesh = build_mesh(0.0, 1.0, 4);
  const SymMatrix m = assemble_mass(mesh);
  const SymMatrix k = assemble_stiffness(mesh, 2.0);
  REQUIRE(m.dimension() == 3);
  CHECK(m.entries(1, 1) == Approx(2.0 * 0.25 / 3.0));
  CHECK(m.entries(0, 1) == Approx(0.25 / 6.0));
  CHECK(m.entries(0, 2) == 0.0);
  CHECK(k.entries(1, 1) == Approx(2.0 * 2.0 / 0.25));
  CHECK(k.entries(1, 2) == Approx(-2.0 / 0.25));
  CHECK((m.entries - m.entries.transpose()).norm() == 0.0);
  CHECK_THROWS_AS(assemble_stiffness(mesh, 0.0), DomainError);
  CHECK_THROWS_AS(assemble_stiffness(mesh, -1.0), DomainError);
}

TEST_CASE("generalized eigenpairs") {
  SUBCASE("lowest eigenvalue overestimates pi^2") {
    for (std::size_t n : {4u, 8u, 32u}) {
      const SpaceMesh mesh = build_mesh(0.0, 1.0, n);
      const ModalBasis basis = generalized_eigs(assemble_stiffness(mesh, 1.0), assemble_mass(mesh));
      const double h = mesh.h;
      const double discrete = 6.0 / (h * h) * (1.0 - std::cos(pi * h)) / (2.0 + std::cos(pi * h));
      CHECK(basis.eigenvalues(0) == Approx(discrete).epsilon(1e-12));
      CHECK(basis.eigenvalues(0) >= pi * pi);
      if (n >= 8) CHECK(basis.eigenvalues(0) <= pi * pi * 1.05);
    }
  }
  SUBCASE("modes are mass-orthonormal, ascending and sign-normalized") {
    const SpaceMesh mesh = build_mesh(0.0, 1.0, 16);
    const SymMatrix m = assemble_mass(mesh);
    const ModalBasis basis = generalized_eigs(assemble_stiffness(mesh, 1.0), m);
    const Eigen::MatrixXd gram = basis.modes.transpose() * m.entries * basis.modes;
    CHECK((gram - Eigen::MatrixXd::Identity(15, 15)).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index k = 1; k < basis.size(); ++k) CHECK(basis.eigenvalues(k) > basis.eigenvalues(k - 1));
    for (Eigen::Index k = 0; k < basis.size(); ++k) CHECK(basis.modes(0, k) > 0.0);
  }
  SUBCASE("non-SPD input is named") {
    const SpaceMesh mesh = build_mesh(0.0, 1.0, 4);
    SymMatrix bad = assemble_mass(mesh);
    bad.entries(0, 0) = -1.0;
    try {
      generalized_eigs(assemble_stiffness(mesh, 1.0), bad);
      FAIL("expected DomainError");
    } catch (const DomainError& e) {
      CHECK(std::string(e.what()).find("mass") != std::string::npos);
    }
    SymMatrix asym = assemble_stiffness(mesh, 1.0);
    asym.entries(0, 1) += 1.0;
    CHECK_THROWS_AS(generalized_eigs(asym, assemble_mass(mesh)), DomainError);
  }
}

TEST_CASE("projection, interpolation and inner products") {
  const SpaceMesh mesh = build_mesh(0.0, 1.0, 64);
  const SymMatrix m = assemble_mass(mesh);
  const Eigen::VectorXd p = l2_project(sine, mesh);
  const Eigen::VectorXd i = interpolate(sine, mesh);
  const Eigen::VectorXd diff = p - i;
  CHECK(std::sqrt(l2_inner(m, diff, diff)) < 1e-3);
  CHECK(l2_inner(m, i, i) == Approx(0.5).epsilon(2e-3));
  CHECK(l2_inner(mesh, p, i) == Approx(l2_inner(m, p, i)).epsilon(1e-13));
  CHECK(l2_norm(m, i) == Approx(std::sqrt(l2_inner(m, i, i))));
  CHECK_THROWS_AS(l2_inner(m, i, Eigen::VectorXd::Zero(3)), DomainError);
  CHECK_THROWS_AS(l2_inner(mesh, Eigen::VectorXd::Zero(3), i), DomainError);

  SUBCASE("projection reproduces P1 functions") {
    const SpaceMesh coarse = build_mesh(0.0, 1.0, 8);
    auto hat = [](double x) { return std::max(0.0, 1.0 - std::abs(x - 0.5) / 0.25); };
    const Eigen::VectorXd ph = l2_project(hat, coarse);
    CHECK((ph - interpolate(hat, coarse)).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("mass solve inverts the mass matrix") {
    const Eigen::VectorXd rhs = m.entries * i;
    CHECK((mass_solve(mesh, rhs) - i).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("modal transforms and prolongation") {
  const SpaceMesh coarse = build_mesh(0.0, 1.0, 8);
  const SpaceMesh fine = build_mesh(0.0, 1.0, 32);
  const SymMatrix m = assemble_mass(coarse);
  const ModalBasis basis = generalized_eigs(assemble_stiffness(coarse, 1.0), m);
  const Eigen::VectorXd u = interpolate(sine, coarse);
  CHECK((to_nodal(basis, to_modal(basis, m, u)) - u).cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::VectorXd up = prolongate(coarse, fine, u);
  REQUIRE(up.size() == 31);
  CHECK(up(3) == Approx(u(0)));
  CHECK(l2_inner(fine, up, up) == Approx(l2_inner(coarse, u, u)).epsilon(1e-12));
  CHECK_THROWS_AS(prolongate(coarse, build_mesh(0.0, 1.0, 12), u), DomainError);
  CHECK_THROWS_AS(prolongate(coarse, fine, Eigen::VectorXd::Zero(4)), DomainError);
}
