#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fixtures.hpp"

#include "fracctl/errors.hpp"
#include "fracctl/fraccore.hpp"
#include "fracctl/mildsolve.hpp"
#include "fracctl/stepsolve.hpp"

using namespace fracctl;
using doctest::Approx;

namespace {

double first_mode_coefficient(const Problem& p, const Eigen::VectorXd& u) {
  const ModalBasis basis = generalized_eigs(p.stiffness, p.mass);
  return to_modal(basis, p.mass, u)(0);
}

double max_l2_gap(const Problem& p, const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= p.grid.steps(); ++n) {
    const Eigen::VectorXd d = a.row(n) - b.row(n);
    worst = std::max(worst, std::sqrt(l2_inner(p.mass, d, d)));
  }
  return worst;
}

}  // namespace

TEST_CASE("memory kernel coefficients") {
  SUBCASE("L1 at alpha = 1 is backward Euler") {
    const MemoryKernel k = MemoryKernel::build(TimeScheme::L1, FractionalOrder(1.0), 0.1, 4);
    CHECK(k.lead == Approx(10.0));
    CHECK(k.history[1] == Approx(-10.0));
    for (std::size_t m = 2; m < 4; ++m) CHECK(k.history[m] == Approx(0.0));
    CHECK(k.initial[1] == Approx(-10.0));
    CHECK(k.initial[2] == Approx(0.0));
    CHECK(k.initial[3] == Approx(0.0));
  }
  SUBCASE("L1 coefficients reproduce the weight formula") {
    const double alpha = 0.5;
    const double dt = 0.25;
    const MemoryKernel k = MemoryKernel::build(TimeScheme::L1, FractionalOrder(alpha), dt, 3);
    const double c = 1.0 / (std::tgamma(2.0 - alpha) * std::pow(dt, alpha));
    const auto b = l1_weights(FractionalOrder(alpha), 3).values;
    CHECK(k.lead == Approx(c));
    CHECK(k.history[1] == Approx(-c * (b[0] - b[1])));
    CHECK(k.initial[3] == Approx(-c * b[2]));
  }
  SUBCASE("a constant history has zero derivative under both schemes") {
    for (auto scheme : {TimeScheme::L1, TimeScheme::GrunwaldLetnikov}) {
      const MemoryKernel k = MemoryKernel::build(scheme, FractionalOrder(0.3), 0.05, 6);
      for (std::size_t n = 1; n <= 6; ++n) {
        double sum = k.lead + k.initial[n];
        for (std::size_t m = 1; m < n; ++m) sum += k.history[m];
        CHECK(sum == Approx(0.0).scale(k.lead));
      }
    }
  }
  CHECK_THROWS_AS(MemoryKernel::build(TimeScheme::L1, FractionalOrder(0.5), 0.0, 4), DomainError);
  CHECK_THROWS_AS(MemoryKernel::build(TimeScheme::L1, FractionalOrder(0.5), 0.1, 0), DomainError);
}

TEST_CASE("zero data gives the zero state") {
  ProblemConfig cfg = testing::desk_config(0.5, 8, 10);
  cfg.initial_state = nullptr;
  const Problem p = discretize(cfg);
  const Trajectory u = StepSolver(p).solve(p.control).first;
  CHECK(u.values.isZero());
}

TEST_CASE("classical heat decay") {
  ProblemConfig cfg = testing::desk_config(1.0, 64, 400);
  const Problem p = discretize(cfg);
  const Trajectory u = solve_state_classical(p, p.control, p.initial_state);
  const double c0 = first_mode_coefficient(p, p.initial_state);
  const double cT = first_mode_coefficient(p, u.row(p.grid.steps()));
  const double exact = c0 * std::exp(-std::numbers::pi * std::numbers::pi);
  CHECK(std::abs(cT - exact) < 5.0 * (p.grid.dt() + p.mesh.h * p.mesh.h) * std::abs(c0));
  CHECK_THROWS_AS(solve_state_classical(discretize(testing::desk_config(0.5, 8, 8)), p.control, p.initial_state),
                  DomainError);
}

TEST_CASE("fractional decay follows the Mittag-Leffler multiplier") {
  const double alpha = 0.5;
  const Problem p = discretize(testing::desk_config(alpha, 32, 400));
  const Trajectory u = solve_state_l1(p, p.control, p.initial_state);
  const ModalBasis basis = generalized_eigs(p.stiffness, p.mass);
  const double c0 = to_modal(basis, p.mass, p.initial_state)(0);
  const double cT = to_modal(basis, p.mass, u.row(p.grid.steps()))(0);
  const double exact = c0 * ml_eval(alpha, 1.0, -basis.eigenvalues(0));
  CHECK(std::abs(cT - exact) < 5.0 * (std::pow(p.grid.dt(), 2.0 - alpha) + p.mesh.h * p.mesh.h) * std::abs(c0));
}

TEST_CASE("linear decay handled implicitly matches the nonlinear path") {
  ProblemConfig cfg = testing::desk_config(0.6, 12, 24);
  cfg.control = [](double t, double x) { return (1.0 + t) * x * (1.0 - x); };
  cfg.nonlinearity = Nonlinearity::linear_decay(1.5);
  cfg.tol.step_tol = 1e-14;
  const Problem linear = discretize(cfg);
  cfg.nonlinearity = Nonlinearity::table({{-10.0, 15.0}, {10.0, -15.0}});
  const Problem tabled = discretize(cfg);
  const Trajectory a = StepSolver(linear).solve(linear.control).first;
  const Trajectory b = StepSolver(tabled).solve(tabled.control).first;
  CHECK(max_l2_gap(linear, a, b) < 1e-11);
}

TEST_CASE("cubic decay converges and stays bounded by the linear solution") {
  ProblemConfig cfg = testing::desk_config(0.5, 16, 32);
  cfg.nonlinearity = Nonlinearity::cubic_decay(1.0);
  const Problem p = discretize(cfg);
  const Trajectory u = StepSolver(p).solve(p.control).first;
  cfg.nonlinearity = Nonlinearity::zero();
  const Problem q = discretize(cfg);
  const Trajectory w = StepSolver(q).solve(q.control).first;
  CHECK(u.finite());
  for (std::size_t n = 1; n <= p.grid.steps(); ++n) CHECK(u.row(n).maxCoeff() <= w.row(n).maxCoeff() + 1e-12);
}

TEST_CASE("Picard sweep cap is reported") {
  ProblemConfig cfg = testing::desk_config(0.5, 8, 4);
  cfg.initial_state = [](double x) { return 40.0 * std::sin(std::numbers::pi * x); };
  cfg.nonlinearity = Nonlinearity::cubic_decay(5.0);
  cfg.tol.max_step_sweeps = 2;
  const Problem p = discretize(cfg);
  CHECK_THROWS_AS(StepSolver(p).solve(p.control), ConvergenceError);
}

TEST_CASE("Grunwald-Letnikov and L1 agree to first order") {
  ProblemConfig cfg = testing::desk_config(0.5, 16, 320);
  cfg.solver = SolverKind::GL;
  const Problem p = discretize(cfg);
  const StepSolver gl(p);
  CHECK(gl.scheme() == TimeScheme::GrunwaldLetnikov);
  const Trajectory a = gl.solve(p.control).first;
  const Trajectory b = StepSolver(p, TimeScheme::L1).solve(p.control).first;
  const Eigen::VectorXd d = a.row(p.grid.steps()) - b.row(p.grid.steps());
  CHECK(std::sqrt(l2_inner(p.mass, d, d)) < 0.02);
}

TEST_CASE("nonlocal fixed point") {
  ProblemConfig cfg = testing::desk_config(0.5, 16, 64);
  cfg.initial_state = nullptr;
  cfg.control = [](double t, double x) { return (1.0 + t) * x * (1.0 - x); };
  cfg.nonlocal = NonlocalSpec{{{0.3, 0.5}, {0.2, 1.0}}};
  const Problem p = discretize(cfg);
  const auto [u, report] = solve_state_nonlocal(p, p.control);
  CHECK(report.converged);
  CHECK(report.last_ratio() <= 0.5 + 0.05);

  SUBCASE("the initial state satisfies the nonlocal condition") {
    const Eigen::VectorXd mix = 0.3 * u.row(32) + 0.2 * u.row(64);
    CHECK((u.row(0) - mix).norm() < 1e-9);
  }
  SUBCASE("agrees with the closed-form initial state of the mild solution") {
    const Trajectory mild = MildSolver(p).solve(p.control);
    const Eigen::VectorXd d = mild.row(0) - u.row(0);
    CHECK(std::sqrt(l2_inner(p.mass, d, d)) < 2e-3);
  }
  SUBCASE("iteration cap is reported") {
    cfg.tol.max_outer = 2;
    const Problem q = discretize(cfg);
    CHECK_THROWS_AS(StepSolver(q).solve(q.control), ConvergenceError);
  }
}

TEST_CASE("shape errors") {
  const Problem p = discretize(testing::desk_config(0.5, 8, 8));
  const StepSolver solver(p);
  CHECK_THROWS_AS(solver.solve(Trajectory::zeros(p.grid, 3)), DomainError);
  CHECK_THROWS_AS(solver.solve(Trajectory::zeros(TimeGrid(1.0, 4), p.dofs())), DomainError);
  CHECK_THROWS_AS(solver.solve_initial(p.control, Eigen::VectorXd::Zero(2)), DomainError);
}
