#include <cmath>
#include <numbers>

#include <benchmark/benchmark.h>

#include "fracctl/fraccore.hpp"
#include "fracctl/optctrl.hpp"
#include "fracctl/problem.hpp"
#include "fracctl/stepsolve.hpp"

using namespace fracctl;

namespace {

ProblemConfig bench_config(std::size_t n_elems, std::size_t steps) {
  ProblemConfig cfg;
  cfg.alpha = FractionalOrder(0.5);
  cfg.n_elems = n_elems;
  cfg.steps = steps;
  cfg.initial_state = [](double x) { return std::sin(std::numbers::pi * x); };
  cfg.nonlinearity = Nonlinearity::cubic_decay(1.0);
  cfg.cost.epsilon = 1e-2;
  cfg.cost.target = [](double x) { return x * (1.0 - x); };
  return cfg;
}

void BM_MittagLeffler(benchmark::State& state) {
  const double z = -static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ml_eval(0.6, 1.0, z));
}
BENCHMARK(BM_MittagLeffler)->Arg(1)->Arg(20)->Arg(200);

void BM_L1Solve(benchmark::State& state) {
  const Problem p = discretize(bench_config(64, static_cast<std::size_t>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(solve_state_l1(p, p.control, p.initial_state));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_L1Solve)->RangeMultiplier(2)->Range(32, 512)->Complexity()->Unit(benchmark::kMillisecond);

void BM_AdjointGradient(benchmark::State& state) {
  const Problem p = discretize(bench_config(64, static_cast<std::size_t>(state.range(0))));
  const Trajectory v = Trajectory::zeros(p.grid, p.dofs());
  for (auto _ : state) benchmark::DoNotOptimize(gradient_adjoint(p, v));
}
BENCHMARK(BM_AdjointGradient)->RangeMultiplier(2)->Range(32, 256)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
