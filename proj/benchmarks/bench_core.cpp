#include <benchmark/benchmark.h>

#include <vector>

#include "rda/asymptotics.hpp"
#include "rda/forward.hpp"
#include "rda/harness.hpp"
#include "rda/numerics.hpp"
#include "rda/regularize.hpp"

namespace {

rda::PenalizedFitProblem noisy_parabola(int k) {
  rda::PenalizedFitProblem problem;
  rda::UniformStream stream(7);
  for (int i = 0; i <= k; ++i) {
    const double x = static_cast<double>(i) / k;
    problem.nodes.push_back(x);
    problem.data.push_back(x * x + 1.5 +
                           1e-2 * (2.0 * stream.next01() - 1.0));
  }
  return problem;
}

void BM_composite_eval(benchmark::State& state) {
  const rda::AsymptoticSolution asym(rda::example2_spec());
  rda::UniformStream stream(3);
  for (auto _ : state) {
    const double x = stream.next01();
    const double t = asym.period() * stream.next01();
    benchmark::DoNotOptimize(asym(x, t));
  }
}
BENCHMARK(BM_composite_eval);

void BM_transition_root(benchmark::State& state) {
  const auto outer = rda::outer_solutions(rda::example2_spec());
  rda::UniformStream stream(5);
  for (auto _ : state) {
    const double t = 2.0 * 3.141592653589793 * stream.next01();
    benchmark::DoNotOptimize(rda::find_transition_root(outer, t));
  }
}
BENCHMARK(BM_transition_root);

void BM_penalized_fit(benchmark::State& state) {
  const auto problem = noisy_parabola(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(rda::fit_penalized(problem, 1e-6));
}
BENCHMARK(BM_penalized_fit)->Arg(50)->Arg(200)->Arg(800);

void BM_discrepancy_selection(benchmark::State& state) {
  const auto problem = noisy_parabola(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(rda::fit_discrepancy(problem, 1e-2));
}
BENCHMARK(BM_discrepancy_selection)->Arg(50)->Arg(200);

void BM_forward_period(benchmark::State& state) {
  const rda::ProblemSpec spec = rda::example1_spec();
  const rda::AsymptoticSolution asym(spec);
  rda::ForwardOptions opts;
  opts.nx = static_cast<int>(state.range(0));
  opts.nt = 101;
  opts.max_periods = 1;
  opts.require_periodic = false;
  for (auto _ : state)
    benchmark::DoNotOptimize(rda::solve_forward(spec, asym, opts));
}
BENCHMARK(BM_forward_period)->Unit(benchmark::kMillisecond)->Arg(201)->Arg(401);

}  // namespace

BENCHMARK_MAIN();
