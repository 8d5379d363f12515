#include "doctest.h"

#include <cmath>
#include <vector>

#include "rda/asymptotics.hpp"
#include "rda/errors.hpp"
#include "rda/forward.hpp"

using namespace rda;

namespace {

ProblemSpec quadratic_benchmark(double mu = 0.04) {
  ProblemSpec spec;
  spec.field = CoefficientField::spatial_polynomial({1.5, 0.0, 1.0});
  spec.boundary.u0 = TimeTrace::trig(-4.0, 0.0, 0.0);
  spec.boundary.u1 = TimeTrace::trig(4.3, 0.0, 0.0);
  spec.boundary.period = 2.0;
  spec.mu = mu;
  return spec;
}

// One period on a small grid, shared by the checks below.
const GridSolution& small_solution() {
  static const GridSolution sol = [] {
    const ProblemSpec spec = quadratic_benchmark();
    const AsymptoticSolution asym(spec);
    ForwardOptions opts;
    opts.nx = 201;
    opts.nt = 101;
    opts.require_periodic = false;
    opts.max_periods = 1;
    return solve_forward(spec, asym, opts);
  }();
  return sol;
}

// Weighted interior sum of the implicit-step balance; must telescope to the
// difference of the end-face fluxes evaluated on the new slab.
double conservation_defect(const ProblemSpec& spec, const GridSolution& sol,
                           int j_new, double lead,
                           const std::vector<double>& history_weights) {
  const std::vector<double>& x = sol.x;
  const int K = static_cast<int>(x.size()) - 1;
  const double dt = sol.t[j_new] - sol.t[j_new - 1];
  const std::vector<double>& v = sol.u[j_new];

  double weighted = 0.0;
  for (int i = 1; i < K; ++i) {
    const double w = 0.5 * (x[i + 1] - x[i - 1]);
    double dudt = lead * v[i];
    for (std::size_t h = 0; h < history_weights.size(); ++h)
      dudt += history_weights[h] * sol.u[j_new - 1 - h][i];
    const double f = spec.field(x[i], sol.t[j_new]);
    weighted += w * (spec.mu * dudt / dt + f * v[i]);
  }
  const double flux_out = discrete_face_flux(spec.mu, x, v, K - 1);
  const double flux_in = discrete_face_flux(spec.mu, x, v, 0);
  return std::abs(weighted - (flux_out - flux_in));
}

}  // namespace

TEST_SUITE("forward") {

TEST_CASE("boundary columns carry the exact traces") {
  const ProblemSpec spec = quadratic_benchmark();
  const GridSolution& sol = small_solution();
  const int K = static_cast<int>(sol.x.size()) - 1;
  for (std::size_t j = 0; j < sol.t.size(); ++j) {
    CHECK(sol.u[j][0] == spec.boundary.u0(sol.t[j]));
    CHECK(sol.u[j][K] == spec.boundary.u1(sol.t[j]));
  }
}

TEST_CASE("the first slab is the matched composite at t = 0") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  const GridSolution& sol = small_solution();
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    CHECK(sol.u[0][i] == asym(sol.x[i], 0.0));
}

TEST_CASE("implicit steps conserve the discrete flux balance") {
  const ProblemSpec spec = quadratic_benchmark();
  const GridSolution& sol = small_solution();
  // first step is backward Euler: dudt = v - u^0
  CHECK(conservation_defect(spec, sol, 1, 1.0, {-1.0}) < 1e-8);
  // later steps are BDF2: dudt = 1.5 v - 2 u^{j-1} + 0.5 u^{j-2}
  for (int j : {2, 25, 60, 100})
    CHECK(conservation_defect(spec, sol, j, 1.5, {-2.0, 0.5}) < 1e-8);
}

TEST_CASE("backward Euler scheme conserves the same balance") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  ForwardOptions opts;
  opts.nx = 101;
  opts.nt = 51;
  opts.bdf_order = 1;
  opts.require_periodic = false;
  opts.max_periods = 1;
  const GridSolution sol = solve_forward(spec, asym, opts);
  CHECK(sol.scheme == "bdf1");
  for (int j : {1, 10, 50})
    CHECK(conservation_defect(spec, sol, j, 1.0, {-1.0}) < 1e-8);
}

TEST_CASE("the periodic march reaches the requested residual") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  ForwardOptions opts;
  opts.nx = 201;
  opts.nt = 101;
  const GridSolution sol = solve_forward(spec, asym, opts);
  double umax = 0.0;
  for (const auto& slab : sol.u)
    for (double v : slab) umax = std::max(umax, std::abs(v));
  CHECK(periodicity_residual(sol) <= opts.periodic_tol * umax);
  CHECK(sol.periods_marched >= 1);
  CHECK(sol.newton_iterations > 0);
  CHECK(sol.scheme == "bdf2");
}

TEST_CASE("refinement moves the solution toward the composite") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  const auto error_at = [&](int nx, int nt) {
    ForwardOptions opts;
    opts.nx = nx;
    opts.nt = nt;
    const GridSolution sol = solve_forward(spec, asym, opts);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < sol.t.size(); ++j)
      for (std::size_t i = 0; i < sol.x.size(); ++i) {
        const double ref = asym(sol.x[i], sol.t[j]);
        num += (sol.u[j][i] - ref) * (sol.u[j][i] - ref);
        den += ref * ref;
      }
    return std::sqrt(num / den);
  };
  const double coarse = error_at(101, 51);
  const double fine = error_at(201, 101);
  CHECK(coarse < 0.1);
  CHECK(fine < coarse * 1.2);  // refinement must not drift away
}

TEST_CASE("transition detection lands near the front center") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  const GridSolution& sol = small_solution();
  for (double t : {0.3, 1.0, 1.7}) {
    const TransitionPoint tp = detect_transition(sol, asym, t);
    CHECK(std::abs(tp.x - asym.transition_center(t)) < 4.0 * spec.mu);
    CHECK_FALSE(tp.ambiguous);
    CHECK(tp.bracket_count == 1);
  }
}

TEST_CASE("bilinear sampling is exact on the grid and guarded off it") {
  const GridSolution& sol = small_solution();
  CHECK(sol.value(sol.x[17], sol.t[3]) == sol.u[3][17]);
  const double mid_x = 0.5 * (sol.x[10] + sol.x[11]);
  const double expected = 0.5 * (sol.u[5][10] + sol.u[5][11]);
  CHECK(sol.value(mid_x, sol.t[5]) == doctest::Approx(expected).epsilon(1e-13));
  CHECK_THROWS_AS(sol.value(-0.01, 0.5), Error);
  CHECK_THROWS_AS(sol.value(0.5, sol.t.back() + 0.1), Error);
}

TEST_CASE("fourth-order gradients on a manufactured slab") {
  const auto gradient_error = [](int nx) {
    GridSolution sol;
    sol.t = {0.0, 1.0};
    sol.x.resize(nx);
    std::vector<double> row(nx);
    for (int i = 0; i < nx; ++i) {
      sol.x[i] = static_cast<double>(i) / (nx - 1);
      row[i] = std::sin(M_PI * sol.x[i]);
    }
    sol.u = {row, row};
    const std::vector<double> grad = spatial_gradient(sol, 0);
    double worst = 0.0;
    for (int i = 0; i < nx; ++i)
      worst = std::max(worst,
                       std::abs(grad[i] - M_PI * std::cos(M_PI * sol.x[i])));
    return worst;
  };
  const double coarse = gradient_error(41);
  const double fine = gradient_error(81);
  CHECK(coarse / fine > 8.0);
  CHECK(fine < 1e-5);
}

TEST_CASE("under-resolved layers are rejected up front") {
  ProblemSpec spec = quadratic_benchmark(0.002);
  const AsymptoticSolution asym(spec);
  ForwardOptions opts;
  opts.nx = 41;
  opts.nt = 51;
  CHECK_THROWS_AS(solve_forward(spec, asym, opts), Error);
  try {
    solve_forward(spec, asym, opts);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LayerUnresolved);
  }
}

TEST_CASE("tiny grids are rejected as invalid arguments") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  ForwardOptions opts;
  opts.nx = 4;
  CHECK_THROWS_AS(solve_forward(spec, asym, opts), Error);
}

TEST_CASE("a graded custom grid solves and keeps the exact boundaries") {
  const ProblemSpec spec = quadratic_benchmark();
  const AsymptoticSolution asym(spec);
  ForwardOptions opts;
  opts.nt = 101;
  opts.require_periodic = false;
  opts.max_periods = 1;
  // three uniform pieces, denser inside the layer band
  for (int i = 0; i <= 40; ++i)
    opts.x_override.push_back(0.35 * i / 40.0);
  for (int i = 1; i <= 120; ++i)
    opts.x_override.push_back(0.35 + 0.3 * i / 120.0);
  for (int i = 1; i <= 40; ++i)
    opts.x_override.push_back(0.65 + 0.35 * i / 40.0);
  opts.nx = static_cast<int>(opts.x_override.size());
  const GridSolution sol = solve_forward(spec, asym, opts);
  CHECK(sol.x.size() == opts.x_override.size());
  const int K = static_cast<int>(sol.x.size()) - 1;
  for (std::size_t j = 0; j < sol.t.size(); ++j) {
    CHECK(sol.u[j][0] == spec.boundary.u0(sol.t[j]));
    CHECK(sol.u[j][K] == spec.boundary.u1(sol.t[j]));
  }
  // still conservative on the non-uniform cells
  CHECK(conservation_defect(spec, sol, 1, 1.0, {-1.0}) < 1e-8);
  CHECK(conservation_defect(spec, sol, 40, 1.5, {-2.0, 0.5}) < 1e-8);
}

}  // TEST_SUITE
