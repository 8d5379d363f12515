#include "rda/forward.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rda/errors.hpp"
#include "rda/numerics.hpp"

namespace rda {

double discrete_face_flux(double mu, const std::vector<double>& x,
                          const std::vector<double>& slice, int face) {
  const double h = x[face + 1] - x[face];
  const double diffusive = mu * (slice[face + 1] - slice[face]) / h;
  // Advection speed in conservative form is -u; a negative face average
  // means the wind blows to the right, so the left state is upwind.
  const double bar = 0.5 * (slice[face] + slice[face + 1]);
  const double up = (bar < 0.0) ? slice[face] : slice[face + 1];
  return diffusive + 0.5 * up * up;
}

namespace {

struct StepContext {
  const ProblemSpec* spec;
  const std::vector<double>* x;
  double dt;
  double newton_tol;
  int max_newton;
};

// Residual of one implicit step at interior node i, in PDE units:
//   mu * dudt_i - (H_{i+1/2} - H_{i-1/2}) / w_i + F(x_i) v_i = 0.
// `dudt` carries the BDF combination of time levels.
void assemble(const StepContext& ctx, const std::vector<double>& v,
              const std::vector<double>& bdf_rhs, double bdf_lead,
              double t_new, std::vector<double>* residual,
              std::vector<double>* jl, std::vector<double>* jd,
              std::vector<double>* ju) {
  const std::vector<double>& x = *ctx.x;
  const int K = static_cast<int>(x.size()) - 1;
  const double mu = ctx.spec->mu;

  for (int i = 1; i < K; ++i) {
    const double w = 0.5 * (x[i + 1] - x[i - 1]);
    const double hl = x[i] - x[i - 1];
    const double hr = x[i + 1] - x[i];
    const double f = ctx.spec->field(x[i], t_new);

    const double bar_l = 0.5 * (v[i - 1] + v[i]);
    const double bar_r = 0.5 * (v[i] + v[i + 1]);
    const bool up_l_left = bar_l < 0.0;   // upwind state of the left face
    const bool up_r_left = bar_r < 0.0;   // upwind state of the right face
    const double ul = up_l_left ? v[i - 1] : v[i];
    const double ur = up_r_left ? v[i] : v[i + 1];

    const double flux_l = mu * (v[i] - v[i - 1]) / hl + 0.5 * ul * ul;
    const double flux_r = mu * (v[i + 1] - v[i]) / hr + 0.5 * ur * ur;

    const double dudt = bdf_lead * v[i] + bdf_rhs[i];
    (*residual)[i] = mu * dudt / ctx.dt - (flux_r - flux_l) / w + f * v[i];

    // Jacobian rows; the advective derivative follows the active upwind state.
    double dflux_l_dm1 = -mu / hl + (up_l_left ? ul : 0.0);
    double dflux_l_d0 = mu / hl + (up_l_left ? 0.0 : ul);
    double dflux_r_d0 = -mu / hr + (up_r_left ? ur : 0.0);
    double dflux_r_dp1 = mu / hr + (up_r_left ? 0.0 : ur);

    (*jl)[i] = dflux_l_dm1 / w;
    (*jd)[i] = mu * bdf_lead / ctx.dt + f - (dflux_r_d0 - dflux_l_d0) / w;
    (*ju)[i] = -dflux_r_dp1 / w;
  }
}

double inf_norm_interior(const std::vector<double>& r, int K) {
  double m = 0.0;
  for (int i = 1; i < K; ++i) m = std::max(m, std::abs(r[i]));
  return m;
}

// One implicit step; v enters as the initial guess (previous slab) with the
// new boundary values already written, leaves as the converged state.
long newton_step(const StepContext& ctx, const std::vector<double>& bdf_rhs,
                 double bdf_lead, double t_new, std::vector<double>* v) {
  const int K = static_cast<int>(ctx.x->size()) - 1;
  std::vector<double> residual(K + 1, 0.0), jl(K + 1), jd(K + 1), ju(K + 1);

  double vmax = 1.0;
  for (double vi : *v) vmax = std::max(vmax, std::abs(vi));
  double hmin = (*ctx.x)[1] - (*ctx.x)[0];
  for (int i = 1; i < K; ++i) hmin = std::min(hmin, (*ctx.x)[i + 1] - (*ctx.x)[i]);
  // The residual is the pointwise PDE defect: face-flux differences divided by
  // the cell volume.  Rounding in a flux of size mu*|u_x| + u^2/2 therefore
  // shows up amplified by 1/h, and no iteration can push the norm below that
  // floor on fine grids.
  const double roundoff_floor =
      64.0 * std::numeric_limits<double>::epsilon() *
      (ctx.spec->mu * vmax / hmin + 0.5 * vmax * vmax) / hmin;
  const double tol = std::max(
      ctx.newton_tol * (1.0 + ctx.spec->mu * vmax / ctx.dt), roundoff_floor);

  long iterations = 0;
  assemble(ctx, *v, bdf_rhs, bdf_lead, t_new, &residual, &jl, &jd, &ju);
  double rnorm = inf_norm_interior(residual, K);
  for (int it = 0; it < ctx.max_newton; ++it) {
    if (rnorm <= tol) return iterations;
    ++iterations;
    std::vector<double> lower(K - 1), diag(K - 1), upper(K - 1), rhs(K - 1);
    for (int i = 1; i < K; ++i) {
      lower[i - 1] = (i == 1) ? 0.0 : jl[i];
      diag[i - 1] = jd[i];
      upper[i - 1] = (i == K - 1) ? 0.0 : ju[i];
      rhs[i - 1] = -residual[i];
    }
    const std::vector<double> delta =
        solve_tridiagonal(std::move(lower), std::move(diag), std::move(upper),
                          std::move(rhs));
    // Backtracking line search on the residual norm.
    double alpha = 1.0;
    std::vector<double> trial = *v;
    double trial_norm = rnorm;
    for (int ls = 0; ls < 9; ++ls) {
      for (int i = 1; i < K; ++i) trial[i] = (*v)[i] + alpha * delta[i - 1];
      assemble(ctx, trial, bdf_rhs, bdf_lead, t_new, &residual, &jl, &jd, &ju);
      trial_norm = inf_norm_interior(residual, K);
      if (trial_norm < rnorm || trial_norm <= tol) break;
      alpha *= 0.5;
    }
    *v = trial;
    rnorm = trial_norm;
  }
  if (rnorm > tol)
    fail(ErrorCode::NewtonDivergence,
         "solve_forward: Newton stalled at t = " + format_double(t_new) +
             " with residual " + format_double(rnorm));
  return iterations;
}

}  // namespace

GridSolution solve_forward(const ProblemSpec& spec,
                           const AsymptoticSolution& asym,
                           const ForwardOptions& opts) {
  if (opts.nx < 5 || opts.nt < 3)
    fail(ErrorCode::InvalidArgument, "solve_forward: grid too small");
  if (opts.bdf_order < 1 || opts.bdf_order > 2)
    fail(ErrorCode::InvalidArgument, "solve_forward: bdf_order must be 1 or 2");
  const double T = spec.boundary.period;

  std::vector<double> x;
  if (!opts.x_override.empty()) {
    x = opts.x_override;
    if (x.size() < 5 || x.front() != 0.0 || x.back() != 1.0)
      fail(ErrorCode::InvalidArgument, "solve_forward: bad x_override");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (!(x[i + 1] > x[i]))
        fail(ErrorCode::InvalidArgument, "solve_forward: bad x_override");
  } else {
    x = SpaceTimeGrid::uniform(opts.nx, 2, 1.0).x;
  }
  const int K = static_cast<int>(x.size()) - 1;
  const int J = opts.nt - 1;
  const double dt = T / J;

  // The scheme needs several cells across the front at every time.
  int min_inside = 1 << 30;
  for (int s = 0; s <= 32; ++s) {
    const LayerBand band = asym.layer_band(T * s / 32.0);
    int inside = 0;
    for (double xi : x)
      if (xi > band.lo && xi < band.hi) ++inside;
    min_inside = std::min(min_inside, inside);
  }
  if (min_inside < opts.min_layer_cells)
    fail(ErrorCode::LayerUnresolved,
         "solve_forward: only " + std::to_string(min_inside) +
             " nodes inside the transition band, need " +
             std::to_string(opts.min_layer_cells));

  GridSolution sol;
  sol.x = x;
  sol.t.resize(J + 1);
  for (int j = 0; j <= J; ++j) sol.t[j] = T * j / J;
  sol.scheme = (opts.bdf_order == 2) ? "bdf2" : "bdf1";

  // Initial state at t = 0.
  std::vector<double> state(K + 1);
  if (opts.initial_state) {
    for (int i = 0; i <= K; ++i) state[i] = opts.initial_state(x[i]);
  } else {
    for (int i = 0; i <= K; ++i) state[i] = asym(x[i], 0.0);
  }
  state[0] = spec.boundary.u0(0.0);
  state[K] = spec.boundary.u1(0.0);

  StepContext ctx{&spec, &x, dt, opts.newton_tol, opts.max_newton};
  std::vector<std::vector<double>> slices(J + 1);
  std::vector<double> prev2;  // state two steps back, for BDF2
  bool have_history = false;  // prev2 valid (carried across periods)
  long total_newton = 0;

  int period = 0;
  for (period = 1; period <= opts.max_periods; ++period) {
    slices[0] = state;
    for (int j = 1; j <= J; ++j) {
      const double t_new = sol.t[j];
      std::vector<double> v = slices[j - 1];
      v[0] = spec.boundary.u0(t_new);
      v[K] = spec.boundary.u1(t_new);

      std::vector<double> bdf_rhs(K + 1, 0.0);
      double bdf_lead;
      const std::vector<double>& un = slices[j - 1];
      if (opts.bdf_order == 2 && have_history) {
        bdf_lead = 1.5;
        for (int i = 1; i < K; ++i)
          bdf_rhs[i] = -2.0 * un[i] + 0.5 * prev2[i];
      } else {
        bdf_lead = 1.0;
        for (int i = 1; i < K; ++i) bdf_rhs[i] = -un[i];
      }

      total_newton += newton_step(ctx, bdf_rhs, bdf_lead, t_new, &v);
      prev2 = un;
      have_history = true;
      slices[j] = std::move(v);
    }

    double residual = 0.0, umax = 1.0;
    for (int i = 0; i <= K; ++i) {
      residual = std::max(residual, std::abs(slices[J][i] - slices[0][i]));
      umax = std::max(umax, std::abs(slices[J][i]));
    }
    sol.periodicity_residual = residual;
    if (residual <= opts.periodic_tol * umax) break;
    state = slices[J];
    // keep prev2 from the end of this period so BDF2 stays second order
  }

  if (period > opts.max_periods) {
    if (opts.require_periodic)
      fail(ErrorCode::NoPeriodicConvergence,
           "solve_forward: no periodic regime after " +
               std::to_string(opts.max_periods) + " periods (residual " +
               format_double(sol.periodicity_residual) + ")");
    period = opts.max_periods;
  }

  sol.periods_marched = period;
  sol.newton_iterations = total_newton;
  sol.u = std::move(slices);
  // Boundary columns carry the traces exactly.
  for (int j = 0; j <= J; ++j) {
    sol.u[j][0] = spec.boundary.u0(sol.t[j]);
    sol.u[j][K] = spec.boundary.u1(sol.t[j]);
  }
  return sol;
}

double GridSolution::value(double xq, double tq) const {
  const double xs = 1e-12, ts = 1e-12 * (t.back() - t.front());
  if (!(xq >= x.front() - xs && xq <= x.back() + xs) ||
      !(tq >= t.front() - ts && tq <= t.back() + ts))
    fail(ErrorCode::OutOfDomain, "GridSolution::value: query outside grid");
  const double xc = std::clamp(xq, x.front(), x.back());
  const double tc = std::clamp(tq, t.front(), t.back());

  int i = static_cast<int>(std::upper_bound(x.begin(), x.end(), xc) -
                           x.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(x.size()) - 2);
  int j = static_cast<int>(std::upper_bound(t.begin(), t.end(), tc) -
                           t.begin()) - 1;
  j = std::clamp(j, 0, static_cast<int>(t.size()) - 2);

  const double ax = (xc - x[i]) / (x[i + 1] - x[i]);
  const double at = (tc - t[j]) / (t[j + 1] - t[j]);
  return (1 - ax) * (1 - at) * u[j][i] + ax * (1 - at) * u[j][i + 1] +
         (1 - ax) * at * u[j + 1][i] + ax * at * u[j + 1][i + 1];
}

double periodicity_residual(const GridSolution& sol) {
  double r = 0.0;
  for (std::size_t i = 0; i < sol.x.size(); ++i)
    r = std::max(r, std::abs(sol.u.back()[i] - sol.u.front()[i]));
  return r;
}

TransitionPoint detect_transition(const GridSolution& sol,
                                  const AsymptoticSolution& asym, double t) {
  const double T = asym.period();
  double tw = std::fmod(t, T);
  if (tw < 0) tw += T;

  const LayerBand band = asym.layer_band(tw);
  const double lo = std::max(band.lo, sol.x.front());
  const double hi = std::min(band.hi, sol.x.back());
  if (!(hi > lo))
    fail(ErrorCode::NoSignChange, "detect_transition: empty band");

  auto g = [&](double xq) {
    return sol.value(xq, tw) - asym.outer().mid(xq, tw);
  };

  // Scan the band on the solution grid plus the band edges.
  std::vector<double> probes;
  probes.push_back(lo);
  for (double xi : sol.x)
    if (xi > lo && xi < hi) probes.push_back(xi);
  probes.push_back(hi);

  TransitionPoint tp;
  double prev_x = probes[0], prev_g = g(prev_x);
  double first_lo = 0.0, first_hi = 0.0;
  for (std::size_t idx = 1; idx < probes.size(); ++idx) {
    const double cur_x = probes[idx], cur_g = g(cur_x);
    if (prev_g == 0.0 || prev_g * cur_g < 0.0) {
      if (tp.bracket_count == 0) {
        first_lo = prev_x;
        first_hi = cur_x;
      }
      ++tp.bracket_count;
    }
    prev_x = cur_x;
    prev_g = cur_g;
  }
  if (prev_g == 0.0) {
    if (tp.bracket_count == 0) {
      first_lo = prev_x;
      first_hi = prev_x;
    }
    ++tp.bracket_count;
  }
  if (tp.bracket_count == 0)
    fail(ErrorCode::NoSignChange,
         "detect_transition: no crossing of the branch midpoint in the band");
  tp.ambiguous = tp.bracket_count > 1;
  tp.x = (first_lo == first_hi) ? first_lo : bisect(g, first_lo, first_hi, 80);
  tp.residual = std::abs(g(tp.x));
  return tp;
}

std::vector<double> spatial_gradient(const GridSolution& sol, int j) {
  const int n = static_cast<int>(sol.x.size());
  if (j < 0 || j >= static_cast<int>(sol.t.size()))
    fail(ErrorCode::InvalidArgument, "spatial_gradient: bad slab index");
  if (n < 5)
    fail(ErrorCode::InvalidArgument, "spatial_gradient: need 5 nodes");
  const double h = (sol.x.back() - sol.x.front()) / (n - 1);
  const std::vector<double>& v = sol.u[j];
  std::vector<double> d(n);
  d[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h);
  d[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h);
  for (int i = 2; i < n - 2; ++i)
    d[i] = (v[i - 2] - 8 * v[i - 1] + 8 * v[i + 1] - v[i + 2]) / (12 * h);
  d[n - 2] =
      (3 * v[n - 1] + 10 * v[n - 2] - 18 * v[n - 3] + 6 * v[n - 4] - v[n - 5]) /
      (12 * h);
  d[n - 1] = (25 * v[n - 1] - 48 * v[n - 2] + 36 * v[n - 3] - 16 * v[n - 4] +
              3 * v[n - 5]) /
             (12 * h);
  return d;
}

}  // namespace rda
