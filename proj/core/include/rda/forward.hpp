#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rda/asymptotics.hpp"
#include "rda/model.hpp"

namespace rda {

struct ForwardOptions {
  int nx = 801;                    // spatial nodes including boundaries
  int nt = 401;                    // time nodes per period including ends
  int bdf_order = 2;               // 1 or 2; order 2 starts with one BDF1 step
  double newton_tol = 1e-10;       // residual drop target per implicit step
  int max_newton = 25;
  double periodic_tol = 1e-6;      // relative to max |u|
  int max_periods = 64;
  int min_layer_cells = 8;         // nodes required inside the layer band
  bool require_periodic = true;    // false: return after max_periods anyway
  std::vector<double> x_override;  // optional non-uniform spatial nodes
  // optional initial state; defaults to the matched composite at t = 0
  std::function<double(double)> initial_state;
};

struct GridSolution {
  std::vector<double> x;                // spatial nodes
  std::vector<double> t;                // one period, t[0] = 0, t.back() = T
  std::vector<std::vector<double>> u;   // u[j][i], slab j, node i
  double periodicity_residual = 0.0;    // max_i |u[J][i] - u[0][i]|
  int periods_marched = 0;
  long newton_iterations = 0;
  std::string scheme;

  // Bilinear interpolation in (x, t); throws OutOfDomain outside the grid.
  double value(double xq, double tq) const;
};

// Marches the implicit finite-volume scheme period by period, starting from
// the composite at t = 0, until the start and end slabs agree to
// periodic_tol * max|u|. Throws NoPeriodicConvergence / NewtonDivergence /
// LayerUnresolved.
GridSolution solve_forward(const ProblemSpec& spec,
                           const AsymptoticSolution& asym,
                           const ForwardOptions& opts = {});

double periodicity_residual(const GridSolution& sol);

// Total discrete flux through the face between nodes `face` and `face`+1:
// diffusive part plus the upwinded advective part. Exposed so conservation
// checks can reuse the scheme's exact flux rule.
double discrete_face_flux(double mu, const std::vector<double>& x,
                          const std::vector<double>& slice, int face);

struct TransitionPoint {
  double x = 0.0;
  double residual = 0.0;  // |u - branch midpoint| at the root
  int bracket_count = 0;
  bool ambiguous = false;  // more than one sign change inside the band
};

// Location where the interpolated solution crosses the outer-branch midpoint
// inside the layer band at time t (periodically wrapped). Leftmost crossing;
// throws NoSignChange when the band contains none.
TransitionPoint detect_transition(const GridSolution& sol,
                                  const AsymptoticSolution& asym, double t);

// Fourth-order finite-difference x-derivative of slab j (uniform grids).
std::vector<double> spatial_gradient(const GridSolution& sol, int j);

}  // namespace rda
