#pragma once

#include <utility>
#include <vector>

#include "rda/model.hpp"

namespace rda {

enum class Side { Left, Right };

// Reduced solutions away from the moving front: the left branch integrates
// the field from the x=0 trace, the right branch from the x=1 trace.
class OuterBranches {
 public:
  explicit OuterBranches(ProblemSpec spec) : spec_(std::move(spec)) {}

  double left(double x, double t) const {
    return spec_.boundary.u0(t) + spec_.field.integral(0.0, x, t);
  }
  double right(double x, double t) const {
    return spec_.boundary.u1(t) - spec_.field.integral(x, 1.0, t);
  }
  double mid(double x, double t) const {
    return 0.5 * (left(x, t) + right(x, t));
  }
  // Factor-free root function: left^2 - right^2. Its zero in (0,1) locates
  // the front center; the slope there is 2 F (left - right) < 0.
  double square_gap(double x, double t) const {
    const double l = left(x, t), r = right(x, t);
    return l * l - r * r;
  }
  double square_gap_slope(double x, double t) const {
    return 2.0 * spec_.field(x, t) * (left(x, t) - right(x, t));
  }
  const ProblemSpec& spec() const { return spec_; }

 private:
  ProblemSpec spec_;
};

inline OuterBranches outer_solutions(const ProblemSpec& spec) {
  return OuterBranches(spec);
}

struct TransitionRoot {
  double x0 = 0.0;
  std::vector<std::pair<double, double>> brackets;  // all sign changes found
  bool ambiguous = false;                           // more than one bracket
};

// Scans (0,1) for sign changes of the square gap at fixed t and polishes the
// leftmost bracket (bisection + Newton). Throws NoRootFound when the scan
// finds no sign change.
TransitionRoot find_transition_root(const OuterBranches& outer, double t,
                                    int scan_points = 257);

// Leftmost root only. |square_gap| at the result is below 1e-12 * scale.
double transition_curve_zero(const OuterBranches& outer, double t);

struct LayerBand {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

// Logistic profile of an inner correction: value(xi) = numerator /
// (1 - shape * exp(rate * xi)). `rate` is the outer branch value at the
// front center, so the profile decays into its own side.
struct InnerCoefficients {
  double numerator = 0.0;
  double shape = 0.0;
  double rate = 0.0;
};

// Leading-order matched composite over one period: outer branch plus inner
// correction on each side of the front center x0(t). Construction caches
// x0 on a uniform t grid; queries polish the cached guess back to full
// accuracy, so evaluation is exact at any t (periodically extended).
class AsymptoticSolution {
 public:
  explicit AsymptoticSolution(ProblemSpec spec, int t_cache_nodes = 257);

  double mu() const { return spec_.mu; }
  double period() const { return spec_.boundary.period; }
  const ProblemSpec& spec() const { return spec_; }
  const OuterBranches& outer() const { return outer_; }

  double transition_center(double t) const;        // x0(t)
  double transition_center_slope(double t) const;  // d x0/dt (diagnostic)

  InnerCoefficients inner_coefficients(Side side, double t) const;
  // Inner correction in the stretched coordinate xi = (x - x0)/mu.
  // Throws WrongSide when xi points into the other side.
  double inner_correction(Side side, double xi, double t) const;
  double inner_slope(Side side, double xi, double t) const;  // d/dxi

  // Composite value; the tie x == x0 evaluates the left branch.
  double operator()(double x, double t) const;
  // d/dx of the composite (field value plus stretched inner slope).
  double space_slope(double x, double t) const;

  // Band where the inner corrections exceed `threshold` in magnitude
  // (threshold <= 0 means the default mu^2).
  LayerBand layer_band(double t, double threshold = 0.0) const;

 private:
  ProblemSpec spec_;
  OuterBranches outer_;
  std::vector<double> cache_t_;
  std::vector<double> cache_x0_;
  bool temporal_closed_form_ = false;

  double wrap_time(double t) const;
  double polish_root(double guess, double t) const;
};

inline AsymptoticSolution composite_u0(const ProblemSpec& spec,
                                       int t_cache_nodes = 257) {
  return AsymptoticSolution(spec, t_cache_nodes);
}

inline double inner_correction(const AsymptoticSolution& asym, Side side,
                               double xi, double t) {
  return asym.inner_correction(side, xi, t);
}

// Throws BoundsOutOfDomain if the band leaves [0,1].
LayerBand layer_bounds(const AsymptoticSolution& asym, double t,
                       double threshold = 0.0);

}  // namespace rda
