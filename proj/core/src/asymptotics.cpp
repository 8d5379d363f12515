#include "rda/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "rda/errors.hpp"
#include "rda/numerics.hpp"

namespace rda {

namespace {

// |square_gap| tolerance is relative to the squared branch scale.
double gap_scale(const OuterBranches& outer, double x, double t) {
  const double l = outer.left(x, t), r = outer.right(x, t);
  return std::max(1.0, std::max(l * l, r * r));
}

double polish_newton(const OuterBranches& outer, double t, double x0,
                     double lo, double hi) {
  for (int it = 0; it < 60; ++it) {
    const double g = outer.square_gap(x0, t);
    if (std::abs(g) <= 1e-13 * gap_scale(outer, x0, t)) break;
    const double dg = outer.square_gap_slope(x0, t);
    if (dg == 0.0) break;
    double next = x0 - g / dg;
    if (!(next > lo && next < hi)) break;  // keep inside the bracket
    if (next == x0) break;
    x0 = next;
  }
  return x0;
}

}  // namespace

TransitionRoot find_transition_root(const OuterBranches& outer, double t,
                                    int scan_points) {
  TransitionRoot result;
  auto g = [&outer, t](double x) { return outer.square_gap(x, t); };
  result.brackets = scan_sign_changes(g, 0.0, 1.0, scan_points);
  if (result.brackets.empty())
    fail(ErrorCode::NoRootFound,
         "find_transition_root: no sign change of the square gap in (0,1)");
  result.ambiguous = result.brackets.size() > 1;
  const auto [lo, hi] = result.brackets.front();
  const double seed = bisect(g, lo, hi, 80);
  result.x0 = polish_newton(outer, t, seed, 0.0, 1.0);
  return result;
}

double transition_curve_zero(const OuterBranches& outer, double t) {
  return find_transition_root(outer, t).x0;
}

AsymptoticSolution::AsymptoticSolution(ProblemSpec spec, int t_cache_nodes)
    : spec_(std::move(spec)), outer_(spec_) {
  if (t_cache_nodes < 4)
    fail(ErrorCode::InvalidArgument, "AsymptoticSolution: cache too small");
  temporal_closed_form_ = spec_.field.kind() == FieldKind::TemporalOnly;
  const double T = spec_.boundary.period;
  cache_t_.resize(t_cache_nodes);
  cache_x0_.resize(t_cache_nodes);
  for (int j = 0; j < t_cache_nodes; ++j) {
    cache_t_[j] = T * static_cast<double>(j) / (t_cache_nodes - 1);
    if (temporal_closed_form_) {
      cache_x0_[j] = transition_center(cache_t_[j]);
    } else {
      cache_x0_[j] = find_transition_root(outer_, cache_t_[j]).x0;
    }
  }
}

double AsymptoticSolution::wrap_time(double t) const {
  const double T = spec_.boundary.period;
  double s = std::fmod(t, T);
  if (s < 0) s += T;
  return s;
}

double AsymptoticSolution::polish_root(double guess, double t) const {
  double x0 = std::clamp(guess, 1e-12, 1.0 - 1e-12);
  x0 = polish_newton(outer_, t, x0, 0.0, 1.0);
  if (std::abs(outer_.square_gap(x0, t)) >
      1e-10 * gap_scale(outer_, x0, t)) {
    // Newton did not finish from the interpolated guess; fall back to a
    // fresh bracketed solve.
    x0 = find_transition_root(outer_, t).x0;
  }
  return x0;
}

double AsymptoticSolution::transition_center(double t) const {
  if (temporal_closed_form_) {
    const double tv = wrap_time(t);
    const double f = spec_.field.temporal_value(tv);
    if (f == 0.0)
      fail(ErrorCode::ZeroDenominator,
           "transition_center: temporal field vanishes");
    const double x0 =
        -(spec_.boundary.u0(tv) + spec_.boundary.u1(tv) - f) / (2.0 * f);
    if (!(x0 > 0.0 && x0 < 1.0))
      fail(ErrorCode::NoRootFound,
           "transition_center: closed-form root leaves (0,1)");
    return x0;
  }
  const double tv = wrap_time(t);
  if (cache_x0_.empty())
    fail(ErrorCode::InvalidArgument, "transition_center: empty cache");
  const double guess = cubic_interp(cache_t_, cache_x0_, tv);
  return polish_root(guess, tv);
}

double AsymptoticSolution::transition_center_slope(double t) const {
  const double T = spec_.boundary.period;
  const double dt = T / 4096.0;
  return (transition_center(t + dt) - transition_center(t - dt)) / (2.0 * dt);
}

InnerCoefficients AsymptoticSolution::inner_coefficients(Side side,
                                                         double t) const {
  const double x0 = transition_center(t);
  const double pl = outer_.left(x0, t);
  const double pr = outer_.right(x0, t);
  InnerCoefficients c;
  if (side == Side::Left) {
    c.numerator = -2.0 * pl;
    c.shape = (pr + 3.0 * pl) / (pr - pl);
    c.rate = pl;
  } else {
    c.numerator = -2.0 * pr;
    c.shape = (pl + 3.0 * pr) / (pl - pr);
    c.rate = pr;
  }
  return c;
}

double AsymptoticSolution::inner_correction(Side side, double xi,
                                            double t) const {
  if (side == Side::Left && xi > 0.0)
    fail(ErrorCode::WrongSide, "inner_correction: left profile wants xi <= 0");
  if (side == Side::Right && xi < 0.0)
    fail(ErrorCode::WrongSide, "inner_correction: right profile wants xi >= 0");
  const InnerCoefficients c = inner_coefficients(side, t);
  const double e = c.rate * xi;  // >= 0 on the admissible side
  if (e > 700.0) return 0.0;     // fully decayed, exp would overflow
  return c.numerator / (1.0 - c.shape * std::exp(e));
}

double AsymptoticSolution::inner_slope(Side side, double xi, double t) const {
  if (side == Side::Left && xi > 0.0)
    fail(ErrorCode::WrongSide, "inner_slope: left profile wants xi <= 0");
  if (side == Side::Right && xi < 0.0)
    fail(ErrorCode::WrongSide, "inner_slope: right profile wants xi >= 0");
  const InnerCoefficients c = inner_coefficients(side, t);
  const double e = c.rate * xi;
  if (e > 700.0) return 0.0;
  const double ex = std::exp(e);
  const double den = 1.0 - c.shape * ex;
  return c.numerator * c.shape * c.rate * ex / (den * den);
}

double AsymptoticSolution::operator()(double x, double t) const {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
    fail(ErrorCode::OutOfDomain, "composite: x outside [0,1]");
  x = std::clamp(x, 0.0, 1.0);
  const double x0 = transition_center(t);
  const double xi = (x - x0) / spec_.mu;
  if (x <= x0)
    return outer_.left(x, t) + inner_correction(Side::Left, std::min(xi, 0.0), t);
  return outer_.right(x, t) + inner_correction(Side::Right, xi, t);
}

double AsymptoticSolution::space_slope(double x, double t) const {
  if (!(x >= -1e-12 && x <= 1.0 + 1e-12))
    fail(ErrorCode::OutOfDomain, "space_slope: x outside [0,1]");
  x = std::clamp(x, 0.0, 1.0);
  const double x0 = transition_center(t);
  const double xi = (x - x0) / spec_.mu;
  const double stretched =
      (x <= x0) ? inner_slope(Side::Left, std::min(xi, 0.0), t)
                : inner_slope(Side::Right, xi, t);
  return spec_.field(x, t) + stretched / spec_.mu;
}

LayerBand AsymptoticSolution::layer_band(double t, double threshold) const {
  const double cut = threshold > 0.0 ? threshold : spec_.mu * spec_.mu;
  const double x0 = transition_center(t);
  LayerBand band;
  for (Side side : {Side::Left, Side::Right}) {
    const InnerCoefficients c = inner_coefficients(side, t);
    const double num = std::abs(c.numerator);
    const double shp = std::abs(c.shape);
    if (!(num > cut))
      fail(ErrorCode::LayerUnresolved,
           "layer_band: branch gap not above the amplitude threshold");
    // Solve |value(xi)| = cut: exp(rate*xi) = (|num| - cut)/(|shape| cut).
    const double s = std::log((num - cut) / (shp * cut));
    const double x = x0 + spec_.mu * s / c.rate;
    if (side == Side::Left)
      band.lo = x;
    else
      band.hi = x;
  }
  return band;
}

LayerBand layer_bounds(const AsymptoticSolution& asym, double t,
                       double threshold) {
  const LayerBand band = asym.layer_band(t, threshold);
  if (band.lo < 0.0 || band.hi > 1.0)
    fail(ErrorCode::BoundsOutOfDomain,
         "layer_bounds: band leaves the unit interval");
  return band;
}

}  // namespace rda
