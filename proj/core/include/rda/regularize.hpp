#pragma once

#include <vector>

namespace rda {

// Least squares with a second-derivative penalty:
//   (1/n) sum_i (s(x_i) - d_i)^2 + epsilon * integral_lo^hi (s'')^2.
// The exact minimizer over H^2 is the natural cubic smoothing spline with
// knots at the nodes; it is linear beyond the end knots, so a domain larger
// than the node span adds nothing to the penalty.
struct PenalizedFitProblem {
  std::vector<double> nodes;  // strictly increasing, at least 4
  std::vector<double> data;   // same length
  double lo = 0.0;            // fit domain; must contain the nodes
  double hi = 0.0;            // lo == hi means "use the node span"
};

class SmoothedFunction {
 public:
  enum class Selection {
    Fixed,        // epsilon supplied by the caller (or the delta=0 floor)
    Converged,    // discrepancy target hit within 1%
    ClampedLow,   // target residual below the reachable range, eps = 1e-14
    ClampedHigh,  // target residual above the reachable range, eps = 1e+14
  };

  double operator()(double x) const;
  double deriv(double x) const;
  double second_deriv(double x) const;

  double epsilon() const { return epsilon_; }
  double rms_residual() const { return rms_; }
  Selection selection() const { return selection_; }
  bool clamped() const {
    return selection_ == Selection::ClampedLow ||
           selection_ == Selection::ClampedHigh;
  }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& values() const { return values_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  friend struct FitAccess;  // construction path for the fitting routines

  std::vector<double> nodes_;
  std::vector<double> values_;  // fitted values at the nodes
  std::vector<double> curv_;    // second derivatives at the nodes (ends 0)
  double lo_ = 0.0, hi_ = 0.0;
  double epsilon_ = 0.0, rms_ = 0.0;
  Selection selection_ = Selection::Fixed;

  void check_domain(double x) const;
  int locate(double x) const;
};

// Minimizes the functional at fixed epsilon (banded normal equations).
SmoothedFunction fit_penalized(const PenalizedFitProblem& problem,
                               double epsilon);

// Picks epsilon so the rms data misfit equals delta (discrepancy principle):
// bisection on log10(epsilon) over [-14, 14], 60 halvings. delta = 0 skips
// selection and uses the interpolation floor epsilon = 1e-12. When the
// target lies outside the reachable residual range the fit falls back to
// the nearer endpoint and flags itself clamped.
SmoothedFunction fit_discrepancy(const PenalizedFitProblem& problem,
                                 double delta);

double choose_epsilon_discrepancy(const PenalizedFitProblem& problem,
                                  double delta);

// Exact derivative of the fitted spline (linear continuation outside the
// end knots, domain-checked like operator()).
double differentiate(const SmoothedFunction& fit, double x);

}  // namespace rda
