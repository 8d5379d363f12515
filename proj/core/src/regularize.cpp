#include "rda/regularize.hpp"

#include <algorithm>
#include <cmath>

#include "rda/errors.hpp"
#include "rda/numerics.hpp"

namespace rda {

namespace {

struct ProblemShape {
  int n = 0;         // node count
  int m = 0;         // interior count n - 2
  double lo = 0.0, hi = 0.0;
};

ProblemShape check_problem(const PenalizedFitProblem& p) {
  ProblemShape shape;
  shape.n = static_cast<int>(p.nodes.size());
  if (shape.n < 4)
    fail(ErrorCode::InvalidArgument, "penalized fit: need at least 4 nodes");
  if (p.data.size() != p.nodes.size())
    fail(ErrorCode::InvalidArgument, "penalized fit: data/node size mismatch");
  for (int i = 0; i + 1 < shape.n; ++i)
    if (!(p.nodes[i + 1] > p.nodes[i]))
      fail(ErrorCode::InvalidArgument,
           "penalized fit: nodes must increase strictly");
  shape.m = shape.n - 2;
  shape.lo = p.lo;
  shape.hi = p.hi;
  if (shape.lo == shape.hi) {  // default: node span
    shape.lo = p.nodes.front();
    shape.hi = p.nodes.back();
  }
  if (shape.lo > p.nodes.front() || shape.hi < p.nodes.back())
    fail(ErrorCode::InvalidArgument,
         "penalized fit: domain must contain the nodes");
  return shape;
}

// Solves the normal equations at fixed epsilon. Returns fitted node values
// and interior second derivatives.
void solve_fit(const PenalizedFitProblem& p, const ProblemShape& shape,
               double epsilon, std::vector<double>* values,
               std::vector<double>* curv, double* rms) {
  const int n = shape.n, m = shape.m;
  const std::vector<double>& x = p.nodes;
  const std::vector<double>& y = p.data;
  std::vector<double> h(n - 1);
  for (int i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

  const double lam = epsilon * static_cast<double>(n);  // epsilon / weight

  // Band rows of A = R + lam Q^T Q (interior indexing j = 0..m-1 maps to
  // node j+1). band[r][j] = A(j, j+r).
  std::vector<std::vector<double>> band(3, std::vector<double>(m, 0.0));
  auto inv = [&h](int i) { return 1.0 / h[i]; };
  for (int j = 0; j < m; ++j) {
    const int node = j + 1;
    const double qm = inv(node - 1);
    const double q0 = -inv(node - 1) - inv(node);
    const double qp = inv(node);
    band[0][j] = (h[node - 1] + h[node]) / 3.0 + lam * (qm * qm + q0 * q0 + qp * qp);
    if (j + 1 < m) {
      const double rm = inv(node);
      const double r0 = -inv(node) - inv(node + 1);
      band[1][j] = h[node] / 6.0 + lam * (q0 * rm + qp * r0);
    }
    if (j + 2 < m) band[2][j] = lam * qp * inv(node + 1);
  }

  std::vector<double> rhs(m);
  for (int j = 0; j < m; ++j) {
    const int node = j + 1;
    rhs[j] = (y[node - 1] - y[node]) / h[node - 1] +
             (y[node + 1] - y[node]) / h[node];
  }

  std::vector<double> gamma = solve_banded_spd(std::move(band), std::move(rhs));

  values->assign(y.begin(), y.end());
  auto gamma_at = [&gamma, m](int node) -> double {
    const int g = node - 1;  // interior nodes 1..n-2 carry curvatures
    return (g >= 0 && g < m) ? gamma[g] : 0.0;
  };
  double sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    // Row i of Q gamma: columns i-1, i, i+1 only.
    double row = 0.0;
    if (i >= 1) row += gamma_at(i - 1) / h[i - 1];
    if (i >= 1 && i <= n - 2)
      row += gamma_at(i) * (-1.0 / h[i - 1] - 1.0 / h[i]);
    if (i <= n - 2) row += gamma_at(i + 1) / h[i];
    const double corr = lam * row;
    (*values)[i] = y[i] - corr;
    sum_sq += corr * corr;
  }
  *rms = std::sqrt(sum_sq / n);

  curv->assign(n, 0.0);
  for (int j = 0; j < m; ++j) (*curv)[j + 1] = gamma[j];
}

}  // namespace

struct FitAccess {
  static SmoothedFunction make(const PenalizedFitProblem& p,
                               const ProblemShape& shape, double epsilon,
                               SmoothedFunction::Selection sel) {
    SmoothedFunction fit;
    fit.nodes_ = p.nodes;
    fit.lo_ = shape.lo;
    fit.hi_ = shape.hi;
    fit.epsilon_ = epsilon;
    fit.selection_ = sel;
    solve_fit(p, shape, epsilon, &fit.values_, &fit.curv_, &fit.rms_);
    return fit;
  }
};

namespace {

SmoothedFunction assemble(const PenalizedFitProblem& p,
                          const ProblemShape& shape, double epsilon,
                          SmoothedFunction::Selection sel) {
  return FitAccess::make(p, shape, epsilon, sel);
}

}  // namespace

void SmoothedFunction::check_domain(double x) const {
  const double slack = 1e-9 * (hi_ - lo_) + 1e-300;
  if (!(x >= lo_ - slack && x <= hi_ + slack))
    fail(ErrorCode::OutOfDomain, "SmoothedFunction: x outside the fit domain");
}

int SmoothedFunction::locate(double x) const {
  const int n = static_cast<int>(nodes_.size());
  int i = static_cast<int>(
      std::upper_bound(nodes_.begin(), nodes_.end(), x) - nodes_.begin());
  i = std::clamp(i - 1, 0, n - 2);
  return i;
}

double SmoothedFunction::operator()(double x) const {
  check_domain(x);
  if (x <= nodes_.front()) {
    const double slope = deriv(nodes_.front());
    return values_.front() + slope * (x - nodes_.front());
  }
  if (x >= nodes_.back()) {
    const double slope = deriv(nodes_.back());
    return values_.back() + slope * (x - nodes_.back());
  }
  const int i = locate(x);
  const double h = nodes_[i + 1] - nodes_[i];
  const double a = (nodes_[i + 1] - x) / h;
  const double b = (x - nodes_[i]) / h;
  return a * values_[i] + b * values_[i + 1] +
         ((a * a * a - a) * curv_[i] + (b * b * b - b) * curv_[i + 1]) *
             (h * h) / 6.0;
}

double SmoothedFunction::deriv(double x) const {
  check_domain(x);
  int i;
  if (x <= nodes_.front())
    i = 0;
  else if (x >= nodes_.back())
    i = static_cast<int>(nodes_.size()) - 2;
  else
    i = locate(x);
  const double xc = std::clamp(x, nodes_[i], nodes_[i + 1]);
  const double h = nodes_[i + 1] - nodes_[i];
  const double a = (nodes_[i + 1] - xc) / h;
  const double b = (xc - nodes_[i]) / h;
  return (values_[i + 1] - values_[i]) / h +
         ((1.0 - 3.0 * a * a) * curv_[i] + (3.0 * b * b - 1.0) * curv_[i + 1]) *
             h / 6.0;
}

double SmoothedFunction::second_deriv(double x) const {
  check_domain(x);
  if (x <= nodes_.front() || x >= nodes_.back()) return 0.0;
  const int i = locate(x);
  const double h = nodes_[i + 1] - nodes_[i];
  const double a = (nodes_[i + 1] - x) / h;
  const double b = (x - nodes_[i]) / h;
  return a * curv_[i] + b * curv_[i + 1];
}

SmoothedFunction fit_penalized(const PenalizedFitProblem& problem,
                               double epsilon) {
  if (!(epsilon > 0.0))
    fail(ErrorCode::InvalidArgument, "fit_penalized: epsilon must be positive");
  const ProblemShape shape = check_problem(problem);
  return assemble(problem, shape, epsilon, SmoothedFunction::Selection::Fixed);
}

SmoothedFunction fit_discrepancy(const PenalizedFitProblem& problem,
                                 double delta) {
  const ProblemShape shape = check_problem(problem);
  if (delta < 0.0)
    fail(ErrorCode::InvalidArgument, "fit_discrepancy: delta must be >= 0");
  if (delta == 0.0)
    return assemble(problem, shape, 1e-12,
                    SmoothedFunction::Selection::Fixed);

  auto rms_at = [&problem, &shape](double eps) {
    std::vector<double> v, c;
    double rms = 0.0;
    solve_fit(problem, shape, eps, &v, &c, &rms);
    return rms;
  };

  double log_lo = -14.0, log_hi = 14.0;
  const double rms_lo = rms_at(std::pow(10.0, log_lo));
  if (rms_lo > delta)
    return assemble(problem, shape, std::pow(10.0, log_lo),
                    SmoothedFunction::Selection::ClampedLow);
  const double rms_hi = rms_at(std::pow(10.0, log_hi));
  if (rms_hi < delta)
    return assemble(problem, shape, std::pow(10.0, log_hi),
                    SmoothedFunction::Selection::ClampedHigh);

  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (log_lo + log_hi);
    if (rms_at(std::pow(10.0, mid)) < delta)
      log_lo = mid;
    else
      log_hi = mid;
  }
  const double eps = std::pow(10.0, 0.5 * (log_lo + log_hi));
  return assemble(problem, shape, eps,
                  SmoothedFunction::Selection::Converged);
}

double choose_epsilon_discrepancy(const PenalizedFitProblem& problem,
                                  double delta) {
  return fit_discrepancy(problem, delta).epsilon();
}

double differentiate(const SmoothedFunction& fit, double x) {
  return fit.deriv(x);
}

}  // namespace rda
