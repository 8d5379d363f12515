#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rda {

// ---- quadrature ----

// Composite Simpson on [a,b]. `min_points` is rounded up to the next odd
// count; the default matches the resolution used by the model validators.
double simpson(const std::function<double(double)>& f, double a, double b,
               int min_points = 1025);

// Trapezoid rule over explicit nodes (non-uniform allowed).
double trapezoid(const std::vector<double>& nodes,
                 const std::vector<double>& values);

// ---- linear algebra ----

// Solves a tridiagonal system in place (Thomas algorithm).
// lower[i] multiplies x[i-1], diag[i] x[i], upper[i] x[i+1].
// Throws SingularSystem on a vanishing pivot.
std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                      std::vector<double> diag,
                                      std::vector<double> upper,
                                      std::vector<double> rhs);

// Symmetric positive definite banded system with half bandwidth `bw` stored as
// band[r][j] = A(j, j+r), r = 0..bw. Cholesky factorization + solve.
// Throws SingularSystem if a pivot is not strictly positive.
std::vector<double> solve_banded_spd(std::vector<std::vector<double>> band,
                                     std::vector<double> rhs);

// Dense SPD solve via Cholesky, row-major square matrix. Used by small
// reference computations; throws SingularSystem on breakdown.
std::vector<double> solve_dense_spd(std::vector<double> a, int n,
                                    std::vector<double> rhs);

// ---- deterministic uniform stream ----

// Mixes a base seed with a stream tag; used to derive independent
// reproducible substreams (one per repetition / data channel).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

// 53-bit uniform variates in [0,1) from mt19937_64 raw output. The mapping
// is fixed by hand so streams are identical across platforms and builds.
class UniformStream {
 public:
  explicit UniformStream(std::uint64_t seed);
  double next01();

 private:
  std::uint64_t state_[312];
  int index_;
  std::uint64_t next_raw();
  void reseed(std::uint64_t seed);
};

// ---- scalar root finding ----

// Intervals [a_i, b_i] of a uniform scan on which f changes sign (or hits
// zero at the left endpoint). `points` counts scan nodes including ends.
std::vector<std::pair<double, double>> scan_sign_changes(
    const std::function<double(double)>& f, double a, double b, int points);

// Plain bisection on a bracketing interval; returns the midpoint after
// `iters` halvings (or an exact zero if one is hit).
double bisect(const std::function<double(double)>& f, double lo, double hi,
              int iters = 200);

// ---- misc ----

std::uint64_t fnv1a64(const std::string& text);

// Shortest text that round-trips a double exactly (%.17g trimmed).
std::string format_double(double v);

// Piecewise-cubic interpolation through equally indexed samples
// (Catmull-Rom in the interior, one-sided cubic at the ends).
double cubic_interp(const std::vector<double>& xs, const std::vector<double>& ys,
                    double x);

double median(std::vector<double> values);

}  // namespace rda
