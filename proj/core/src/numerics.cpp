#include "rda/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "rda/errors.hpp"

namespace rda {

double simpson(const std::function<double(double)>& f, double a, double b,
               int min_points) {
  if (!(b >= a)) fail(ErrorCode::InvalidArgument, "simpson: b < a");
  if (a == b) return 0.0;
  int n = std::max(3, min_points);
  if (n % 2 == 0) ++n;  // odd node count -> even interval count
  const int intervals = n - 1;
  const double h = (b - a) / intervals;
  double sum = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) {
    const double w = (i % 2 == 1) ? 4.0 : 2.0;
    sum += w * f(a + i * h);
  }
  return sum * h / 3.0;
}

double trapezoid(const std::vector<double>& nodes,
                 const std::vector<double>& values) {
  if (nodes.size() != values.size())
    fail(ErrorCode::InvalidArgument, "trapezoid: size mismatch");
  if (nodes.size() < 2)
    fail(ErrorCode::InvalidArgument, "trapezoid: need at least 2 nodes");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    acc += 0.5 * (nodes[i + 1] - nodes[i]) * (values[i] + values[i + 1]);
  return acc;
}

std::vector<double> solve_tridiagonal(std::vector<double> lower,
                                      std::vector<double> diag,
                                      std::vector<double> upper,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (lower.size() != n || upper.size() != n || rhs.size() != n)
    fail(ErrorCode::InvalidArgument, "solve_tridiagonal: size mismatch");
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0)
      fail(ErrorCode::SingularSystem, "solve_tridiagonal: zero pivot");
    const double m = lower[i] / diag[i - 1];
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (diag[n - 1] == 0.0)
    fail(ErrorCode::SingularSystem, "solve_tridiagonal: zero pivot");
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

std::vector<double> solve_banded_spd(std::vector<std::vector<double>> band,
                                     std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  const std::size_t bw = band.size() - 1;
  for (auto& row : band)
    if (row.size() != n)
      fail(ErrorCode::InvalidArgument, "solve_banded_spd: band size mismatch");
  // In-place Cholesky A = L D L^T specialized to the band.
  for (std::size_t j = 0; j < n; ++j) {
    double d = band[0][j];
    const std::size_t kmin = (j > bw) ? j - bw : 0;
    for (std::size_t k = kmin; k < j; ++k) {
      const double ljk = band[j - k][k];
      d -= ljk * ljk * band[0][k];
    }
    if (!(d > 0.0))
      fail(ErrorCode::SingularSystem, "solve_banded_spd: non positive pivot");
    band[0][j] = d;
    for (std::size_t r = 1; r <= bw && j + r < n; ++r) {
      const std::size_t i = j + r;  // row below
      double v = band[r][j];
      const std::size_t kmin2 = (i > bw) ? i - bw : 0;
      for (std::size_t k = kmin2; k < j; ++k)
        v -= band[i - k][k] * band[j - k][k] * band[0][k];
      band[r][j] = v / d;
    }
  }
  // Forward substitution L y = rhs.
  for (std::size_t i = 0; i < n; ++i) {
    double v = rhs[i];
    const std::size_t kmin = (i > bw) ? i - bw : 0;
    for (std::size_t k = kmin; k < i; ++k) v -= band[i - k][k] * rhs[k];
    rhs[i] = v;
  }
  // Diagonal.
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= band[0][i];
  // Back substitution L^T x = y.
  for (std::size_t i = n; i-- > 0;) {
    double v = rhs[i];
    for (std::size_t r = 1; r <= bw && i + r < n; ++r)
      v -= band[r][i] * rhs[i + r];
    rhs[i] = v;
  }
  return rhs;
}

std::vector<double> solve_dense_spd(std::vector<double> a, int n,
                                    std::vector<double> rhs) {
  if (static_cast<int>(rhs.size()) != n ||
      static_cast<int>(a.size()) != n * n)
    fail(ErrorCode::InvalidArgument, "solve_dense_spd: size mismatch");
  // Cholesky A = L L^T, lower triangle stored in place.
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    if (!(d > 0.0))
      fail(ErrorCode::SingularSystem, "solve_dense_spd: non positive pivot");
    const double ljj = std::sqrt(d);
    a[j * n + j] = ljj;
    for (int i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (int k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / ljj;
    }
  }
  for (int i = 0; i < n; ++i) {
    double v = rhs[i];
    for (int k = 0; k < i; ++k) v -= a[i * n + k] * rhs[k];
    rhs[i] = v / a[i * n + i];
  }
  for (int i = n; i-- > 0;) {
    double v = rhs[i];
    for (int k = i + 1; k < n; ++k) v -= a[k * n + i] * rhs[k];
    rhs[i] = v / a[i * n + i];
  }
  return rhs;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  // splitmix64 finalizer over seed xor golden-ratio-scaled tag.
  std::uint64_t z = seed ^ (tag * 0x9e3779b97f4a7c15ULL);
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// mt19937_64 with the standard parameters, written out so the stream is
// pinned independent of the standard library implementation.
namespace {
constexpr int kNN = 312;
constexpr int kMM = 156;
constexpr std::uint64_t kMatrixA = 0xB5026F5AA96619E9ULL;
constexpr std::uint64_t kUpperMask = 0xFFFFFFFF80000000ULL;
constexpr std::uint64_t kLowerMask = 0x7FFFFFFFULL;
}  // namespace

UniformStream::UniformStream(std::uint64_t seed) { reseed(seed); }

void UniformStream::reseed(std::uint64_t seed) {
  state_[0] = seed;
  for (int i = 1; i < kNN; ++i)
    state_[i] =
        6364136223846793005ULL * (state_[i - 1] ^ (state_[i - 1] >> 62)) + i;
  index_ = kNN;
}

std::uint64_t UniformStream::next_raw() {
  if (index_ >= kNN) {
    static const std::uint64_t mag01[2] = {0ULL, kMatrixA};
    int i;
    std::uint64_t x;
    for (i = 0; i < kNN - kMM; ++i) {
      x = (state_[i] & kUpperMask) | (state_[i + 1] & kLowerMask);
      state_[i] = state_[i + kMM] ^ (x >> 1) ^ mag01[x & 1ULL];
    }
    for (; i < kNN - 1; ++i) {
      x = (state_[i] & kUpperMask) | (state_[i + 1] & kLowerMask);
      state_[i] = state_[i + (kMM - kNN)] ^ (x >> 1) ^ mag01[x & 1ULL];
    }
    x = (state_[kNN - 1] & kUpperMask) | (state_[0] & kLowerMask);
    state_[kNN - 1] = state_[kMM - 1] ^ (x >> 1) ^ mag01[x & 1ULL];
    index_ = 0;
  }
  std::uint64_t x = state_[index_++];
  x ^= (x >> 29) & 0x5555555555555555ULL;
  x ^= (x << 17) & 0x71D67FFFEDA60000ULL;
  x ^= (x << 37) & 0xFFF7EEE000000000ULL;
  x ^= (x >> 43);
  return x;
}

double UniformStream::next01() {
  return (next_raw() >> 11) * (1.0 / 9007199254740992.0);  // 2^-53
}

std::vector<std::pair<double, double>> scan_sign_changes(
    const std::function<double(double)>& f, double a, double b, int points) {
  if (points < 2 || !(b > a))
    fail(ErrorCode::InvalidArgument, "scan_sign_changes: bad interval");
  std::vector<std::pair<double, double>> out;
  const double h = (b - a) / (points - 1);
  double xp = a, fp = f(a);
  for (int i = 1; i < points; ++i) {
    const double x = (i == points - 1) ? b : a + i * h;
    const double fx = f(x);
    if (fp == 0.0 || fp * fx < 0.0) out.emplace_back(xp, x);
    xp = x;
    fp = fx;
  }
  if (fp == 0.0) out.emplace_back(xp, b);
  return out;
}

double bisect(const std::function<double(double)>& f, double lo, double hi,
              int iters) {
  double flo = f(lo);
  if (flo == 0.0) return lo;
  double fhi = f(hi);
  if (fhi == 0.0) return hi;
  if (flo * fhi > 0.0)
    fail(ErrorCode::NoRootFound, "bisect: endpoints do not bracket a root");
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (flo * fm < 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) return buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double cubic_interp(const std::vector<double>& xs, const std::vector<double>& ys,
                    double x) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2)
    fail(ErrorCode::InvalidArgument, "cubic_interp: bad sample arrays");
  if (n < 4) {  // fall back to linear
    std::size_t i = 0;
    while (i + 2 < n && xs[i + 1] < x) ++i;
    const double w = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + w * (ys[i + 1] - ys[i]);
  }
  // Locate the containing interval [i, i+1].
  std::size_t i = std::upper_bound(xs.begin(), xs.end(), x) - xs.begin();
  if (i > 0) --i;
  if (i >= n - 1) i = n - 2;
  // Use the 4-point stencil centered on the interval, shifted at the ends.
  std::size_t s = (i == 0) ? 0 : i - 1;
  if (s + 3 >= n) s = n - 4;
  const double* px = xs.data() + s;
  const double* py = ys.data() + s;
  // Lagrange cubic through the 4 samples.
  double acc = 0.0;
  for (int a = 0; a < 4; ++a) {
    double term = py[a];
    for (int b = 0; b < 4; ++b) {
      if (a == b) continue;
      term *= (x - px[b]) / (px[a] - px[b]);
    }
    acc += term;
  }
  return acc;
}

double median(std::vector<double> values) {
  if (values.empty()) fail(ErrorCode::InvalidArgument, "median: empty");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return (n % 2 == 1) ? values[n / 2]
                      : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace rda
