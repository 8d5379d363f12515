#include "rda/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rda/errors.hpp"
#include "rda/numerics.hpp"

namespace rda {

std::vector<double> synthesize_noise(const std::vector<double>& clean,
                                     double delta, std::uint64_t seed) {
  if (delta < 0.0)
    fail(ErrorCode::InvalidArgument, "synthesize_noise: delta must be >= 0");
  UniformStream stream(seed);
  std::vector<double> out(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const double r = stream.next01();
    out[i] = (1.0 + delta * (2.0 * r - 1.0)) * clean[i];
  }
  return out;
}

namespace {

void require_spatial(const MeasurementSet& meas, const char* who) {
  if (meas.kind == MeasurementKind::TemporalTriples)
    fail(ErrorCode::InvalidArgument,
         std::string(who) + ": expects spatial measurements");
  if (meas.nodes.size() != meas.values.size() || meas.nodes.size() < 8)
    fail(ErrorCode::InvalidArgument,
         std::string(who) + ": need at least 8 (node, value) pairs");
  for (std::size_t i = 0; i + 1 < meas.nodes.size(); ++i)
    if (!(meas.nodes[i + 1] > meas.nodes[i]))
      fail(ErrorCode::InvalidArgument,
           std::string(who) + ": nodes must increase strictly");
}

// Absolute rms of the multiplicative noise (1 + delta*(2r-1)) over the
// samples; the uniform factor (2r-1) has rms 1/sqrt(3). The discrepancy
// target must be this absolute misfit, not the relative fraction delta.
double multiplicative_noise_rms(const std::vector<double>& values,
                                double delta) {
  if (values.empty()) return 0.0;
  double ss = 0.0;
  for (double v : values) ss += v * v;
  return delta * std::sqrt(ss / static_cast<double>(values.size()) / 3.0);
}

}  // namespace

RecoveredCoefficient ip1_recover(const AsymptoticSolution& asym,
                                 const MeasurementSet& meas) {
  require_spatial(meas, "ip1_recover");

  // Keep only nodes where the inner-layer tail stays below half the noise
  // amplitude, so the retained data is outer-branch data up to noise. For
  // gradient measurements the tail of d(inner)/dx is (rate/mu) times the
  // tail of the inner correction itself.
  std::vector<double> magnitudes;
  magnitudes.reserve(meas.values.size());
  for (double v : meas.values) magnitudes.push_back(std::abs(v));
  const double scale = median(std::move(magnitudes));
  const double eff_delta = std::max(meas.delta, 1e-6);
  const double mu = asym.mu();
  double cut = 0.5 * eff_delta * scale;
  if (meas.kind == MeasurementKind::SpatialGradient)
    cut *= mu / std::abs(asym.inner_coefficients(Side::Left, meas.t0).rate);
  cut = std::min(cut, mu * mu);

  const LayerBand band = layer_bounds(asym, meas.t0, cut);
  const double spacing = (meas.nodes.back() - meas.nodes.front()) /
                         static_cast<double>(meas.nodes.size() - 1);
  LayerBand excluded{band.lo - spacing, band.hi + spacing};

  std::vector<double> left_x, left_v, right_x, right_v;
  for (std::size_t i = 0; i < meas.nodes.size(); ++i) {
    const double x = meas.nodes[i];
    if (x <= excluded.lo) {
      left_x.push_back(x);
      left_v.push_back(meas.values[i]);
    } else if (x >= excluded.hi) {
      right_x.push_back(x);
      right_v.push_back(meas.values[i]);
    }
  }
  if (left_x.size() + right_x.size() < 4)
    fail(ErrorCode::LayerCoversDomain,
         "ip1_recover: almost all nodes fall inside the excluded band");
  if (!left_x.empty() && !right_x.empty() && left_x.back() >= right_x.front())
    fail(ErrorCode::MixedSides, "ip1_recover: subdomains overlap");

  RecoveredCoefficient rec;
  rec.excluded = excluded;

  std::vector<double> grad_x, grad_v;
  if (meas.kind == MeasurementKind::SpatialGradient) {
    grad_x.reserve(left_x.size() + right_x.size());
    grad_v.reserve(grad_x.capacity());
    grad_x.insert(grad_x.end(), left_x.begin(), left_x.end());
    grad_v.insert(grad_v.end(), left_v.begin(), left_v.end());
    grad_x.insert(grad_x.end(), right_x.begin(), right_x.end());
    grad_v.insert(grad_v.end(), right_v.begin(), right_v.end());
  } else {
    // Value data: smooth each subdomain separately, then differentiate.
    if (left_x.size() < 4 || right_x.size() < 4)
      fail(ErrorCode::LayerCoversDomain,
           "ip1_recover: a subdomain has fewer than 4 usable nodes");
    const SmoothedFunction left_fit = fit_discrepancy(
        {left_x, left_v, 0.0, 0.0},
        multiplicative_noise_rms(left_v, meas.delta));
    const SmoothedFunction right_fit = fit_discrepancy(
        {right_x, right_v, 0.0, 0.0},
        multiplicative_noise_rms(right_v, meas.delta));
    for (double x : left_x) {
      grad_x.push_back(x);
      grad_v.push_back(left_fit.deriv(x));
    }
    for (double x : right_x) {
      grad_x.push_back(x);
      grad_v.push_back(right_fit.deriv(x));
    }
  }

  for (std::size_t i = 0; i < grad_x.size(); ++i)
    rec.prefit.push_back({grad_x[i], grad_v[i], false});
  rec.used = static_cast<int>(grad_x.size());
  rec.rejected = static_cast<int>(meas.nodes.size() - grad_x.size());

  PenalizedFitProblem problem;
  problem.nodes = std::move(grad_x);
  problem.data = std::move(grad_v);
  problem.lo = std::min(0.0, problem.nodes.front());
  problem.hi = std::max(1.0, problem.nodes.back());
  // Exact for the gradient path; for the value path the differentiated
  // per-side fits carry noise of the same relative order.
  SmoothedFunction fit =
      fit_discrepancy(problem, multiplicative_noise_rms(problem.data,
                                                        meas.delta));
  rec.epsilon = fit.epsilon();
  rec.selection = fit.selection();
  rec.fit = std::move(fit);
  return rec;
}

std::vector<PrefitSample> ip2_pointwise(const MeasurementSet& meas,
                                        double a_margin) {
  if (meas.kind != MeasurementKind::TemporalTriples)
    fail(ErrorCode::InvalidArgument,
         "ip2_pointwise: expects temporal triples");
  const std::size_t n = meas.nodes.size();
  if (meas.u0.size() != n || meas.u1.size() != n || meas.layer_x.size() != n)
    fail(ErrorCode::InvalidArgument, "ip2_pointwise: ragged triples");
  if (!(a_margin > 0.0))
    fail(ErrorCode::InvalidArgument, "ip2_pointwise: margin must be positive");

  std::vector<PrefitSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = 1.0 - 2.0 * meas.layer_x[i];
    PrefitSample& s = out[i];
    s.node = meas.nodes[i];
    s.rejected = std::abs(denom) <= a_margin;
    s.value = s.rejected ? 0.0 : (meas.u0[i] + meas.u1[i]) / denom;
  }
  return out;
}

RecoveredCoefficient ip2_recover(const ProblemSpec& spec,
                                 const MeasurementSet& meas) {
  if (!spec.a_margin)
    fail(ErrorCode::InvalidArgument,
         "ip2_recover: spec carries no division margin a");
  RecoveredCoefficient rec;
  rec.prefit = ip2_pointwise(meas, *spec.a_margin);

  std::vector<double> nodes, values;
  double noise_ss = 0.0;
  for (std::size_t i = 0; i < rec.prefit.size(); ++i) {
    const PrefitSample& s = rec.prefit[i];
    if (s.rejected) continue;
    nodes.push_back(s.node);
    values.push_back(s.value);
    // First-order propagation of the three channel noises through
    // f = (u0 + u1) / (1 - 2 x); each channel carries delta*|v|/sqrt(3).
    const double denom = 1.0 - 2.0 * meas.layer_x[i];
    const double through_u = (meas.u0[i] * meas.u0[i] +
                              meas.u1[i] * meas.u1[i]) / (denom * denom);
    const double df_dx = 2.0 * s.value / denom;
    noise_ss += through_u + df_dx * df_dx * meas.layer_x[i] * meas.layer_x[i];
  }
  rec.used = static_cast<int>(nodes.size());
  rec.rejected = static_cast<int>(rec.prefit.size()) - rec.used;
  if (nodes.size() < 4)
    fail(ErrorCode::LayerCoversDomain,
         "ip2_recover: the division guard rejected almost every node");
  const double noise_rms =
      meas.delta * std::sqrt(noise_ss / static_cast<double>(nodes.size()) / 3.0);

  PenalizedFitProblem problem;
  problem.nodes = std::move(nodes);
  problem.data = std::move(values);
  problem.lo = std::min(0.0, problem.nodes.front());
  problem.hi = std::max(spec.boundary.period, problem.nodes.back());
  SmoothedFunction fit = fit_discrepancy(problem, noise_rms);
  rec.epsilon = fit.epsilon();
  rec.selection = fit.selection();
  rec.fit = std::move(fit);
  return rec;
}

MeasurementSet synthesize_spatial(const GridSolution& sol,
                                  MeasurementKind kind, int k, double t0,
                                  double delta, std::uint64_t seed) {
  if (kind == MeasurementKind::TemporalTriples)
    fail(ErrorCode::InvalidArgument, "synthesize_spatial: spatial kinds only");
  if (k < 8)
    fail(ErrorCode::InvalidArgument, "synthesize_spatial: need k >= 8");
  MeasurementSet meas;
  meas.kind = kind;
  meas.delta = delta;
  meas.t0 = t0;
  meas.nodes.resize(k + 1);
  std::vector<double> clean(k + 1);

  if (kind == MeasurementKind::SpatialValue) {
    for (int i = 0; i <= k; ++i) {
      meas.nodes[i] = static_cast<double>(i) / k;
      clean[i] = sol.value(meas.nodes[i], t0);
    }
  } else {
    // Gradient slabs bracketing t0, blended linearly.
    const auto& t = sol.t;
    int j = static_cast<int>(std::upper_bound(t.begin(), t.end(), t0) -
                             t.begin()) - 1;
    j = std::clamp(j, 0, static_cast<int>(t.size()) - 2);
    const double w = (t0 - t[j]) / (t[j + 1] - t[j]);
    const std::vector<double> g0 = spatial_gradient(sol, j);
    const std::vector<double> g1 = spatial_gradient(sol, j + 1);
    for (int i = 0; i <= k; ++i) {
      meas.nodes[i] = static_cast<double>(i) / k;
      // Linear interpolation of the gradient field in x and t.
      const double xq = meas.nodes[i];
      int ii = static_cast<int>(
          std::upper_bound(sol.x.begin(), sol.x.end(), xq) - sol.x.begin()) - 1;
      ii = std::clamp(ii, 0, static_cast<int>(sol.x.size()) - 2);
      const double ax = (xq - sol.x[ii]) / (sol.x[ii + 1] - sol.x[ii]);
      const double at_j = (1 - ax) * g0[ii] + ax * g0[ii + 1];
      const double at_j1 = (1 - ax) * g1[ii] + ax * g1[ii + 1];
      clean[i] = (1 - w) * at_j + w * at_j1;
    }
  }
  meas.values = synthesize_noise(clean, delta, seed);
  return meas;
}

MeasurementSet synthesize_temporal(const ProblemSpec& spec,
                                   const GridSolution& sol,
                                   const AsymptoticSolution& asym, int k,
                                   double delta, std::uint64_t seed,
                                   double horizon) {
  if (k < 8)
    fail(ErrorCode::InvalidArgument, "synthesize_temporal: need k >= 8");
  const double T = horizon > 0.0 ? horizon : spec.boundary.period;
  MeasurementSet meas;
  meas.kind = MeasurementKind::TemporalTriples;
  meas.delta = delta;
  meas.nodes.resize(k + 1);
  std::vector<double> c_u0(k + 1), c_u1(k + 1), c_x(k + 1);
  for (int i = 0; i <= k; ++i) {
    meas.nodes[i] = T * static_cast<double>(i) / k;
    c_u0[i] = spec.boundary.u0(meas.nodes[i]);
    c_u1[i] = spec.boundary.u1(meas.nodes[i]);
    c_x[i] = detect_transition(sol, asym, meas.nodes[i]).x;
  }
  meas.u0 = synthesize_noise(c_u0, delta, derive_seed(seed, 1));
  meas.u1 = synthesize_noise(c_u1, delta, derive_seed(seed, 2));
  meas.layer_x = synthesize_noise(c_x, delta, derive_seed(seed, 3));
  return meas;
}

// ---- CSV ----

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    // trim
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

double csv_number(const std::string& cell, const std::string& path, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::IoError, path + ":" + std::to_string(line) +
                               ": bad number '" + cell + "'");
}

}  // namespace

MeasurementSet read_measurement_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::IoError, path + ": empty file, header row required");
  const auto header = split_csv_line(line);

  MeasurementSet meas;
  int expect = 0;
  if (header == std::vector<std::string>{"x", "omega"}) {
    meas.kind = MeasurementKind::SpatialGradient;
    expect = 2;
  } else if (header == std::vector<std::string>{"x", "u"}) {
    meas.kind = MeasurementKind::SpatialValue;
    expect = 2;
  } else if (header == std::vector<std::string>{"t", "u0", "u1", "xtp"}) {
    meas.kind = MeasurementKind::TemporalTriples;
    expect = 4;
  } else {
    fail(ErrorCode::IoError,
         path + ": header must be 'x,omega', 'x,u' or 't,u0,u1,xtp'");
  }

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != expect)
      fail(ErrorCode::IoError, path + ":" + std::to_string(lineno) +
                                   ": expected " + std::to_string(expect) +
                                   " columns");
    meas.nodes.push_back(csv_number(cells[0], path, lineno));
    if (expect == 2) {
      meas.values.push_back(csv_number(cells[1], path, lineno));
    } else {
      meas.u0.push_back(csv_number(cells[1], path, lineno));
      meas.u1.push_back(csv_number(cells[2], path, lineno));
      meas.layer_x.push_back(csv_number(cells[3], path, lineno));
    }
  }
  if (meas.nodes.empty())
    fail(ErrorCode::IoError, path + ": no data rows");
  return meas;
}

void write_measurement_csv(const std::string& path, const MeasurementSet& m) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  if (m.kind == MeasurementKind::TemporalTriples) {
    out << "t,u0,u1,xtp\n";
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
      out << format_double(m.nodes[i]) << "," << format_double(m.u0[i]) << ","
          << format_double(m.u1[i]) << "," << format_double(m.layer_x[i])
          << "\n";
  } else {
    out << (m.kind == MeasurementKind::SpatialGradient ? "x,omega\n" : "x,u\n");
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
      out << format_double(m.nodes[i]) << "," << format_double(m.values[i])
          << "\n";
  }
  if (!out) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace rda
