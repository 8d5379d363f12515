#include "rda/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "rda/asymptotics.hpp"
#include "rda/errors.hpp"
#include "rda/numerics.hpp"

namespace rda {

namespace {

std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  const std::size_t n = nodes.size();
  if (n < 2)
    fail(ErrorCode::InvalidArgument, "trapezoid weights need >= 2 nodes");
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double half = 0.5 * (nodes[i + 1] - nodes[i]);
    w[i] += half;
    w[i + 1] += half;
  }
  return w;
}

std::string hex_digest(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(v));
  return buf;
}

double loglog_slope(const std::vector<double>& xs,
                    const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  if (den == 0.0)
    fail(ErrorCode::ZeroDenominator, "slope fit needs distinct noise levels");
  return (n * sxy - sx * sy) / den;
}

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

MetricResult banded_metric(std::string name, double value, double target,
                           double lo, double hi, std::string note = {}) {
  MetricResult m;
  m.name = std::move(name);
  m.value = value;
  m.target = target;
  m.lo = lo;
  m.hi = hi;
  m.pass = value >= lo && value <= hi;
  m.note = std::move(note);
  return m;
}

struct InverseTarget {
  double target;
  double hi;
  bool pinned;
};

InverseTarget pick_target(double delta, double t1, double hi1, double t2,
                          double hi2) {
  if (std::abs(delta - 1e-3) < 1e-12) return {t1, hi1, true};
  if (std::abs(delta - 1e-2) < 1e-12) return {t2, hi2, true};
  return {0.0, 1.0, false};
}

// One noise draw -> recovery -> relative error on a fine grid.
struct DrawResult {
  std::uint64_t seed;
  double error;
};

std::vector<DrawResult> fan_out(int repetitions, std::uint64_t seed,
                                std::uint64_t tag_base,
                                const std::function<double(std::uint64_t)>&
                                    one_draw) {
  std::vector<std::future<DrawResult>> futures;
  futures.reserve(repetitions);
  for (int rep = 0; rep < repetitions; ++rep) {
    const std::uint64_t s = derive_seed(seed, tag_base + rep + 1);
    futures.push_back(std::async(std::launch::async, [s, &one_draw] {
      return DrawResult{s, one_draw(s)};
    }));
  }
  std::vector<DrawResult> draws;
  draws.reserve(repetitions);
  for (auto& f : futures) draws.push_back(f.get());
  std::sort(draws.begin(), draws.end(),
            [](const DrawResult& a, const DrawResult& b) {
              return a.seed < b.seed;
            });
  return draws;
}

void append_draw_notes(ExperimentReport& report,
                       const std::vector<DrawResult>& draws) {
  for (const DrawResult& d : draws) {
    report.seeds.push_back(d.seed);
    report.notes.push_back("seed=" + std::to_string(d.seed) +
                           " rel_l2=" + format_double(d.error));
  }
}

void append_forward_notes(ExperimentReport& report, const GridSolution& sol) {
  report.notes.push_back("scheme=" + sol.scheme);
  report.notes.push_back("periods_marched=" +
                         std::to_string(sol.periods_marched));
  report.notes.push_back("periodicity_residual=" +
                         format_double(sol.periodicity_residual));
  report.notes.push_back("newton_iterations=" +
                         std::to_string(sol.newton_iterations));
}

}  // namespace

double relative_l2_error(const std::vector<double>& nodes,
                         const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != nodes.size() || b.size() != nodes.size())
    fail(ErrorCode::InvalidArgument, "relative_l2_error: size mismatch");
  const std::vector<double> w = trapezoid_weights(nodes);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = a[i] - b[i];
    num += w[i] * d * d;
    den += w[i] * b[i] * b[i];
  }
  if (den <= 0.0)
    fail(ErrorCode::ZeroDenominator, "relative_l2_error: reference is zero");
  return std::sqrt(num / den);
}

double relative_l2_error(const std::vector<double>& x,
                         const std::vector<double>& t,
                         const std::vector<std::vector<double>>& a,
                         const std::vector<std::vector<double>>& b) {
  if (a.size() != t.size() || b.size() != t.size())
    fail(ErrorCode::InvalidArgument, "relative_l2_error: slab count mismatch");
  const std::vector<double> wx = trapezoid_weights(x);
  const std::vector<double> wt = trapezoid_weights(t);
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (a[j].size() != x.size() || b[j].size() != x.size())
      fail(ErrorCode::InvalidArgument, "relative_l2_error: slab size mismatch");
    double rn = 0.0, rd = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = a[j][i] - b[j][i];
      rn += wx[i] * d * d;
      rd += wx[i] * b[j][i] * b[j][i];
    }
    num += wt[j] * rn;
    den += wt[j] * rd;
  }
  if (den <= 0.0)
    fail(ErrorCode::ZeroDenominator, "relative_l2_error: reference is zero");
  return std::sqrt(num / den);
}

bool ExperimentReport::all_pass() const {
  for (const MetricResult& m : metrics)
    if (!m.pass) return false;
  return true;
}

std::string ExperimentReport::to_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["spec_digest"] = spec_digest;
  j["grid_nx"] = grid_nx;
  j["grid_nt"] = grid_nt;
  j["delta"] = delta;
  j["seeds"] = seeds;
  j["metrics"] = nlohmann::ordered_json::array();
  for (const MetricResult& m : metrics) {
    nlohmann::ordered_json e;
    e["name"] = m.name;
    e["value"] = m.value;
    e["target"] = m.target;
    e["lo"] = m.lo;
    e["hi"] = m.hi;
    e["pass"] = m.pass;
    e["note"] = m.note;
    j["metrics"].push_back(std::move(e));
  }
  j["notes"] = notes;
  j["runtime_seconds"] = runtime_seconds;
  return j.dump(2) + "\n";
}

ExperimentReport ExperimentReport::from_json(const std::string& text) {
  nlohmann::ordered_json j;
  try {
    j = nlohmann::ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, std::string("report parse: ") + e.what());
  }
  ExperimentReport r;
  try {
    r.experiment = j.at("experiment").get<std::string>();
    r.spec_digest = j.at("spec_digest").get<std::string>();
    r.grid_nx = j.at("grid_nx").get<int>();
    r.grid_nt = j.at("grid_nt").get<int>();
    r.delta = j.at("delta").get<double>();
    r.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    for (const auto& e : j.at("metrics")) {
      MetricResult m;
      m.name = e.at("name").get<std::string>();
      m.value = e.at("value").get<double>();
      m.target = e.at("target").get<double>();
      m.lo = e.at("lo").get<double>();
      m.hi = e.at("hi").get<double>();
      m.pass = e.at("pass").get<bool>();
      m.note = e.at("note").get<std::string>();
      r.metrics.push_back(std::move(m));
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
  } catch (const std::exception& e) {
    fail(ErrorCode::IoError, std::string("report fields: ") + e.what());
  }
  return r;
}

std::string ExperimentReport::summary() const {
  std::ostringstream out;
  out << "=== " << experiment << " ===\n";
  out << "spec digest: " << spec_digest << "\n";
  out << "grid: " << grid_nx << " x " << grid_nt << "\n";
  out << "delta: " << format_double(delta) << "\n";
  out << "seeds: " << seeds.size() << "\n";
  for (const MetricResult& m : metrics) {
    out << (m.pass ? "[PASS] " : "[FAIL] ") << m.name << " = "
        << format_double(m.value) << "  band [" << format_double(m.lo) << ", "
        << format_double(m.hi) << "]";
    if (m.target != 0.0) out << "  reference " << format_double(m.target);
    if (!m.note.empty()) out << "  (" << m.note << ")";
    out << "\n";
  }
  for (const std::string& n : notes) out << "  - " << n << "\n";
  out << "runtime: " << format_double(runtime_seconds) << " s\n";
  out << "overall: " << (all_pass() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

ProblemSpec example1_spec() {
  ProblemSpec spec;
  spec.field = CoefficientField::spatial_polynomial({1.5, 0.0, 1.0});
  spec.boundary.u0 = TimeTrace::trig(-4.0, 0.0, 0.0);
  spec.boundary.u1 = TimeTrace::trig(4.3, 0.0, 0.0);
  spec.boundary.period = 2.0;
  spec.mu = 0.02;
  return spec;
}

ProblemSpec example2_spec() {
  ProblemSpec spec;
  spec.field = CoefficientField::temporal_trig(2.0, 1.0, 0.0);
  spec.boundary.u0 = TimeTrace::trig(-4.0, 0.0, -0.5);
  spec.boundary.u1 = TimeTrace::trig(5.0, 0.7, 0.0);
  spec.boundary.period = 2.0 * std::numbers::pi;
  spec.mu = 0.02;
  spec.a_margin = 0.05;
  return spec;
}

namespace {

ExperimentReport report_skeleton(std::string id, const ProblemSpec& spec,
                                 const ExampleOptions& opts, double delta) {
  ExperimentReport r;
  r.experiment = std::move(id);
  r.spec_digest = hex_digest(spec_digest(spec));
  r.grid_nx = opts.nx;
  r.grid_nt = opts.nt;
  r.delta = delta;
  return r;
}

// Asymptotic field sampled on the solution grid, optionally time-shifted.
std::vector<std::vector<double>> sample_asymptotic(
    const AsymptoticSolution& asym, const std::vector<double>& x,
    const std::vector<double>& t) {
  std::vector<std::vector<double>> u(t.size(),
                                     std::vector<double>(x.size(), 0.0));
  for (std::size_t j = 0; j < t.size(); ++j)
    for (std::size_t i = 0; i < x.size(); ++i) u[j][i] = asym(x[i], t[j]);
  return u;
}

}  // namespace

namespace {

GridSolution owned_or_shared(const ProblemSpec& spec,
                             const AsymptoticSolution& asym,
                             const ExampleOptions& opts) {
  if (opts.forward_solution) {
    const GridSolution& s = *opts.forward_solution;
    if (static_cast<int>(s.x.size()) != opts.nx ||
        static_cast<int>(s.t.size()) != opts.nt)
      fail(ErrorCode::InvalidArgument,
           "shared forward solution does not match the requested grid");
    return s;
  }
  ForwardOptions fopt;
  fopt.nx = opts.nx;
  fopt.nt = opts.nt;
  return solve_forward(spec, asym, fopt);
}

}  // namespace

ExperimentReport run_example1(PipelineMode mode, double delta,
                              std::uint64_t seed, const ExampleOptions& opts) {
  Timer timer;
  const ProblemSpec spec = example1_spec();
  const AsymptoticSolution asym(spec);
  const GridSolution sol = owned_or_shared(spec, asym, opts);

  if (mode == PipelineMode::Forward) {
    ExperimentReport report =
        report_skeleton("example1.forward", spec, opts, 0.0);
    const auto u0 = sample_asymptotic(asym, sol.x, sol.t);
    const double err = relative_l2_error(sol.x, sol.t, u0, sol.u);
    report.metrics.push_back(banded_metric("forward_vs_asymptotic_rel_l2",
                                           err, 0.010154, 0.005, 0.02));
    append_forward_notes(report, sol);
    report.runtime_seconds = timer.seconds();
    return report;
  }

  ExperimentReport report = report_skeleton("example1.ip1", spec, opts, delta);
  const int k = 200;
  const double t0 = 1.0;
  std::vector<double> grid(opts.error_grid), truth(opts.error_grid);
  for (int i = 0; i < opts.error_grid; ++i) {
    grid[i] = static_cast<double>(i) / (opts.error_grid - 1);
    truth[i] = spec.field(grid[i], t0);
  }
  auto one_draw = std::function<double(std::uint64_t)>(
      [&](std::uint64_t s) {
        const MeasurementSet meas = synthesize_spatial(
            sol, MeasurementKind::SpatialGradient, k, t0, delta, s);
        const RecoveredCoefficient rec = ip1_recover(asym, meas);
        std::vector<double> recovered(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
          recovered[i] = rec.fit(grid[i]);
        return relative_l2_error(grid, recovered, truth);
      });
  const auto draws = fan_out(opts.repetitions, seed, 0, one_draw);
  std::vector<double> errors;
  for (const DrawResult& d : draws) errors.push_back(d.error);
  const InverseTarget tgt =
      pick_target(delta, 0.018169, 0.037, 0.027691, 0.056);
  report.metrics.push_back(banded_metric(
      "ip1_median_rel_l2", median(errors), tgt.target, 0.0, tgt.hi,
      tgt.pinned ? "median over " + std::to_string(opts.repetitions) + " draws"
                 : "no pinned reference at this noise level"));
  append_draw_notes(report, draws);
  append_forward_notes(report, sol);
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport run_example2(PipelineMode mode, double delta,
                              std::uint64_t seed, const ExampleOptions& opts) {
  Timer timer;
  const ProblemSpec spec = example2_spec();
  const AsymptoticSolution asym(spec);
  const GridSolution sol = owned_or_shared(spec, asym, opts);
  const double period = spec.boundary.period;

  if (mode == PipelineMode::Forward) {
    ExperimentReport report =
        report_skeleton("example2.forward", spec, opts, 0.0);
    // Error over two periods of the periodic regime: tile the converged
    // orbit, re-using the seam slab once.
    const int per = static_cast<int>(sol.t.size()) - 1;
    std::vector<double> t2(2 * per + 1);
    std::vector<std::vector<double>> u2(t2.size());
    for (int j = 0; j <= 2 * per; ++j) {
      t2[j] = j <= per ? sol.t[j] : period + sol.t[j - per];
      u2[j] = sol.u[j <= per ? j : j - per];
    }
    const auto u0 = sample_asymptotic(asym, sol.x, t2);
    const double err = relative_l2_error(sol.x, t2, u0, u2);
    report.metrics.push_back(banded_metric("forward_vs_asymptotic_rel_l2",
                                           err, 0.0176743, 0.009, 0.035));
    append_forward_notes(report, sol);
    report.runtime_seconds = timer.seconds();
    return report;
  }

  ExperimentReport report = report_skeleton("example2.ip2", spec, opts, delta);
  const int k = 40;
  const double horizon = 2.0 * period;
  std::vector<double> grid(opts.error_grid), truth(opts.error_grid);
  for (int i = 0; i < opts.error_grid; ++i) {
    grid[i] = horizon * static_cast<double>(i) / (opts.error_grid - 1);
    truth[i] = spec.field.temporal_value(grid[i]);
  }
  auto one_draw = std::function<double(std::uint64_t)>(
      [&](std::uint64_t s) {
        const MeasurementSet meas =
            synthesize_temporal(spec, sol, asym, k, delta, s, horizon);
        const RecoveredCoefficient rec = ip2_recover(spec, meas);
        std::vector<double> recovered(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i)
          recovered[i] = rec.fit(grid[i]);
        return relative_l2_error(grid, recovered, truth);
      });
  const auto draws = fan_out(opts.repetitions, seed, 0, one_draw);
  std::vector<double> errors;
  for (const DrawResult& d : draws) errors.push_back(d.error);
  const InverseTarget tgt = pick_target(delta, 0.018942, 0.038, 0.039787, 0.08);
  report.metrics.push_back(banded_metric(
      "ip2_median_rel_l2", median(errors), tgt.target, 0.0, tgt.hi,
      tgt.pinned ? "median over " + std::to_string(opts.repetitions) + " draws"
                 : "no pinned reference at this noise level"));
  append_draw_notes(report, draws);
  append_forward_notes(report, sol);
  report.runtime_seconds = timer.seconds();
  return report;
}

ExperimentReport run_convergence_study(InverseProblem which,
                                       const ConvergenceOptions& opts) {
  if (opts.deltas.size() < 4)
    fail(ErrorCode::InvalidArgument,
         "convergence study needs at least 4 noise levels");
  Timer timer;
  std::vector<double> deltas = opts.deltas;
  std::sort(deltas.begin(), deltas.end());
  for (double d : deltas)
    if (!(d > 0.0))
      fail(ErrorCode::InvalidArgument, "noise levels must be positive");

  const bool spatial = which == InverseProblem::SpatialCoefficient;
  ExperimentReport report;
  report.experiment = spatial ? "convergence.ip1" : "convergence.ip2";
  report.grid_nx = opts.nx;
  report.grid_nt = opts.nt;
  report.spec_digest =
      hex_digest(spec_digest(spatial ? example1_spec() : example2_spec()));

  std::vector<double> medians;
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double delta = deltas[di];
    const double mu_raw =
        opts.mu_ref * std::pow(delta / opts.delta_ref, 0.6);
    const double mu = std::max(opts.mu_floor, mu_raw);
    const bool floor_limited = mu * std::abs(std::log(mu)) > std::sqrt(delta);
    const double ratio = std::sqrt(opts.delta_ref / delta);
    const int k_ref = spatial ? opts.k_ref_ip1 : opts.k_ref_ip2;
    const int k = std::max(8, static_cast<int>(std::lround(k_ref * ratio)));
    const int nx = std::min(
        opts.nx_cap,
        std::max(opts.nx, static_cast<int>(std::lround(opts.nx * ratio))));
    const int nt = std::min(
        opts.nt_cap,
        std::max(opts.nt, static_cast<int>(std::lround(opts.nt * ratio))));

    ProblemSpec spec = spatial ? example1_spec() : example2_spec();
    spec.mu = mu;
    const AsymptoticSolution asym(spec);
    ForwardOptions fopt;
    fopt.nx = nx;
    fopt.nt = nt;
    const GridSolution sol = solve_forward(spec, asym, fopt);
    const double period = spec.boundary.period;
    const double horizon = 2.0 * period;
    const double t0 = 0.5 * period;

    const int error_grid = 1001;
    std::vector<double> grid(error_grid), truth(error_grid);
    for (int i = 0; i < error_grid; ++i) {
      if (spatial) {
        grid[i] = static_cast<double>(i) / (error_grid - 1);
        truth[i] = spec.field(grid[i], t0);
      } else {
        grid[i] = horizon * static_cast<double>(i) / (error_grid - 1);
        truth[i] = spec.field.temporal_value(grid[i]);
      }
    }

    auto one_draw = std::function<double(std::uint64_t)>(
        [&](std::uint64_t s) {
          RecoveredCoefficient rec;
          if (spatial) {
            const MeasurementSet meas = synthesize_spatial(
                sol, MeasurementKind::SpatialGradient, k, t0, delta, s);
            rec = ip1_recover(asym, meas);
          } else {
            const MeasurementSet meas =
                synthesize_temporal(spec, sol, asym, k, delta, s, horizon);
            rec = ip2_recover(spec, meas);
          }
          std::vector<double> recovered(grid.size());
          for (std::size_t i = 0; i < grid.size(); ++i)
            recovered[i] = rec.fit(grid[i]);
          return relative_l2_error(grid, recovered, truth);
        });
    const auto draws =
        fan_out(opts.seeds_per_delta, opts.base_seed, di * 1000, one_draw);
    std::vector<double> errors;
    for (const DrawResult& d : draws) {
      errors.push_back(d.error);
      report.seeds.push_back(d.seed);
    }
    const double med = median(errors);
    medians.push_back(med);

    std::string note = "delta=" + format_double(delta) +
                       " mu=" + format_double(mu) + " k=" + std::to_string(k) +
                       " nx=" + std::to_string(nx) +
                       " nt=" + std::to_string(nt);
    if (floor_limited) note += " resolution-floor";
    report.metrics.push_back(banded_metric(
        "median_rel_l2_" + std::to_string(di), med, 0.0, 0.0, 1.0, note));
    report.notes.push_back(note + " median=" + format_double(med));
  }

  const double slope = loglog_slope(deltas, medians);
  report.metrics.push_back(
      banded_metric("convergence_slope", slope, 0.5, 0.3, 0.7,
                    "log-log fit of median error vs noise level"));
  std::sort(report.seeds.begin(), report.seeds.end());
  report.runtime_seconds = timer.seconds();
  return report;
}

void export_forward_surface(const GridSolution& sol, const std::string& path) {
  std::ostringstream out;
  out << "x,t,u\n";
  for (std::size_t j = 0; j < sol.t.size(); ++j)
    for (std::size_t i = 0; i < sol.x.size(); ++i)
      out << format_double(sol.x[i]) << "," << format_double(sol.t[j]) << ","
          << format_double(sol.u[j][i]) << "\n";
  write_text_file(path, out.str());
}

void export_coefficient_curves(const std::vector<double>& nodes,
                               const std::vector<double>& truth,
                               const std::vector<double>& recovered,
                               const std::string& path) {
  if (truth.size() != nodes.size() || recovered.size() != nodes.size())
    fail(ErrorCode::InvalidArgument, "coefficient curves: size mismatch");
  std::ostringstream out;
  out << "node,f_true,f_rec\n";
  for (std::size_t i = 0; i < nodes.size(); ++i)
    out << format_double(nodes[i]) << "," << format_double(truth[i]) << ","
        << format_double(recovered[i]) << "\n";
  write_text_file(path, out.str());
}

void export_transition_track(const GridSolution& sol,
                             const AsymptoticSolution& asym, int samples,
                             const std::string& path) {
  if (samples < 2)
    fail(ErrorCode::InvalidArgument, "transition track needs >= 2 samples");
  std::ostringstream out;
  out << "t,x_tp,x0\n";
  const double T = asym.period();
  for (int j = 0; j < samples; ++j) {
    const double t = T * static_cast<double>(j) / (samples - 1);
    const TransitionPoint tp = detect_transition(sol, asym, t);
    out << format_double(t) << "," << format_double(tp.x) << ","
        << format_double(asym.transition_center(t)) << "\n";
  }
  write_text_file(path, out.str());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace rda
