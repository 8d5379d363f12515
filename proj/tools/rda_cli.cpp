// Command line front end: validation, asymptotic/forward solvers, the two
// coefficient-recovery pipelines and the packaged example experiments.
#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rda/asymptotics.hpp"
#include "rda/errors.hpp"
#include "rda/forward.hpp"
#include "rda/harness.hpp"
#include "rda/inverse.hpp"
#include "rda/model.hpp"
#include "rda/numerics.hpp"

namespace fs = std::filesystem;

namespace {

struct Timer {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

std::string selection_name(rda::SmoothedFunction::Selection s) {
  switch (s) {
    case rda::SmoothedFunction::Selection::Fixed: return "fixed";
    case rda::SmoothedFunction::Selection::Converged: return "converged";
    case rda::SmoothedFunction::Selection::ClampedLow: return "clamped-low";
    case rda::SmoothedFunction::Selection::ClampedHigh: return "clamped-high";
  }
  return "unknown";
}

// Artifacts stay byte-stable between runs: wall-clock time goes to the
// console summary only.
void write_report(rda::ExperimentReport report, const fs::path& path) {
  report.runtime_seconds = 0.0;
  rda::write_text_file(path.string(), report.to_json());
}

void write_recovered_csv(const rda::SmoothedFunction& fit, double lo,
                         double hi, int samples, const std::string& path) {
  std::ostringstream out;
  out << "node,value\n";
  for (int i = 0; i < samples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / (samples - 1);
    out << rda::format_double(x) << "," << rda::format_double(fit(x)) << "\n";
  }
  rda::write_text_file(path, out.str());
}

void write_prefit_csv(const std::vector<rda::PrefitSample>& prefit,
                      const std::string& path) {
  std::ostringstream out;
  out << "node,value,rejected\n";
  for (const rda::PrefitSample& s : prefit)
    out << rda::format_double(s.node) << "," << rda::format_double(s.value)
        << "," << (s.rejected ? 1 : 0) << "\n";
  rda::write_text_file(path, out.str());
}

std::string recovery_diagnostics(const rda::RecoveredCoefficient& rec,
                                 double delta) {
  std::ostringstream out;
  out << "epsilon: " << rda::format_double(rec.epsilon) << "\n";
  out << "selection: " << selection_name(rec.selection) << "\n";
  out << "rms_residual: " << rda::format_double(rec.fit.rms_residual())
      << "\n";
  out << "noise_level: " << rda::format_double(delta) << "\n";
  out << "nodes_used: " << rec.used << "\n";
  out << "nodes_rejected: " << rec.rejected << "\n";
  if (rec.excluded.width() > 0.0)
    out << "excluded_band: [" << rda::format_double(rec.excluded.lo) << ", "
        << rda::format_double(rec.excluded.hi) << "]\n";
  return out.str();
}

// ---- subcommand option bags ----

struct ValidateArgs {
  std::string config;
};

struct AsymptoticArgs {
  std::string config, out;
  int nx = 201, nt = 41;
};

struct ForwardArgs {
  std::string config, out, meta;
  int nx = 801, nt = 401;
};

struct InverseArgs {
  std::string config, data, out, prefit, diagnostics, save_data;
  bool synthesize = false;
  double delta = 1e-3;
  std::uint64_t seed = 1;
  int k = 0;          // 0 -> pipeline default
  double t0 = -1.0;   // ip1 sampling time, -1 -> half period
  double horizon = 0; // ip2 sampling window, 0 -> one period
  std::string kind = "gradient";
  int nx = 801, nt = 401;
  int samples = 201;
};

struct ExampleArgs {
  std::string out = ".";
  std::string mode = "all";
  double delta = 1e-3;
  std::uint64_t seed = 1;
  int nx = 801, nt = 401, reps = 10;
};

struct ConvergenceArgs {
  std::string problem = "ip1";
  std::string out = ".";
  std::vector<double> deltas;
  int seeds_per_delta = 10;
  std::uint64_t seed = 2026;
  int nx = 801, nt = 401;
};

int run_validate(const ValidateArgs& args) {
  const rda::ProblemSpec spec = rda::load_problem_config(args.config);
  std::vector<rda::ValidationReport> reports;
  reports.push_back(rda::validate_boundary_dominance(spec));
  reports.push_back(rda::validate_transition_root(spec));
  if (spec.a_margin) {
    const rda::AsymptoticSolution asym(spec);
    std::vector<double> positions;
    for (int i = 0; i <= 256; ++i)
      positions.push_back(asym.transition_center(
          spec.boundary.period * static_cast<double>(i) / 256));
    reports.push_back(rda::validate_layer_margin(spec, positions));
  }
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << r.to_text() << "\n";
    ok = ok && r.pass;
  }
  std::cout << (ok ? "all checks passed" : "checks FAILED") << "\n";
  return ok ? 0 : 1;
}

int run_asymptotic(const AsymptoticArgs& args) {
  const rda::ProblemSpec spec = rda::load_problem_config(args.config);
  const rda::AsymptoticSolution asym(spec);
  if (args.nx < 2 || args.nt < 2)
    rda::fail(rda::ErrorCode::InvalidArgument, "grid must be at least 2 x 2");
  std::ostringstream out;
  out << "x,t,u0,branch,x0_of_t,xhat_l,xhat_r\n";
  for (int j = 0; j < args.nt; ++j) {
    const double t =
        spec.boundary.period * static_cast<double>(j) / (args.nt - 1);
    const double x0 = asym.transition_center(t);
    const rda::LayerBand band = asym.layer_band(t);
    for (int i = 0; i < args.nx; ++i) {
      const double x = static_cast<double>(i) / (args.nx - 1);
      out << rda::format_double(x) << "," << rda::format_double(t) << ","
          << rda::format_double(asym(x, t)) << ","
          << (x <= x0 ? "left" : "right") << "," << rda::format_double(x0)
          << "," << rda::format_double(band.lo) << ","
          << rda::format_double(band.hi) << "\n";
    }
  }
  rda::write_text_file(args.out, out.str());
  std::cout << "wrote " << args.out << " (" << args.nx << " x " << args.nt
            << " samples)\n";
  return 0;
}

int run_forward(const ForwardArgs& args) {
  Timer timer;
  const rda::ProblemSpec spec = rda::load_problem_config(args.config);
  const rda::AsymptoticSolution asym(spec);
  rda::ForwardOptions fopt;
  fopt.nx = args.nx;
  fopt.nt = args.nt;
  const rda::GridSolution sol = rda::solve_forward(spec, asym, fopt);
  rda::export_forward_surface(sol, args.out);

  nlohmann::ordered_json meta;
  meta["grid_nx"] = args.nx;
  meta["grid_nt"] = args.nt;
  meta["scheme"] = sol.scheme;
  meta["periods_marched"] = sol.periods_marched;
  meta["periodicity_residual"] = sol.periodicity_residual;
  meta["newton_iterations"] = sol.newton_iterations;
  meta["runtime_seconds"] = timer.seconds();
  const std::string meta_path =
      args.meta.empty() ? args.out + ".meta.json" : args.meta;
  rda::write_text_file(meta_path, meta.dump(2) + "\n");
  std::cout << "wrote " << args.out << " and " << meta_path << " ("
            << sol.periods_marched << " periods, residual "
            << rda::format_double(sol.periodicity_residual) << ")\n";
  return 0;
}

int run_ip1(const InverseArgs& args) {
  const rda::ProblemSpec spec = rda::load_problem_config(args.config);
  const rda::AsymptoticSolution asym(spec);
  rda::MeasurementSet meas;
  if (args.synthesize) {
    rda::ForwardOptions fopt;
    fopt.nx = args.nx;
    fopt.nt = args.nt;
    const rda::GridSolution sol = rda::solve_forward(spec, asym, fopt);
    const int k = args.k > 0 ? args.k : 200;
    const double t0 =
        args.t0 >= 0.0 ? args.t0 : 0.5 * spec.boundary.period;
    const auto kind = args.kind == "value"
                          ? rda::MeasurementKind::SpatialValue
                          : rda::MeasurementKind::SpatialGradient;
    meas = rda::synthesize_spatial(sol, kind, k, t0, args.delta, args.seed);
    if (!args.save_data.empty())
      rda::write_measurement_csv(args.save_data, meas);
  } else {
    if (args.data.empty())
      rda::fail(rda::ErrorCode::InvalidArgument,
                "ip1 needs --data FILE or --synthesize");
    meas = rda::read_measurement_csv(args.data);
    if (meas.kind == rda::MeasurementKind::TemporalTriples)
      rda::fail(rda::ErrorCode::InvalidArgument,
                "ip1 expects spatial measurements (header x,omega or x,u)");
    meas.delta = args.delta;
    meas.t0 = args.t0 >= 0.0 ? args.t0 : 0.5 * spec.boundary.period;
  }
  const rda::RecoveredCoefficient rec = rda::ip1_recover(asym, meas);
  write_recovered_csv(rec.fit, 0.0, 1.0, args.samples, args.out);
  if (!args.prefit.empty()) write_prefit_csv(rec.prefit, args.prefit);
  const std::string diag = recovery_diagnostics(rec, args.delta);
  if (!args.diagnostics.empty()) rda::write_text_file(args.diagnostics, diag);
  std::cout << diag << "wrote " << args.out << "\n";
  return 0;
}

int run_ip2(const InverseArgs& args) {
  const rda::ProblemSpec spec = rda::load_problem_config(args.config);
  if (!spec.a_margin)
    rda::fail(rda::ErrorCode::InvalidArgument,
              "ip2 needs the config to set the division margin 'a'");
  const rda::AsymptoticSolution asym(spec);
  rda::MeasurementSet meas;
  if (args.synthesize) {
    rda::ForwardOptions fopt;
    fopt.nx = args.nx;
    fopt.nt = args.nt;
    const rda::GridSolution sol = rda::solve_forward(spec, asym, fopt);
    const int k = args.k > 0 ? args.k : 40;
    meas = rda::synthesize_temporal(spec, sol, asym, k, args.delta, args.seed,
                                    args.horizon);
    if (!args.save_data.empty())
      rda::write_measurement_csv(args.save_data, meas);
  } else {
    if (args.data.empty())
      rda::fail(rda::ErrorCode::InvalidArgument,
                "ip2 needs --data FILE or --synthesize");
    meas = rda::read_measurement_csv(args.data);
    if (meas.kind != rda::MeasurementKind::TemporalTriples)
      rda::fail(rda::ErrorCode::InvalidArgument,
                "ip2 expects temporal triples (header t,u0,u1,xtp)");
    meas.delta = args.delta;
  }
  const rda::RecoveredCoefficient rec = rda::ip2_recover(spec, meas);
  const double hi = std::max(spec.boundary.period, meas.nodes.back());
  write_recovered_csv(rec.fit, 0.0, hi, args.samples, args.out);
  if (!args.prefit.empty()) write_prefit_csv(rec.prefit, args.prefit);
  const std::string diag = recovery_diagnostics(rec, args.delta);
  if (!args.diagnostics.empty()) rda::write_text_file(args.diagnostics, diag);
  std::cout << diag << "wrote " << args.out << "\n";
  return 0;
}

int run_example(int which, const ExampleArgs& args) {
  const bool want_forward = args.mode == "all" || args.mode == "forward";
  const bool want_inverse = args.mode == "all" || args.mode == "ip1" ||
                            args.mode == "ip2" || args.mode == "inverse";
  if (!want_forward && !want_inverse)
    rda::fail(rda::ErrorCode::InvalidArgument,
              "mode must be all, forward, ip1 or ip2");
  fs::create_directories(args.out);
  const std::string tag = which == 1 ? "example1" : "example2";

  const rda::ProblemSpec spec =
      which == 1 ? rda::example1_spec() : rda::example2_spec();
  const rda::AsymptoticSolution asym(spec);
  rda::ForwardOptions fopt;
  fopt.nx = args.nx;
  fopt.nt = args.nt;
  const rda::GridSolution sol = rda::solve_forward(spec, asym, fopt);

  rda::ExampleOptions opts;
  opts.nx = args.nx;
  opts.nt = args.nt;
  opts.repetitions = args.reps;
  opts.forward_solution = &sol;

  bool ok = true;
  const fs::path dir(args.out);
  rda::export_forward_surface(sol, (dir / (tag + "_surface.csv")).string());
  rda::export_transition_track(sol, asym, 201,
                               (dir / (tag + "_transition.csv")).string());

  if (want_forward) {
    const rda::ExperimentReport report =
        which == 1
            ? rda::run_example1(rda::PipelineMode::Forward, 0.0, args.seed,
                                opts)
            : rda::run_example2(rda::PipelineMode::Forward, 0.0, args.seed,
                                opts);
    write_report(report, dir / (tag + "_forward_report.json"));
    std::cout << report.summary() << "\n";
    ok = ok && report.all_pass();
  }

  if (want_inverse) {
    const rda::ExperimentReport report =
        which == 1 ? rda::run_example1(rda::PipelineMode::Inverse, args.delta,
                                       args.seed, opts)
                   : rda::run_example2(rda::PipelineMode::Inverse, args.delta,
                                       args.seed, opts);
    const std::string ip = which == 1 ? "ip1" : "ip2";
    write_report(report, dir / (tag + "_" + ip + "_report.json"));
    std::cout << report.summary() << "\n";
    ok = ok && report.all_pass();

    // Recovered-vs-true curve for the first noise draw of the report.
    const std::uint64_t draw_seed = rda::derive_seed(args.seed, 1);
    const int curve_samples = 201;
    std::vector<double> nodes(curve_samples), truth(curve_samples),
        recovered(curve_samples);
    if (which == 1) {
      const rda::MeasurementSet meas = rda::synthesize_spatial(
          sol, rda::MeasurementKind::SpatialGradient, 200, 1.0, args.delta,
          draw_seed);
      const rda::RecoveredCoefficient rec = rda::ip1_recover(asym, meas);
      for (int i = 0; i < curve_samples; ++i) {
        nodes[i] = static_cast<double>(i) / (curve_samples - 1);
        truth[i] = spec.field(nodes[i], 1.0);
        recovered[i] = rec.fit(nodes[i]);
      }
    } else {
      const double horizon = 2.0 * spec.boundary.period;
      const rda::MeasurementSet meas = rda::synthesize_temporal(
          spec, sol, asym, 40, args.delta, draw_seed, horizon);
      const rda::RecoveredCoefficient rec = rda::ip2_recover(spec, meas);
      for (int i = 0; i < curve_samples; ++i) {
        nodes[i] = horizon * static_cast<double>(i) / (curve_samples - 1);
        truth[i] = spec.field.temporal_value(nodes[i]);
        recovered[i] = rec.fit(nodes[i]);
      }
    }
    rda::export_coefficient_curves(
        nodes, truth, recovered, (dir / (tag + "_coefficient.csv")).string());
  }

  return ok ? 0 : 1;
}

int run_convergence(const ConvergenceArgs& args) {
  rda::ConvergenceOptions copts;
  if (!args.deltas.empty()) copts.deltas = args.deltas;
  copts.seeds_per_delta = args.seeds_per_delta;
  copts.base_seed = args.seed;
  copts.nx = args.nx;
  copts.nt = args.nt;
  const auto which = args.problem == "ip2"
                         ? rda::InverseProblem::TemporalCoefficient
                         : rda::InverseProblem::SpatialCoefficient;
  if (args.problem != "ip1" && args.problem != "ip2")
    rda::fail(rda::ErrorCode::InvalidArgument, "--problem must be ip1 or ip2");
  const rda::ExperimentReport report = rda::run_convergence_study(which, copts);

  fs::create_directories(args.out);
  const fs::path dir(args.out);
  write_report(report, dir / ("convergence_" + args.problem + "_report.json"));

  std::vector<double> deltas = copts.deltas;
  std::sort(deltas.begin(), deltas.end());
  std::ostringstream medians;
  medians << "delta,median_rel_l2\n";
  for (std::size_t i = 0; i < deltas.size(); ++i)
    medians << rda::format_double(deltas[i]) << ","
            << rda::format_double(report.metrics[i].value) << "\n";
  rda::write_text_file(
      (dir / ("convergence_" + args.problem + "_medians.csv")).string(),
      medians.str());

  std::cout << report.summary() << "\n";
  return report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"matched-asymptotics toolkit: layered periodic"
               " advection-diffusion problems and coefficient recovery"};
  app.require_subcommand(1);

  ValidateArgs v;
  auto* validate =
      app.add_subcommand("validate", "check a problem config against the "
                                     "admissibility conditions");
  validate->add_option("--config", v.config, "problem config file")
      ->required();

  AsymptoticArgs a;
  auto* asymptotic = app.add_subcommand(
      "asymptotic", "sample the matched asymptotic solution to CSV");
  asymptotic->add_option("--config", a.config)->required();
  asymptotic->add_option("--out", a.out, "output CSV")->required();
  asymptotic->add_option("--grid-nx", a.nx);
  asymptotic->add_option("--grid-nt", a.nt);

  ForwardArgs f;
  auto* forward = app.add_subcommand(
      "forward", "march the finite-volume scheme to the periodic regime");
  forward->add_option("--config", f.config)->required();
  forward->add_option("--out", f.out, "output CSV (x,t,u)")->required();
  forward->add_option("--meta", f.meta, "metadata sidecar path");
  forward->add_option("--grid-nx", f.nx);
  forward->add_option("--grid-nt", f.nt);

  auto add_inverse_options = [](CLI::App* cmd, InverseArgs& args) {
    cmd->add_option("--config", args.config)->required();
    cmd->add_option("--data", args.data, "measurement CSV");
    cmd->add_flag("--synthesize", args.synthesize,
                  "generate measurements from a forward solve");
    cmd->add_option("--delta", args.delta, "relative noise level");
    cmd->add_option("--seed", args.seed, "noise seed");
    cmd->add_option("--k", args.k, "measurement count (synthesis)");
    cmd->add_option("--out", args.out, "recovered coefficient CSV")
        ->required();
    cmd->add_option("--prefit", args.prefit, "pre-fit samples CSV");
    cmd->add_option("--diagnostics", args.diagnostics, "diagnostics text");
    cmd->add_option("--save-data", args.save_data,
                    "write synthesized measurements here");
    cmd->add_option("--grid-nx", args.nx);
    cmd->add_option("--grid-nt", args.nt);
    cmd->add_option("--samples", args.samples, "recovered CSV sample count");
  };

  InverseArgs i1;
  auto* ip1 = app.add_subcommand(
      "ip1", "recover a spatial coefficient from one-time snapshots");
  add_inverse_options(ip1, i1);
  ip1->add_option("--t0", i1.t0, "snapshot time (default: half period)");
  ip1->add_option("--kind", i1.kind, "gradient | value data")
      ->check(CLI::IsMember({"gradient", "value"}));

  InverseArgs i2;
  auto* ip2 = app.add_subcommand(
      "ip2", "recover a temporal coefficient from boundary traces and layer "
             "positions");
  add_inverse_options(ip2, i2);
  ip2->add_option("--horizon", i2.horizon,
                  "sampling window (default: one period)");

  ExampleArgs e1;
  auto* example1 = app.add_subcommand(
      "example1", "packaged spatial-coefficient benchmark");
  example1->add_option("--out", e1.out, "output directory");
  example1->add_option("--mode", e1.mode)
      ->check(CLI::IsMember({"all", "forward", "ip1", "inverse"}));
  example1->add_option("--delta", e1.delta);
  example1->add_option("--seed", e1.seed);
  example1->add_option("--grid-nx", e1.nx);
  example1->add_option("--grid-nt", e1.nt);
  example1->add_option("--reps", e1.reps, "noise draws in inverse mode");

  ExampleArgs e2;
  auto* example2 = app.add_subcommand(
      "example2", "packaged temporal-coefficient benchmark");
  example2->add_option("--out", e2.out, "output directory");
  example2->add_option("--mode", e2.mode)
      ->check(CLI::IsMember({"all", "forward", "ip2", "inverse"}));
  example2->add_option("--delta", e2.delta);
  example2->add_option("--seed", e2.seed);
  example2->add_option("--grid-nx", e2.nx);
  example2->add_option("--grid-nt", e2.nt);
  example2->add_option("--reps", e2.reps, "noise draws in inverse mode");

  ConvergenceArgs c;
  auto* convergence = app.add_subcommand(
      "convergence", "median recovery error vs noise level, fitted slope");
  convergence->add_option("--problem", c.problem, "ip1 | ip2");
  convergence->add_option("--out", c.out, "output directory");
  convergence->add_option("--deltas", c.deltas, "noise levels")
      ->delimiter(',');
  convergence->add_option("--seeds-per-delta", c.seeds_per_delta);
  convergence->add_option("--seed", c.seed, "base seed");
  convergence->add_option("--grid-nx", c.nx);
  convergence->add_option("--grid-nt", c.nt);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return run_validate(v);
    if (asymptotic->parsed()) return run_asymptotic(a);
    if (forward->parsed()) return run_forward(f);
    if (ip1->parsed()) return run_ip1(i1);
    if (ip2->parsed()) return run_ip2(i2);
    if (example1->parsed()) return run_example(1, e1);
    if (example2->parsed()) return run_example(2, e2);
    if (convergence->parsed()) return run_convergence(c);
  } catch (const rda::Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
