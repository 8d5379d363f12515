#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rda/forward.hpp"
#include "rda/inverse.hpp"
#include "rda/model.hpp"

namespace rda {

// ||a - b|| / ||b|| in the trapezoid-quadrature L2 norm on the given nodes.
double relative_l2_error(const std::vector<double>& nodes,
                         const std::vector<double>& a,
                         const std::vector<double>& b);

// Same on a tensor grid; fields are indexed [time][space] like GridSolution.
double relative_l2_error(const std::vector<double>& x,
                         const std::vector<double>& t,
                         const std::vector<std::vector<double>>& a,
                         const std::vector<std::vector<double>>& b);

struct MetricResult {
  std::string name;
  double value = 0.0;
  double target = 0.0;  // pinned reference value, 0 when none applies
  double lo = 0.0;      // acceptance band
  double hi = 0.0;
  bool pass = false;
  std::string note;

  bool operator==(const MetricResult&) const = default;
};

struct ExperimentReport {
  std::string experiment;
  std::string spec_digest;  // hex digest of the canonical config text
  int grid_nx = 0;
  int grid_nt = 0;
  double delta = 0.0;
  std::vector<std::uint64_t> seeds;  // ascending
  std::vector<MetricResult> metrics;
  std::vector<std::string> notes;
  // Wall-clock diagnostics. Exporters zero it first so written artifacts
  // stay byte-identical between runs; the console summary keeps it.
  double runtime_seconds = 0.0;

  bool all_pass() const;
  std::string to_json() const;
  static ExperimentReport from_json(const std::string& text);
  std::string summary() const;

  bool operator==(const ExperimentReport&) const = default;
};

// Built-in benchmark problems used by the example drivers.
ProblemSpec example1_spec();  // quadratic spatial coefficient, constant traces
ProblemSpec example2_spec();  // temporal coefficient, trigonometric traces

enum class PipelineMode { Forward, Inverse };

struct ExampleOptions {
  int nx = 801;
  int nt = 401;
  int repetitions = 10;   // independent noise draws in inverse mode
  int error_grid = 1001;  // evaluation nodes for recovered-coefficient error
  // Borrowed pre-computed forward solution on the same grid; skips the
  // internal solve so one solve can back several pipelines.
  const GridSolution* forward_solution = nullptr;
};

// Forward mode: periodic forward solve vs the matched asymptotic solution.
// Inverse mode: spatial-coefficient recovery from noisy gradient snapshots
// (k = 200, t0 = 1), median error over `repetitions` derived seeds.
ExperimentReport run_example1(PipelineMode mode, double delta,
                              std::uint64_t seed,
                              const ExampleOptions& opts = {});

// Forward mode: error over two periods of the periodic regime.
// Inverse mode: temporal-coefficient recovery from boundary traces and
// detected layer positions (k = 40 over two periods).
ExperimentReport run_example2(PipelineMode mode, double delta,
                              std::uint64_t seed,
                              const ExampleOptions& opts = {});

enum class InverseProblem { SpatialCoefficient, TemporalCoefficient };

struct ConvergenceOptions {
  std::vector<double> deltas = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2};
  int seeds_per_delta = 10;
  std::uint64_t base_seed = 2026;
  int nx = 801;
  int nt = 401;
  // mu(delta) = mu_ref * (delta/delta_ref)^0.6 clamped below at mu_floor;
  // clamped rows are flagged as resolution-floor dominated.
  double mu_ref = 0.02;
  double delta_ref = 1e-2;
  double mu_floor = 0.004;
  // measurement counts scale like 1/sqrt(delta) from these references
  int k_ref_ip1 = 20;
  int k_ref_ip2 = 40;
  // spatial resolution scales the same way (first-order transport bias
  // h ~ sqrt(delta) stays below the noise floor), capped at nx_cap
  int nx_cap = 6401;
  // time steps scale with nx so the transition front crosses at most a few
  // cells per step, which keeps the previous slab inside Newton's basin
  int nt_cap = 6401;
};

// Median recovery error per noise level plus the fitted log-log slope
// (target 0.5, band [0.3, 0.7]). Repetitions fan out to a thread pool;
// aggregation sorts by seed so the report is order-independent.
ExperimentReport run_convergence_study(InverseProblem which,
                                       const ConvergenceOptions& opts = {});

// ---- plot-data export (deterministic CSV) ----

// header "x,t,u", one row per (space, time) node, time-major order
void export_forward_surface(const GridSolution& sol, const std::string& path);

// header "node,f_true,f_rec"
void export_coefficient_curves(const std::vector<double>& nodes,
                               const std::vector<double>& truth,
                               const std::vector<double>& recovered,
                               const std::string& path);

// header "t,x_tp,x0": detected layer position vs its zero-order estimate
void export_transition_track(const GridSolution& sol,
                             const AsymptoticSolution& asym, int samples,
                             const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace rda
