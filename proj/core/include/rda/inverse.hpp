#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rda/asymptotics.hpp"
#include "rda/forward.hpp"
#include "rda/model.hpp"
#include "rda/regularize.hpp"

namespace rda {

enum class MeasurementKind {
  SpatialGradient,  // (x_i, du/dx(x_i, t0))
  SpatialValue,     // (x_i, u(x_i, t0))
  TemporalTriples,  // (t_i, u0_i, u1_i, x_layer_i)
};

struct MeasurementSet {
  MeasurementKind kind = MeasurementKind::SpatialGradient;
  double delta = 0.0;  // nominal relative noise level
  double t0 = 0.0;     // sampling time (spatial kinds)
  std::vector<double> nodes;
  std::vector<double> values;            // spatial kinds
  std::vector<double> u0, u1, layer_x;   // temporal triples
};

// Multiplicative uniform noise: out_i = (1 + delta*(2 r_i - 1)) * clean_i,
// independent per sample, bitwise reproducible per seed.
std::vector<double> synthesize_noise(const std::vector<double>& clean,
                                     double delta, std::uint64_t seed);

struct PrefitSample {
  double node = 0.0;
  double value = 0.0;
  bool rejected = false;  // tripped the near-singular division guard
};

struct RecoveredCoefficient {
  SmoothedFunction fit;     // recovered coefficient as a smooth function
  double epsilon = 0.0;
  SmoothedFunction::Selection selection = SmoothedFunction::Selection::Fixed;
  LayerBand excluded;       // widened band dropped from the data (spatial)
  std::vector<PrefitSample> prefit;  // pointwise estimates entering the fit
  int used = 0;
  int rejected = 0;
};

// Spatial recovery: drop measurement nodes inside the layer band at t0
// (widened by one measurement spacing), turn values into gradients when
// needed (one penalized side fit per subdomain, then differentiation) and
// fit one smooth coefficient across [0,1] by the discrepancy principle.
RecoveredCoefficient ip1_recover(const AsymptoticSolution& asym,
                                 const MeasurementSet& meas);

// Pointwise temporal estimates f_i = (u0_i + u1_i)/(1 - 2 x_i), with the
// guard |1 - 2 x_i| <= a rejecting the node (division too close to
// singular). Rejection is per node; rejected samples stay in the output.
std::vector<PrefitSample> ip2_pointwise(const MeasurementSet& meas,
                                        double a_margin);

// Temporal recovery: guard + penalized fit over one period. Uses the margin
// a from the ProblemSpec; throws InvalidArgument when none is set.
RecoveredCoefficient ip2_recover(const ProblemSpec& spec,
                                 const MeasurementSet& meas);

// Samples a forward solution at k+1 uniform x nodes at time t0 and applies
// noise. Gradient data differentiates slabs with the 4th-order stencil.
MeasurementSet synthesize_spatial(const GridSolution& sol,
                                  MeasurementKind kind, int k, double t0,
                                  double delta, std::uint64_t seed);

// Samples boundary traces and detected layer positions at k+1 uniform times
// over [0, horizon] (default: one period) and applies noise (independent
// substreams per channel).
MeasurementSet synthesize_temporal(const ProblemSpec& spec,
                                   const GridSolution& sol,
                                   const AsymptoticSolution& asym, int k,
                                   double delta, std::uint64_t seed,
                                   double horizon = 0.0);

// CSV with a mandatory header: "x,omega" | "x,u" | "t,u0,u1,xtp".
MeasurementSet read_measurement_csv(const std::string& path);
void write_measurement_csv(const std::string& path, const MeasurementSet& m);

}  // namespace rda
