#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rda {

// Scalar trace of t, period left to the owner. Built-ins keep a printable
// representation so problem specs can be serialized and digested.
class TimeTrace {
 public:
  TimeTrace() : TimeTrace(trig(0, 0, 0)) {}

  // c0 + c1*cos(t) + c2*sin(t)
  static TimeTrace trig(double c0, double c1, double c2);
  static TimeTrace custom(std::function<double(double)> fn,
                          std::string repr = "custom");

  double operator()(double t) const { return fn_(t); }
  const std::string& repr() const { return repr_; }

 private:
  struct raw_tag {};
  explicit TimeTrace(raw_tag) {}  // factories fill the members themselves

  std::function<double(double)> fn_;
  std::string repr_;
};

enum class FieldKind { SpatialOnly, TemporalOnly, General };

// Source amplitude F(x,t) on [0,1] x R. Built-ins carry closed-form
// cumulative integrals along x; custom fields fall back to quadrature.
class CoefficientField {
 public:
  CoefficientField() : CoefficientField(temporal_trig(0, 0, 0)) {}

  // f(x) = coeffs[0] + coeffs[1] x + ... (time independent)
  static CoefficientField spatial_polynomial(std::vector<double> coeffs);
  // f(t) = c0 + c1*cos(t) + c2*sin(t) (space independent)
  static CoefficientField temporal_trig(double c0, double c1, double c2);
  static CoefficientField general(std::function<double(double, double)> fn,
                                  std::string repr = "custom");

  double operator()(double x, double t) const { return fn_(x, t); }
  // integral of F(s, t) ds over [x_from, x_to] at fixed t
  double integral(double x_from, double x_to, double t) const;
  FieldKind kind() const { return kind_; }
  const std::string& repr() const { return repr_; }

  // Requires kind() == TemporalOnly.
  double temporal_value(double t) const;

 private:
  struct raw_tag {};
  explicit CoefficientField(raw_tag) {}  // factories fill the members

  FieldKind kind_ = FieldKind::General;
  std::function<double(double, double)> fn_;
  // closed-form integral when available, else empty
  std::function<double(double, double, double)> integral_;
  std::string repr_;
};

struct BoundaryData {
  TimeTrace u0;   // trace at x = 0
  TimeTrace u1;   // trace at x = 1
  double period = 1.0;
};

struct ProblemSpec {
  CoefficientField field;
  BoundaryData boundary;
  double mu = 0.02;
  double theta = 0.5;                  // strength exponent of the branch gap
  std::optional<double> a_margin;     // guard margin for the 1 - 2x division
};

struct SpaceTimeGrid {
  std::vector<double> x;  // ascending, spans [0,1]
  std::vector<double> t;  // ascending, spans [0, horizon]

  static SpaceTimeGrid uniform(int nx, int nt, double horizon);
  double h() const;   // max spatial step
  double h1() const;  // max temporal step
};

// ---- validators ----

struct ValidationItem {
  std::string name;
  double lhs = 0.0;       // quantity under test
  double rhs = 0.0;       // threshold it is compared against
  bool pass = false;
  std::string note;
};

struct ValidationReport {
  std::string title;
  std::vector<ValidationItem> items;
  bool pass = false;
  std::string to_text() const;
};

// Boundary traces dominate the accumulated field: u0 stays below the left
// admissible band, u1 above the right one, and the traces are separated.
ValidationReport validate_boundary_dominance(const ProblemSpec& spec,
                                             int samples_per_axis = 512);

// The squared outer branches cross an odd number of times with negative
// slope at the chosen root, for every sampled t.
ValidationReport validate_transition_root(const ProblemSpec& spec,
                                          int t_samples = 512);

// Every supplied layer position keeps the margin |1 - 2x| > a away from the
// division singularity of the temporal recovery formula.
ValidationReport validate_layer_margin(const ProblemSpec& spec,
                                       const std::vector<double>& positions);

// ---- config files ----
//
// Grammar (one `key = value` per line, '#' starts a comment):
//   field = poly_x c0 c1 ...   | trig_t c0 c1 c2 | <number>
//   u0    = trig_t c0 c1 c2    | <number>
//   u1    = trig_t c0 c1 c2    | <number>
//   mu    = <number>            T = <number>
//   theta = <number>  (optional, default 0.5)
//   a     = <number>  (optional)
// A bare number means a constant trace/field. Unknown keys are errors.

ProblemSpec parse_problem_config(const std::string& text);
ProblemSpec load_problem_config(const std::string& path);
std::string canonical_config_text(const ProblemSpec& spec);
std::uint64_t spec_digest(const ProblemSpec& spec);

}  // namespace rda
