#include "rda/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rda/errors.hpp"
#include "rda/numerics.hpp"

namespace rda {

namespace {

std::string trig_repr(double c0, double c1, double c2) {
  return "trig_t " + format_double(c0) + " " + format_double(c1) + " " +
         format_double(c2);
}

}  // namespace

TimeTrace TimeTrace::trig(double c0, double c1, double c2) {
  TimeTrace trace{raw_tag{}};
  trace.fn_ = [c0, c1, c2](double t) {
    return c0 + c1 * std::cos(t) + c2 * std::sin(t);
  };
  trace.repr_ = trig_repr(c0, c1, c2);
  return trace;
}

TimeTrace TimeTrace::custom(std::function<double(double)> fn,
                            std::string repr) {
  TimeTrace trace{raw_tag{}};
  trace.fn_ = std::move(fn);
  trace.repr_ = std::move(repr);
  return trace;
}

CoefficientField CoefficientField::spatial_polynomial(
    std::vector<double> coeffs) {
  if (coeffs.empty())
    fail(ErrorCode::InvalidArgument, "spatial_polynomial: empty coefficients");
  CoefficientField field{raw_tag{}};
  field.kind_ = FieldKind::SpatialOnly;
  field.fn_ = [coeffs](double x, double) {
    double acc = 0.0;
    for (std::size_t j = coeffs.size(); j-- > 0;) acc = acc * x + coeffs[j];
    return acc;
  };
  field.integral_ = [coeffs](double a, double b, double) {
    auto anti = [&coeffs](double x) {
      double acc = 0.0;
      for (std::size_t j = coeffs.size(); j-- > 0;)
        acc = acc * x + coeffs[j] / static_cast<double>(j + 1);
      return acc * x;
    };
    return anti(b) - anti(a);
  };
  std::string repr = "poly_x";
  for (double c : coeffs) repr += " " + format_double(c);
  field.repr_ = repr;
  return field;
}

CoefficientField CoefficientField::temporal_trig(double c0, double c1,
                                                 double c2) {
  CoefficientField field{raw_tag{}};
  field.kind_ = FieldKind::TemporalOnly;
  field.fn_ = [c0, c1, c2](double, double t) {
    return c0 + c1 * std::cos(t) + c2 * std::sin(t);
  };
  field.integral_ = [fn = field.fn_](double a, double b, double t) {
    return (b - a) * fn(0.0, t);
  };
  field.repr_ = trig_repr(c0, c1, c2);
  return field;
}

CoefficientField CoefficientField::general(
    std::function<double(double, double)> fn, std::string repr) {
  CoefficientField field{raw_tag{}};
  field.kind_ = FieldKind::General;
  field.fn_ = std::move(fn);
  field.repr_ = std::move(repr);
  return field;
}

double CoefficientField::integral(double x_from, double x_to, double t) const {
  if (integral_) return integral_(x_from, x_to, t);
  const double sign = (x_to >= x_from) ? 1.0 : -1.0;
  const double a = std::min(x_from, x_to), b = std::max(x_from, x_to);
  if (a == b) return 0.0;
  return sign * simpson([this, t](double s) { return fn_(s, t); }, a, b);
}

double CoefficientField::temporal_value(double t) const {
  if (kind_ != FieldKind::TemporalOnly)
    fail(ErrorCode::InvalidArgument,
         "temporal_value: field depends on space");
  return fn_(0.0, t);
}

SpaceTimeGrid SpaceTimeGrid::uniform(int nx, int nt, double horizon) {
  if (nx < 2 || nt < 2 || !(horizon > 0))
    fail(ErrorCode::InvalidArgument, "SpaceTimeGrid::uniform: bad sizes");
  SpaceTimeGrid grid;
  grid.x.resize(nx);
  grid.t.resize(nt);
  for (int i = 0; i < nx; ++i)
    grid.x[i] = static_cast<double>(i) / (nx - 1);
  for (int j = 0; j < nt; ++j)
    grid.t[j] = horizon * static_cast<double>(j) / (nt - 1);
  grid.x.front() = 0.0;
  grid.x.back() = 1.0;
  grid.t.front() = 0.0;
  grid.t.back() = horizon;
  return grid;
}

double SpaceTimeGrid::h() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) m = std::max(m, x[i + 1] - x[i]);
  return m;
}

double SpaceTimeGrid::h1() const {
  double m = 0.0;
  for (std::size_t j = 0; j + 1 < t.size(); ++j) m = std::max(m, t[j + 1] - t[j]);
  return m;
}

std::string ValidationReport::to_text() const {
  std::string out = title + "\n";
  for (const auto& item : items) {
    out += item.pass ? "  PASS " : "  FAIL ";
    out += item.name + ": " + format_double(item.lhs) + " vs " +
           format_double(item.rhs);
    if (!item.note.empty()) out += "  (" + item.note + ")";
    out += "\n";
  }
  out += pass ? "  => PASS\n" : "  => FAIL\n";
  return out;
}

namespace {

// Cumulative field integrals sampled along x at fixed t. Closed forms are
// exact; the quadrature fallback shares one composite Simpson pass.
struct FieldPrefix {
  std::vector<double> x;
  std::vector<double> prefix;  // integral of F over [0, x_i]
  double total = 0.0;          // integral over [0, 1]
};

FieldPrefix field_prefix(const CoefficientField& field, double t,
                         int samples) {
  FieldPrefix fp;
  if (field.kind() != FieldKind::General) {
    fp.x.resize(samples);
    fp.prefix.resize(samples);
    for (int i = 0; i < samples; ++i) {
      fp.x[i] = static_cast<double>(i) / (samples - 1);
      fp.prefix[i] = field.integral(0.0, fp.x[i], t);
    }
  } else {
    // One 1025-point Simpson pass; prefix values at even node pairs.
    const int n = 1025;
    const double h = 1.0 / (n - 1);
    fp.x.reserve(n / 2 + 1);
    fp.prefix.reserve(n / 2 + 1);
    double acc = 0.0;
    fp.x.push_back(0.0);
    fp.prefix.push_back(0.0);
    double f0 = field(0.0, t);
    for (int m = 0; m + 2 < n; m += 2) {
      const double x1 = (m + 1) * h, x2 = (m + 2) * h;
      const double f1 = field(x1, t), f2 = field(x2, t);
      acc += h / 3.0 * (f0 + 4.0 * f1 + f2);
      fp.x.push_back(x2);
      fp.prefix.push_back(acc);
      f0 = f2;
    }
  }
  fp.total = fp.prefix.back();
  return fp;
}

}  // namespace

ValidationReport validate_boundary_dominance(const ProblemSpec& spec,
                                             int samples_per_axis) {
  if (samples_per_axis < 2)
    fail(ErrorCode::InvalidArgument, "validate_boundary_dominance: samples");
  const double T = spec.boundary.period;

  double max_u0 = -1e300, min_u1 = 1e300, min_gap = 1e300;
  double max_prefix = -1e300, max_suffix = -1e300;
  for (int j = 0; j < samples_per_axis; ++j) {
    const double t = T * static_cast<double>(j) / (samples_per_axis - 1);
    const double a = spec.boundary.u0(t), b = spec.boundary.u1(t);
    max_u0 = std::max(max_u0, a);
    min_u1 = std::min(min_u1, b);
    min_gap = std::min(min_gap, b - a);
    const FieldPrefix fp = field_prefix(spec.field, t, samples_per_axis);
    for (std::size_t i = 0; i < fp.x.size(); ++i) {
      max_prefix = std::max(max_prefix, fp.prefix[i]);
      max_suffix = std::max(max_suffix, fp.total - fp.prefix[i]);
    }
  }

  ValidationReport report;
  report.title = "boundary dominance";
  ValidationItem bound;
  bound.name = "field_integral_bound";
  bound.lhs = max_prefix;
  bound.rhs = max_suffix;
  bound.pass = true;
  bound.note = "max cumulative integral from 0 / to 1 (informational)";
  report.items.push_back(bound);

  ValidationItem left;
  left.name = "left_trace_below_band";
  left.lhs = max_u0;
  left.rhs = std::min(0.0, -max_prefix);
  left.pass = left.lhs < left.rhs;
  left.note = "max u0(t) < min(0, -max integral)";
  report.items.push_back(left);

  ValidationItem right;
  right.name = "right_trace_above_band";
  right.lhs = min_u1;
  right.rhs = std::max(0.0, max_suffix);
  right.pass = right.lhs > right.rhs;
  right.note = "min u1(t) > max(0, max integral)";
  report.items.push_back(right);

  ValidationItem gap;
  gap.name = "trace_separation";
  gap.lhs = min_gap;
  gap.rhs = 2.0 * std::pow(spec.mu, spec.theta);
  gap.pass = gap.lhs > gap.rhs;
  gap.note = "min (u1-u0) > 2 mu^theta";
  report.items.push_back(gap);

  report.pass = left.pass && right.pass && gap.pass;
  return report;
}

ValidationReport validate_transition_root(const ProblemSpec& spec,
                                          int t_samples) {
  if (t_samples < 1)
    fail(ErrorCode::InvalidArgument, "validate_transition_root: samples");
  const double T = spec.boundary.period;

  auto branch_left = [&spec](double x, double t) {
    return spec.boundary.u0(t) + spec.field.integral(0.0, x, t);
  };
  auto branch_right = [&spec](double x, double t) {
    return spec.boundary.u1(t) - spec.field.integral(x, 1.0, t);
  };
  auto square_gap = [&](double x, double t) {
    const double l = branch_left(x, t), r = branch_right(x, t);
    return l * l - r * r;
  };

  int t_without_root = 0, t_ambiguous = 0;
  double worst_slope = -1e300;  // max over t of dI/dx at the chosen root
  double x0_min = 1e300, x0_max = -1e300;
  for (int j = 0; j < t_samples; ++j) {
    const double t =
        (t_samples == 1) ? 0.0 : T * static_cast<double>(j) / (t_samples - 1);
    auto g = [&](double x) { return square_gap(x, t); };
    const auto brackets = scan_sign_changes(g, 0.0, 1.0, 257);
    if (brackets.empty()) {
      ++t_without_root;
      continue;
    }
    if (brackets.size() > 1) ++t_ambiguous;
    const double x0 = bisect(g, brackets.front().first,
                             brackets.front().second);
    // dI/dx = 2 F (phi_l - phi_r) since both branches have slope F.
    const double slope = 2.0 * spec.field(x0, t) *
                         (branch_left(x0, t) - branch_right(x0, t));
    worst_slope = std::max(worst_slope, slope);
    x0_min = std::min(x0_min, x0);
    x0_max = std::max(x0_max, x0);
  }

  ValidationReport report;
  report.title = "transition root";

  ValidationItem exists;
  exists.name = "root_exists_all_t";
  exists.lhs = static_cast<double>(t_without_root);
  exists.rhs = 0.0;
  exists.pass = t_without_root == 0;
  exists.note = "sampled t slices without a sign change";
  report.items.push_back(exists);

  ValidationItem slope;
  slope.name = "negative_slope_at_root";
  slope.lhs = worst_slope;
  slope.rhs = 0.0;
  slope.pass = exists.pass && worst_slope < 0.0;
  slope.note = "max over t of dI/dx at the chosen root";
  report.items.push_back(slope);

  ValidationItem range;
  range.name = "root_range";
  range.lhs = x0_min;
  range.rhs = x0_max;
  range.pass = true;
  range.note = "informational";
  report.items.push_back(range);

  ValidationItem ambiguous;
  ambiguous.name = "ambiguous_slices";
  ambiguous.lhs = static_cast<double>(t_ambiguous);
  ambiguous.rhs = 0.0;
  ambiguous.pass = true;
  ambiguous.note = "slices with multiple sign changes (reported, not fatal)";
  report.items.push_back(ambiguous);

  report.pass = exists.pass && slope.pass;
  return report;
}

ValidationReport validate_layer_margin(const ProblemSpec& spec,
                                       const std::vector<double>& positions) {
  if (!spec.a_margin)
    fail(ErrorCode::InvalidArgument,
         "validate_layer_margin: spec has no margin a");
  if (positions.empty())
    fail(ErrorCode::InvalidArgument, "validate_layer_margin: no positions");
  const double a = *spec.a_margin;
  double pos_min = 1e300, pos_max = -1e300;
  for (double p : positions) {
    pos_min = std::min(pos_min, p);
    pos_max = std::max(pos_max, p);
  }

  ValidationReport report;
  report.title = "layer position margin";

  ValidationItem upper;
  upper.name = "below_half_with_margin";
  upper.lhs = pos_max;
  upper.rhs = 0.5 - a;
  upper.pass = pos_max < 0.5 - a;
  upper.note = "max position < 1/2 - a";
  report.items.push_back(upper);

  ValidationItem lower;
  lower.name = "positive_positions";
  lower.lhs = pos_min;
  lower.rhs = 0.0;
  lower.pass = pos_min > 0.0;
  lower.note = "min position > 0";
  report.items.push_back(lower);

  report.pass = upper.pass && lower.pass;
  return report;
}

// ---- config files ----

namespace {

std::vector<std::string> tokenize(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_number(const std::string& tok, int line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::ConfigError,
         "config line " + std::to_string(line) + ": bad number '" + tok + "'");
  }
  if (used != tok.size())
    fail(ErrorCode::ConfigError,
         "config line " + std::to_string(line) + ": bad number '" + tok + "'");
  return v;
}

}  // namespace

ProblemSpec parse_problem_config(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;

  std::optional<CoefficientField> field;
  std::optional<TimeTrace> u0, u1;
  std::optional<double> mu, theta, a, period;
  std::set<std::string> seen;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto tokens = tokenize(line);
    if (tokens.empty()) continue;
    if (tokens.size() < 3 || tokens[1] != "=")
      fail(ErrorCode::ConfigError, "config line " + std::to_string(lineno) +
                                       ": expected 'key = value'");
    const std::string& key = tokens[0];
    if (!seen.insert(key).second)
      fail(ErrorCode::ConfigError, "config line " + std::to_string(lineno) +
                                       ": duplicate key '" + key + "'");
    std::vector<std::string> value(tokens.begin() + 2, tokens.end());

    auto parse_trace = [&](const char* what) -> TimeTrace {
      if (value.size() == 1 && value[0] != "trig_t")
        return TimeTrace::trig(parse_number(value[0], lineno), 0.0, 0.0);
      if (value.size() == 4 && value[0] == "trig_t")
        return TimeTrace::trig(parse_number(value[1], lineno),
                               parse_number(value[2], lineno),
                               parse_number(value[3], lineno));
      fail(ErrorCode::ConfigError,
           "config line " + std::to_string(lineno) + ": " + what +
               " wants 'trig_t c0 c1 c2' or a constant");
    };

    if (key == "field") {
      if (value.size() == 1 && value[0] != "trig_t" && value[0] != "poly_x") {
        field = CoefficientField::temporal_trig(parse_number(value[0], lineno),
                                                0.0, 0.0);
      } else if (value[0] == "poly_x" && value.size() >= 2) {
        std::vector<double> coeffs;
        for (std::size_t i = 1; i < value.size(); ++i)
          coeffs.push_back(parse_number(value[i], lineno));
        field = CoefficientField::spatial_polynomial(std::move(coeffs));
      } else if (value[0] == "trig_t" && value.size() == 4) {
        field = CoefficientField::temporal_trig(
            parse_number(value[1], lineno), parse_number(value[2], lineno),
            parse_number(value[3], lineno));
      } else {
        fail(ErrorCode::ConfigError,
             "config line " + std::to_string(lineno) +
                 ": field wants 'poly_x c0 ...', 'trig_t c0 c1 c2' or a "
                 "constant");
      }
    } else if (key == "u0") {
      u0 = parse_trace("u0");
    } else if (key == "u1") {
      u1 = parse_trace("u1");
    } else if (key == "mu" || key == "theta" || key == "a" || key == "T") {
      if (value.size() != 1)
        fail(ErrorCode::ConfigError, "config line " + std::to_string(lineno) +
                                         ": " + key + " wants one number");
      const double v = parse_number(value[0], lineno);
      if (key == "mu")
        mu = v;
      else if (key == "theta")
        theta = v;
      else if (key == "a")
        a = v;
      else
        period = v;
    } else {
      fail(ErrorCode::ConfigError, "config line " + std::to_string(lineno) +
                                       ": unknown key '" + key + "'");
    }
  }

  if (!field) fail(ErrorCode::ConfigError, "config: missing key 'field'");
  if (!u0) fail(ErrorCode::ConfigError, "config: missing key 'u0'");
  if (!u1) fail(ErrorCode::ConfigError, "config: missing key 'u1'");
  if (!mu) fail(ErrorCode::ConfigError, "config: missing key 'mu'");
  if (!period) fail(ErrorCode::ConfigError, "config: missing key 'T'");
  if (!(*mu > 0)) fail(ErrorCode::ConfigError, "config: mu must be positive");
  if (!(*period > 0)) fail(ErrorCode::ConfigError, "config: T must be positive");
  if (theta && !(*theta > 0 && *theta < 1))
    fail(ErrorCode::ConfigError, "config: theta must lie in (0,1)");
  if (a && !(*a > 0 && *a < 0.5))
    fail(ErrorCode::ConfigError, "config: a must lie in (0,1/2)");

  ProblemSpec spec;
  spec.field = *field;
  spec.boundary.u0 = *u0;
  spec.boundary.u1 = *u1;
  spec.boundary.period = *period;
  spec.mu = *mu;
  spec.theta = theta.value_or(0.5);
  spec.a_margin = a;
  return spec;
}

ProblemSpec load_problem_config(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    fail(ErrorCode::IoError, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_config(buf.str());
}

std::string canonical_config_text(const ProblemSpec& spec) {
  std::string out;
  out += "field = " + spec.field.repr() + "\n";
  out += "u0 = " + spec.boundary.u0.repr() + "\n";
  out += "u1 = " + spec.boundary.u1.repr() + "\n";
  out += "mu = " + format_double(spec.mu) + "\n";
  out += "theta = " + format_double(spec.theta) + "\n";
  if (spec.a_margin) out += "a = " + format_double(*spec.a_margin) + "\n";
  out += "T = " + format_double(spec.boundary.period) + "\n";
  return out;
}

std::uint64_t spec_digest(const ProblemSpec& spec) {
  return fnv1a64(canonical_config_text(spec));
}

}  // namespace rda
