#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "rda/asymptotics.hpp"
#include "rda/errors.hpp"
#include "rda/forward.hpp"
#include "rda/inverse.hpp"

using namespace rda;

namespace {

ProblemSpec quadratic_benchmark() {
  ProblemSpec spec;
  spec.field = CoefficientField::spatial_polynomial({1.5, 0.0, 1.0});
  spec.boundary.u0 = TimeTrace::trig(-4.0, 0.0, 0.0);
  spec.boundary.u1 = TimeTrace::trig(4.3, 0.0, 0.0);
  spec.boundary.period = 2.0;
  spec.mu = 0.02;
  return spec;
}

ProblemSpec temporal_benchmark() {
  ProblemSpec spec;
  spec.field = CoefficientField::temporal_trig(2.0, 1.0, 0.0);
  spec.boundary.u0 = TimeTrace::trig(-4.0, 0.0, -0.5);
  spec.boundary.u1 = TimeTrace::trig(5.0, 0.7, 0.0);
  spec.boundary.period = 2.0 * M_PI;
  spec.mu = 0.02;
  spec.a_margin = 0.05;
  return spec;
}

struct Fixture {
  ProblemSpec spec;
  AsymptoticSolution asym;
  GridSolution sol;
  explicit Fixture(const ProblemSpec& s) : spec(s), asym(s) {
    ForwardOptions opts;
    opts.nx = 401;
    opts.nt = 201;
    sol = solve_forward(spec, asym, opts);
  }
};

const Fixture& spatial_fixture() {
  static const Fixture fx(quadratic_benchmark());
  return fx;
}

const Fixture& temporal_fixture() {
  static const Fixture fx(temporal_benchmark());
  return fx;
}

double max_rel_gap(const SmoothedFunction& fit,
                   const std::function<double(double)>& truth, double lo,
                   double hi) {
  double worst = 0.0;
  for (int i = 0; i <= 200; ++i) {
    const double x = lo + (hi - lo) * i / 200.0;
    worst = std::max(worst, std::abs(fit(x) - truth(x)) /
                                std::max(1.0, std::abs(truth(x))));
  }
  return worst;
}

std::string temp_path(const char* name) {
  return std::string("/tmp/rda_test_") + name;
}

}  // namespace

TEST_SUITE("inverse") {

TEST_CASE("multiplicative noise is bounded, centered and reproducible") {
  const std::vector<double> clean = {1.0, -2.0, 0.5, 3.0, -0.25};
  const std::vector<double> a = synthesize_noise(clean, 0.1, 99);
  const std::vector<double> b = synthesize_noise(clean, 0.1, 99);
  const std::vector<double> c = synthesize_noise(clean, 0.1, 100);
  CHECK(a == b);       // same seed, identical draw
  CHECK(a != c);       // different seed, different draw
  for (std::size_t i = 0; i < clean.size(); ++i)
    CHECK(std::abs(a[i] / clean[i] - 1.0) <= 0.1);
  CHECK(synthesize_noise(clean, 0.0, 1) == clean);
  CHECK_THROWS_AS(synthesize_noise(clean, -0.1, 1), Error);
}

TEST_CASE("pointwise temporal estimates and the division guard") {
  MeasurementSet meas;
  meas.kind = MeasurementKind::TemporalTriples;
  meas.nodes = {0.0, 1.0, 2.0};
  meas.u0 = {1.0, 1.0, 1.0};
  meas.u1 = {2.0, 2.0, 2.0};
  meas.layer_x = {0.1, 0.46875, 0.3};
  const auto samples = ip2_pointwise(meas, 0.0625);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].value == doctest::Approx(3.0 / 0.8).epsilon(1e-15));
  // |1 - 2*(15/32)| = 1/16 = a trips the guard (boundary included); the
  // values are exact dyadics so the comparison is exact too
  CHECK(samples[1].rejected);
  CHECK(samples[1].value == 0.0);
  CHECK_FALSE(samples[2].rejected);
  CHECK(samples[2].value == doctest::Approx(3.0 / 0.4).epsilon(1e-15));
}

TEST_CASE("noiseless temporal recovery tracks the true coefficient") {
  const Fixture& fx = temporal_fixture();
  const MeasurementSet meas =
      synthesize_temporal(fx.spec, fx.sol, fx.asym, 40, 0.0, 1);
  const RecoveredCoefficient rec = ip2_recover(fx.spec, meas);
  CHECK(rec.used + rec.rejected == 41);
  CHECK(rec.used >= 30);
  const auto truth = [&](double t) {
    return fx.spec.field.temporal_value(t);
  };
  CHECK(max_rel_gap(rec.fit, truth, 0.0, fx.spec.boundary.period) < 0.05);
}

TEST_CASE("temporal recovery needs the problem to carry the guard margin") {
  const Fixture& fx = temporal_fixture();
  const MeasurementSet meas =
      synthesize_temporal(fx.spec, fx.sol, fx.asym, 20, 0.0, 1);
  ProblemSpec no_margin = fx.spec;
  no_margin.a_margin.reset();
  CHECK_THROWS_AS(ip2_recover(no_margin, meas), Error);
}

TEST_CASE("temporal recovery rejects a data set the guard empties") {
  ProblemSpec spec = temporal_benchmark();
  MeasurementSet meas;
  meas.kind = MeasurementKind::TemporalTriples;
  for (int i = 0; i < 8; ++i) {
    meas.nodes.push_back(i);
    meas.u0.push_back(-4.0);
    meas.u1.push_back(5.0);
    meas.layer_x.push_back(0.5);  // dead on the singular point
  }
  CHECK_THROWS_AS(ip2_recover(spec, meas), Error);
  try {
    ip2_recover(spec, meas);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LayerCoversDomain);
  }
}

TEST_CASE("noiseless spatial recovery from gradient data") {
  const Fixture& fx = spatial_fixture();
  const MeasurementSet meas = synthesize_spatial(
      fx.sol, MeasurementKind::SpatialGradient, 200, 1.0, 0.0, 1);
  const RecoveredCoefficient rec = ip1_recover(fx.asym, meas);
  const auto truth = [](double x) { return x * x + 1.5; };
  CHECK(max_rel_gap(rec.fit, truth, 0.0, 1.0) < 0.05);
  // the excluded band must cover the front and stay inside the domain
  const double x0 = fx.asym.transition_center(1.0);
  CHECK(rec.excluded.lo < x0);
  CHECK(rec.excluded.hi > x0);
  CHECK(rec.excluded.lo > 0.0);
  CHECK(rec.excluded.hi < 1.0);
  CHECK(rec.used + rec.rejected == 201);
}

TEST_CASE("noiseless spatial recovery from value data") {
  const Fixture& fx = spatial_fixture();
  const MeasurementSet meas = synthesize_spatial(
      fx.sol, MeasurementKind::SpatialValue, 200, 1.0, 0.0, 1);
  const RecoveredCoefficient rec = ip1_recover(fx.asym, meas);
  const auto truth = [](double x) { return x * x + 1.5; };
  // differentiating smoothed values is harsher than direct gradient data
  CHECK(max_rel_gap(rec.fit, truth, 0.05, 0.95) < 0.1);
}

TEST_CASE("spatial recovery fails when data only covers the layer") {
  const Fixture& fx = spatial_fixture();
  const double x0 = fx.asym.transition_center(1.0);
  MeasurementSet meas;
  meas.kind = MeasurementKind::SpatialGradient;
  meas.t0 = 1.0;
  meas.delta = 0.0;
  for (int i = 0; i < 9; ++i) {
    meas.nodes.push_back(x0 - 0.008 + 0.002 * i);
    meas.values.push_back(1.0);
  }
  CHECK_THROWS_AS(ip1_recover(fx.asym, meas), Error);
}

TEST_CASE("one-sided gradient data still yields a fit") {
  const Fixture& fx = spatial_fixture();
  MeasurementSet meas;
  meas.kind = MeasurementKind::SpatialGradient;
  meas.t0 = 1.0;
  meas.delta = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double x = 0.3 * i / 20.0;  // well left of the front
    meas.nodes.push_back(x);
    meas.values.push_back(fx.sol.value(x, 1.0));
  }
  // replace samples by true gradients of the left outer branch: F(x)
  for (int i = 0; i <= 20; ++i)
    meas.values[i] = fx.spec.field(meas.nodes[i], 1.0);
  const RecoveredCoefficient rec = ip1_recover(fx.asym, meas);
  CHECK(rec.used == 21);
  const auto truth = [](double x) { return x * x + 1.5; };
  CHECK(max_rel_gap(rec.fit, truth, 0.0, 0.3) < 0.02);
}

TEST_CASE("noisy recoveries stay close at one percent noise") {
  const Fixture& fs = spatial_fixture();
  const MeasurementSet m1 = synthesize_spatial(
      fs.sol, MeasurementKind::SpatialGradient, 200, 1.0, 0.01, 42);
  const RecoveredCoefficient r1 = ip1_recover(fs.asym, m1);
  const auto truth1 = [](double x) { return x * x + 1.5; };
  CHECK(max_rel_gap(r1.fit, truth1, 0.0, 1.0) < 0.15);
  CHECK(r1.epsilon > 0.0);

  const Fixture& ft = temporal_fixture();
  const MeasurementSet m2 =
      synthesize_temporal(ft.spec, ft.sol, ft.asym, 40, 0.01, 42,
                          2.0 * ft.spec.boundary.period);
  const RecoveredCoefficient r2 = ip2_recover(ft.spec, m2);
  const auto truth2 = [&](double t) {
    return ft.spec.field.temporal_value(t);
  };
  CHECK(max_rel_gap(r2.fit, truth2, 0.0, ft.spec.boundary.period) < 0.25);
}

TEST_CASE("synthetic measurements are reproducible per seed and channel") {
  const Fixture& fx = spatial_fixture();
  const MeasurementSet a = synthesize_spatial(
      fx.sol, MeasurementKind::SpatialGradient, 50, 1.0, 0.01, 5);
  const MeasurementSet b = synthesize_spatial(
      fx.sol, MeasurementKind::SpatialGradient, 50, 1.0, 0.01, 5);
  CHECK(a.values == b.values);
  const MeasurementSet c = synthesize_spatial(
      fx.sol, MeasurementKind::SpatialGradient, 50, 1.0, 0.01, 6);
  CHECK(a.values != c.values);

  const Fixture& ft = temporal_fixture();
  const MeasurementSet t1 =
      synthesize_temporal(ft.spec, ft.sol, ft.asym, 30, 0.01, 5);
  const MeasurementSet t2 =
      synthesize_temporal(ft.spec, ft.sol, ft.asym, 30, 0.01, 5);
  CHECK(t1.u0 == t2.u0);
  CHECK(t1.u1 == t2.u1);
  CHECK(t1.layer_x == t2.layer_x);
  // channels use independent substreams: the same node index differs
  CHECK(t1.u0 != t1.u1);
}

TEST_CASE("temporal sampling covers the requested horizon") {
  const Fixture& ft = temporal_fixture();
  const double T = ft.spec.boundary.period;
  const MeasurementSet one =
      synthesize_temporal(ft.spec, ft.sol, ft.asym, 20, 0.0, 1);
  CHECK(one.nodes.front() == 0.0);
  CHECK(one.nodes.back() == doctest::Approx(T).epsilon(1e-12));
  const MeasurementSet two =
      synthesize_temporal(ft.spec, ft.sol, ft.asym, 20, 0.0, 1, 2.0 * T);
  CHECK(two.nodes.back() == doctest::Approx(2.0 * T).epsilon(1e-12));
  // detected layer positions sit near the zero-order center
  for (std::size_t i = 0; i < two.nodes.size(); ++i)
    CHECK(std::abs(two.layer_x[i] -
                   ft.asym.transition_center(two.nodes[i])) <
          4.0 * ft.spec.mu);
}

TEST_CASE("measurement csv round-trips every kind exactly") {
  const Fixture& fx = spatial_fixture();
  for (MeasurementKind kind :
       {MeasurementKind::SpatialGradient, MeasurementKind::SpatialValue}) {
    const MeasurementSet out =
        synthesize_spatial(fx.sol, kind, 25, 1.0, 0.01, 3);
    const std::string path = temp_path("spatial.csv");
    write_measurement_csv(path, out);
    const MeasurementSet in = read_measurement_csv(path);
    CHECK(in.kind == kind);
    CHECK(in.nodes == out.nodes);
    CHECK(in.values == out.values);
    std::remove(path.c_str());
  }

  const Fixture& ft = temporal_fixture();
  const MeasurementSet out =
      synthesize_temporal(ft.spec, ft.sol, ft.asym, 15, 0.01, 3);
  const std::string path = temp_path("temporal.csv");
  write_measurement_csv(path, out);
  const MeasurementSet in = read_measurement_csv(path);
  CHECK(in.kind == MeasurementKind::TemporalTriples);
  CHECK(in.nodes == out.nodes);
  CHECK(in.u0 == out.u0);
  CHECK(in.u1 == out.u1);
  CHECK(in.layer_x == out.layer_x);
  std::remove(path.c_str());
}

TEST_CASE("csv reader reports malformed input with line numbers") {
  const std::string path = temp_path("bad.csv");

  {
    FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("x,bogus\n0.1,2\n", f);
    std::fclose(f);
  }
  try {
    read_measurement_csv(path);
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
  }

  {
    FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("t,u0,u1,xtp\n0,1,2,0.3\n1,2\n", f);
    std::fclose(f);
  }
  try {
    read_measurement_csv(path);
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoError);
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  std::remove(path.c_str());

  CHECK_THROWS_AS(read_measurement_csv("/nonexistent/rda.csv"), Error);
}

}  // TEST_SUITE
