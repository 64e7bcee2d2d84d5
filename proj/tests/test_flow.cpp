#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "rescal/flow.hpp"
#include "rescal/geometry.hpp"
#include "rescal/rng.hpp"

using namespace rescal;

TEST_CASE("item4 profile: pinned pieces, zeros, sign pattern, C1 smoothness") {
  Flow f = Flow::torus_item4();
  CHECK(f.rho(-2.0) == 1.0);
  CHECK(f.rho(-1.0) == 1.0);
  CHECK(f.rho(1.0) == 1.0);
  CHECK(f.rho(1.5) == 1.0);
  CHECK(f.rho(0.0) == 0.0);
  CHECK(f.rho(0.125) == -0.125);
  CHECK(f.rho(-0.125) == 0.125);
  CHECK(f.rho(2.0 / 3.0) == 0.0);
  CHECK(f.rho(0.6) == doctest::Approx(0.6 - 2.0 / 3.0));
  CHECK(f.rho(0.7) == doctest::Approx(0.7 - 2.0 / 3.0));
  CHECK(f.rho_prime(0.0) == -1.0);
  CHECK(f.rho_prime(2.0 / 3.0) == 1.0);
  CHECK(f.rho_prime(-1.5) == 0.0);

  // sign pattern: positive left of 0, negative on (0, 2/3), positive beyond
  for (int i = 1; i < 4000; ++i) {
    double x = -2.0 + 4.0 * i / 4000.0;
    double r = f.rho(x);
    if (std::abs(x) < 1e-12 || std::abs(x - 2.0 / 3.0) < 1e-12) continue;
    if (x < 0.0) CHECK(r > 0.0);
    else if (x < 2.0 / 3.0) CHECK(r < 0.0);
    else CHECK(r > 0.0);
    CHECK(std::abs(r) <= 1.0);
  }

  // analytic derivative against central differences
  const double h = 1e-5;
  for (int i = 0; i < 2000; ++i) {
    double x = -2.0 + 4.0 * (i + 0.37) / 2000.0;
    double fd = (f.rho(x + h) - f.rho(x - h)) / (2.0 * h);
    CHECK(f.rho_prime(x) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
  }
}

TEST_CASE("eno profile: zeros exactly at {-1, b, a, 1}, slopes, decay constants") {
  Flow f = Flow::sphere_eno();
  Flow f0 = Flow::sphere_eno_unperturbed();
  CHECK(f.rho(-1.0) == 0.0);
  CHECK(f.rho(1.0) == 0.0);
  CHECK(f.rho(-0.7) == 0.0);
  CHECK(f.rho(-0.3) == 0.0);
  CHECK(f.rho_prime(-0.3) == 0.5);
  CHECK(f.rho_prime(-0.7) == -0.5);

  for (int i = 1; i < 4000; ++i) {
    double z = -1.0 + 2.0 * i / 4000.0;
    double r = f.rho(z);
    if (std::abs(z + 0.7) < 1e-12 || std::abs(z + 0.3) < 1e-12) continue;
    if (std::abs(z) <= 0.999) {  // rho0 underflows to an exact 0 at the poles
      if (z < -0.7) CHECK(r > 0.0);
      else if (z < -0.3) CHECK(r < 0.0);
      else CHECK(r > 0.0);
    }
    // never overshoots the unperturbed profile by more than the window allows,
    // and coincides with it exactly outside [b-3w, a+3w]
    CHECK(r <= f0.rho(z) + 0.1);
    if (z < -0.85 || z > -0.15) CHECK(r == f0.rho(z));
  }

  const double h = 1e-5;
  for (int i = 0; i < 2000; ++i) {
    double z = -1.0 + 2.0 * (i + 0.41) / 2000.0;
    double fd = (f.rho(z + h) - f.rho(z - h)) / (2.0 * h);
    CHECK(f.rho_prime(z) == doctest::Approx(fd).epsilon(1e-4).scale(1.0));
  }

  CHECK(f.eno_gamma() == doctest::Approx(0.455));
  CHECK(f.eno_delta() == doctest::Approx(0.25));
  CHECK(f.eno_kappa() == doctest::Approx(0.025 * std::sqrt(1.0 - 0.0625)));
}

TEST_CASE("field evaluation pinned values") {
  Flow item4 = Flow::torus_item4();
  auto [v1, s1] = item4.evaluate_field(make_point(item4.chart(), {-2.0, 1.3, 0}));
  CHECK(s1 == 1.0);
  CHECK(v1[0] == 1.0);
  CHECK(v1[1] == 0.0);
  auto [v0, s0] = item4.evaluate_field(make_point(item4.chart(), {0.0, 2.2, 0}));
  CHECK(s0 == 0.0);
  CHECK(v0[0] == 0.0);

  Flow eno0 = Flow::sphere_eno_unperturbed();
  CHECK(eno0.evaluate_field(make_point(eno0.chart(), {0, 0, 1})).second == 0.0);
  CHECK(eno0.evaluate_field(make_point(eno0.chart(), {0, 0, -1})).second == 0.0);

  Flow cat = Flow::cat_map_suspension();
  auto [vc, sc] = cat.evaluate_field(make_point(cat.chart(), {0.3, 0.8, 0.5}));
  CHECK(sc == 1.0);
  CHECK(vc[2] == 1.0);

  // eno speed has the closed form |rho(z)| sqrt(1 - z^2) on the sphere
  Flow eno = Flow::sphere_eno();
  Rng rng(17);
  for (int i = 0; i < 2000; ++i) {
    Vec3 p = random_chart_point(eno.chart(), rng);
    double want = std::abs(eno.rho(p[2])) * std::sqrt(std::max(0.0, 1.0 - p[2] * p[2]));
    CHECK(eno.speed_at(p) == doctest::Approx(want).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("integrate: closed forms") {
  // constant translation
  Flow ct = Flow::constant_torus(1.0, 0.0);
  Trajectory t1 = ct.integrate(make_point(ct.chart(), {0, 0, 0}), 1.0);
  CHECK(chart_distance(ct.chart(), t1.points.back(), Vec3{1.0, 0.0, 0.0}) < 1e-12);
  CHECK(t1.size() == 1001);
  CHECK(t1.times.back() == doctest::Approx(1.0));

  // x' = -x inside the linear region
  Flow item4 = Flow::torus_item4();
  Trajectory t2 = item4.integrate(make_point(item4.chart(), {-0.25, 0.5, 0}), 1.0);
  CHECK(t2.points.back()[0] == doctest::Approx(-0.25 * std::exp(-1.0)).epsilon(1e-10));
  CHECK(t2.points.back()[1] == 0.5);  // vertical coordinate untouched, exactly

  // suspension: time 1 applies the gluing matrix
  Flow cat = Flow::cat_map_suspension();
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    double u = rng.next_double(), v = rng.next_double();
    Trajectory t3 = cat.integrate(make_point(cat.chart(), {u, v, 0}), 1.0);
    Vec3 want = reduce(cat.chart(), {2 * u + v, u + v, 0.0});
    CHECK(chart_distance(cat.chart(), t3.points.back(), want) < 1e-9);
  }
}

TEST_CASE("eno trajectory from the K parallel: exact decay sandwich") {
  Flow eno = Flow::sphere_eno();
  double z0 = -eno.eno_delta();  // -0.25 = a + w
  Vec3 p0{std::sqrt(1.0 - z0 * z0), 0.0, z0};
  double gamma = eno.eno_gamma();          // 0.455 = sa (1 - a^2)
  double gmax = 0.5 * (1.0 - z0 * z0);     // fastest instantaneous rate on the window
  double kappa = eno.eno_kappa();
  Trajectory tr = eno.integrate(make_point(eno.chart(), p0), 22.0, 1e-3);
  CHECK(tr.speeds.front() == doctest::Approx(kappa).epsilon(1e-12));
  for (std::size_t i = 0; i < tr.size(); i += 10) {
    double t = tr.times[i];
    CHECK(tr.speeds[i] <= 1.05 * kappa * std::exp(-gamma * t));
    CHECK(tr.speeds[i] >= 0.97 * kappa * std::exp(-gmax * t));
    CHECK(tr.points[i][2] >= -0.3 - 1e-9);  // never leaves the linear window
    CHECK(tr.points[i][2] <= -0.25 + 1e-9);
    CHECK(std::abs(tr.points[i][1]) < 1e-12);  // meridian plane is invariant
  }
}

TEST_CASE("semigroup property at 4th order on a step-halving ladder") {
  struct Case {
    Flow flow;
    Vec3 base;
    double s, t;
  };
  // bases sit inside the nonlinear profile windows (blend zones on the torus,
  // the bump body on the sphere); on the constant-speed plateaus the one-step
  // map is exact and the deviation would be pure rounding noise
  std::vector<Case> cases = {
      {Flow::torus_item4(), {-0.9, 0.3, 0}, 0.337, 0.411},
      {Flow::torus_item4(), {-0.7, 2.1, 0}, 0.739, 0.597},
      {Flow::sphere_eno(), {1.0, 0.0, 0.0}, 0.713, 0.291},
      {Flow::sphere_eno(), {0.6, std::sqrt(1.0 - 0.36 - 0.16), 0.4}, 0.413, 0.559},
  };

  std::vector<double> hs = {0.04, 0.02, 0.01, 0.005};
  std::vector<double> devs;
  for (double h : hs) {
    double worst = 0.0;
    for (const auto& c : cases) {
      auto p = make_point(c.flow.chart(), c.base);
      Trajectory whole = c.flow.integrate(p, c.s + c.t, h);
      Trajectory first = c.flow.integrate(p, c.t, h);
      Trajectory second = c.flow.integrate(first.point(first.size() - 1), c.s, h);
      double d = chart_distance(c.flow.chart(), whole.points.back(), second.points.back());
      worst = std::max(worst, d);
    }
    devs.push_back(worst);
  }
  CHECK(devs[0] < 1e-4);
  // least-squares slope of log dev against log h
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < hs.size(); ++i) {
    double x = std::log(hs[i]), y = std::log(devs[i]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double n = static_cast<double>(hs.size());
  double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= 3.5);
}

TEST_CASE("cone bound: log speed ratio within [-Ls, Ls] on all builtins") {
  for (const Flow& f : Flow::builtins()) {
    FlowSummary sum = f.summary(f.chart().kind == ManifoldKind::MappingTorus ? 12 : 48);
    double L = sum.lipschitz * 1.05 + 1e-9;
    Rng rng(23);
    int violations = 0, used = 0;
    for (int i = 0; i < 1000; ++i) {
      Vec3 x = random_chart_point(f.chart(), rng);
      if (f.speed_at(x) < 1e-8) continue;
      ++used;
      Trajectory tr = f.integrate({f.chart(), x}, 3.0, 2e-3);
      double s0 = tr.speeds.front();
      for (std::size_t k = 0; k < tr.size(); k += 5) {
        double ratio = tr.speeds[k] / s0;
        if (ratio < std::exp(-L * tr.times[k]) || ratio > std::exp(L * tr.times[k])) ++violations;
      }
    }
    INFO(f.name());
    CHECK(used > 900);
    CHECK(violations == 0);
  }
}

TEST_CASE("flow summary: pinned values and cascade monotonicity") {
  Flow ct = Flow::constant_torus(1.0, 0.0);
  FlowSummary s1 = ct.summary(16);
  CHECK(s1.sup_speed == 1.0);
  CHECK(s1.inf_speed == 1.0);
  CHECK(s1.lipschitz == 0.0);
  CHECK(s1.singular_set == "empty (nonsingular)");

  Flow item4 = Flow::torus_item4();
  FlowSummary s2 = item4.summary(32);
  CHECK(s2.inf_speed == 0.0);  // singular circles
  CHECK(s2.sup_speed == 1.0);
  CHECK(s2.lipschitz >= 1.0);  // |rho'(0)| = 1

  Flow cat = Flow::cat_map_suspension();
  FlowSummary s3 = cat.summary(8);
  CHECK(s3.sup_speed == 1.0);
  CHECK(s3.inf_speed == 1.0);
  CHECK(s3.lipschitz == doctest::Approx(std::log((3.0 + std::sqrt(5.0)) / 2.0)));

  Flow eno = Flow::sphere_eno();
  FlowSummary s4 = eno.summary(32);
  CHECK(s4.inf_speed == 0.0);
  CHECK(s4.sup_speed > 0.2);  // rho0 peak ~ e^{-1} * ... at the equator
  CHECK(s4.sup_speed < 0.5);

  for (const Flow& f : Flow::builtins()) {
    double prev_sup = -1.0, prev_lip = -1.0, prev_inf = 1e300;
    for (int res : {4, 8, 16, 32}) {
      FlowSummary s = f.summary(res);
      CHECK(s.sup_speed >= prev_sup);
      CHECK(s.lipschitz >= prev_lip);
      CHECK(s.inf_speed <= prev_inf);
      CHECK(s.inf_speed <= s.sup_speed);
      prev_sup = s.sup_speed;
      prev_lip = s.lipschitz;
      prev_inf = s.inf_speed;
    }
    CHECK((f.nonsingular() == (f.summary(8).inf_speed > 0.0)));
  }
}

TEST_CASE("freezing at numerical equilibria") {
  Flow item4 = Flow::torus_item4();
  Trajectory tr = item4.integrate(make_point(item4.chart(), {1e-16, 0.7, 0}), 1.0, 1e-2);
  for (std::size_t i = 0; i < tr.size(); ++i) {
    CHECK(tr.points[i][0] == tr.points[0][0]);
    CHECK(tr.points[i][1] == tr.points[0][1]);
  }
}

TEST_CASE("flow errors and registry") {
  Flow item4 = Flow::torus_item4();
  auto sphere_pt = make_point(ChartSpec::sphere(), {0, 0, 1});
  CHECK_THROWS_AS(item4.evaluate_field(sphere_pt), ChartMismatchError);
  CHECK_THROWS_AS(item4.integrate(sphere_pt, 1.0), ChartMismatchError);
  auto ok_pt = make_point(item4.chart(), {-2, 0, 0});
  CHECK_THROWS_AS(item4.integrate(ok_pt, 1.0, 0.0), InvalidArgumentError);
  CHECK_THROWS_AS(item4.integrate(ok_pt, -1.0), InvalidArgumentError);
  CHECK_THROWS_AS(Flow::constant_torus(0, 0), ConstructorInvariantError);
  CHECK_THROWS_AS(Flow::sphere_eno(-0.3, -0.35, 0.05, 0.5, -0.5), ConstructorInvariantError);
  CHECK_THROWS_AS(Flow::sphere_eno(-0.3, -0.7, 0.05, -0.5, -0.5), ConstructorInvariantError);
  CHECK_THROWS_AS(Flow::cat_map_suspension(Mat2i{2, 0, 0, 2}), ConstructorInvariantError);
  CHECK_THROWS_AS(Flow::cat_map_suspension().rho(0.5), UnsupportedError);
  CHECK_THROWS_AS(Flow::torus_item4().eno_gamma(), UnsupportedError);
  CHECK_THROWS_AS(Flow::by_name("no-such-flow"), InvalidArgumentError);
  CHECK(Flow::by_name("cat-map-suspension").id() == FlowId::CatMapSuspension);
  CHECK(Flow::builtins().size() == 6);

  Trajectory tr = item4.integrate(ok_pt, 2.0, 1e-2);
  CHECK(tr.samples_through(1.0) == 101);
  CHECK(tr.samples_through(0.0) == 1);
  CHECK_THROWS_AS(tr.samples_through(3.0), RangeError);
}
