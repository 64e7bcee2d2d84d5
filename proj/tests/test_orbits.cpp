#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "oracles.hpp"
#include "rescal/errors.hpp"
#include "rescal/orbits.hpp"

using namespace rescal;

namespace {

const Mat2i kCat{2, 1, 1, 1};

OrbitCensus zero_census(int n_max) {
  OrbitCensus c;
  for (int n = 1; n <= n_max; ++n) {
    c.per_period.push_back({n, 0, 0});
    c.v_table.push_back({static_cast<double>(n), 0});
  }
  return c;
}

}  // namespace

TEST_CASE("fixed point counts match the brute-force lattice census") {
  long long expect[6] = {1, 5, 16, 45, 121, 320};
  for (int n = 1; n <= 6; ++n) {
    CHECK(fixed_point_count(kCat, n) == expect[n - 1]);
    CHECK(fixed_point_count(kCat, n) == oracles::fixed_points_bruteforce(kCat, n));
    // det = 1: |det(A^n - I)| = trace(A^n) - 2
    Mat2i an = mat_pow(kCat, n);
    CHECK(fixed_point_count(kCat, n) == an.a + an.d - 2);
  }
  // another unimodular hyperbolic matrix, including a negative-trace one
  Mat2i other{1, 1, 1, 2};
  Mat2i flipped{-2, -1, -1, -1};
  for (int n = 1; n <= 4; ++n) {
    CHECK(fixed_point_count(other, n) == oracles::fixed_points_bruteforce(other, n));
    CHECK(fixed_point_count(flipped, n) == oracles::fixed_points_bruteforce(flipped, n));
  }

  CHECK_THROWS_AS(fixed_point_count(Mat2i{1, 1, 0, 1}, 1), InvalidArgumentError);  // shear
  CHECK_THROWS_AS(fixed_point_count(Mat2i{2, 0, 0, 2}, 1), InvalidArgumentError);  // det 4
  CHECK_THROWS_AS(fixed_point_count(kCat, 0), InvalidArgumentError);
  CHECK_THROWS_AS(fixed_point_count(kCat, 45), RangeError);
  CHECK(fixed_point_count(kCat, 44) > 0);  // largest exact power still works
}

TEST_CASE("census: Moebius inversion and frozen v-table") {
  auto census = orbit_census(kCat, 14.0);
  REQUIRE(census.per_period.size() == 14);
  long long orbits[14] = {1, 2, 5, 10, 24, 50, 120, 270, 640, 1500, 3600, 8610, 20880, 50700};
  for (int i = 0; i < 14; ++i) {
    CHECK(census.per_period[i].n == i + 1);
    CHECK(census.per_period[i].least_period_orbits == orbits[i]);
  }

  // Sum over divisors d of n of d * orbits(d) recovers |Fix(A^n)|
  for (int n = 1; n <= 14; ++n) {
    long long sum = 0;
    for (const PeriodRow& row : census.per_period)
      if (row.n <= n && n % row.n == 0) sum += row.n * row.least_period_orbits;
    CHECK(sum == census.per_period[n - 1].fixed_points);
    CHECK(sum == fixed_point_count(kCat, n));
  }

  CHECK(census.v(1) == 1);
  CHECK(census.v(2) == 3);  // 1 + (5 - 1) / 2
  CHECK(census.v(3) == 8);  // 3 + (16 - 1) / 3
  CHECK(census.v(8) == 482);
  CHECK(census.v(14) == 86412);
  CHECK(census.v(0.5) == 0);
  CHECK(census.v(3.7) == 8);  // step function between integers

  long long prev = 0;
  for (const auto& [t, v] : census.v_table) {
    CHECK(v >= prev);
    prev = v;
  }

  CHECK_THROWS_AS(orbit_census(kCat, 0.5), InvalidArgumentError);
  CHECK_THROWS_AS(orbit_census(kCat, 64.0), RangeError);
  CHECK_THROWS_AS(orbit_census(Mat2i{1, 1, 0, 1}, 8.0), InvalidArgumentError);
}

TEST_CASE("census: v_band counts any period inside the window") {
  auto census = orbit_census(kCat, 14.0);
  // the fixed point has period 2 as well, so it joins the two 2-orbits
  CHECK(census.v_band(2.0, 0.25) == 3);
  // at integer t with a narrow band only exact multiples land inside:
  // v_band(t, 1/8) = sum over divisors n | t of orbits(n)
  long long divisor_sums[8] = {1, 3, 6, 13, 25, 58, 121, 283};
  for (int t = 1; t <= 8; ++t) CHECK(census.v_band(t, 0.125) == divisor_sums[t - 1]);
  CHECK(census.v_band(8.0, 0.25) == 283);
  CHECK(census.v_band(2.5, 0.2) == 0);   // no multiple of anything in [2.3, 2.7]
  CHECK(census.v_band(2.5, 0.5) == 8);   // [2, 3] catches periods 2 and 3 and the fixed point
  CHECK_THROWS_AS(census.v_band(2.0, -0.1), InvalidArgumentError);
}

TEST_CASE("census: v(t) is dominated by stacked band counts") {
  auto census = orbit_census(kCat, 14.0);
  for (double alpha : {0.5, 1.0})
    for (double t : {4.0, 8.0, 14.0}) {
      long long stacked = 0;
      for (int n = 1; n <= static_cast<int>(t / alpha + 1e-9); ++n)
        stacked += census.v_band(n * alpha, 0.5 * alpha);
      CHECK(census.v(t) <= stacked);
    }
}

TEST_CASE("growth rate: flats, exact exponentials, the cat census, error paths") {
  OrbitCensus flat = zero_census(10);
  for (auto& [t, v] : flat.v_table) v = 1;
  CHECK(std::abs(growth_rate(flat)) <= 1e-9);

  OrbitCensus doubling = zero_census(10);
  for (auto& [t, v] : doubling.v_table) v = 1LL << static_cast<int>(t);
  CHECK(growth_rate(doubling) == doctest::Approx(std::log(2.0)).epsilon(1e-9));

  // the log t regressor absorbs the ~1/t orbit density; a plain 2-parameter
  // fit of this table reads ~0.86 and would miss the eigenvalue by 10%
  double log_lambda = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  auto census = orbit_census(kCat, 14.0);
  double growth = growth_rate(census);
  CHECK(growth == doctest::Approx(0.9572).epsilon(1e-3));
  CHECK(std::abs(growth - log_lambda) <= 0.05 * log_lambda);

  CHECK(growth_rate(zero_census(9)) == 0.0);  // no orbits: no growth to measure
  CHECK_THROWS_AS(growth_rate(orbit_census(kCat, 6.0)), InsufficientDataError);
  CHECK_THROWS_AS(growth_rate(OrbitCensus{}), InsufficientDataError);
}

TEST_CASE("growth bound: cat suspension passes the rate and every band cell") {
  Flow cat = Flow::cat_map_suspension();
  auto census = orbit_census(kCat, 14.0);
  EntropyEstimate e_star;
  e_star.extrapolated = 0.96;
  auto report = check_growth_bound(cat, census, e_star, 0.15);

  CHECK(report.growth == doctest::Approx(0.9572).epsilon(1e-3));
  CHECK(report.rate_ok);
  CHECK(report.verdict);
  REQUIRE(report.cells.size() == 24);  // alphas {0.25, 0.5, 1} x t = 1..8

  long expect_alpha1[8] = {78, 212, 474, 576, 576, 576, 576, 576};
  double prev_t = 0.0;
  long prev_sep = 0;
  for (const GrowthBandCell& cell : report.cells) {
    CHECK(cell.ok);
    CHECK(cell.v_band <= cell.separating);
    CHECK(cell.v_band == census.v_band(cell.t, 0.5 * cell.alpha));
    if (cell.alpha == 0.25) CHECK(cell.separating == 1728);  // grid pitch >> alpha
    if (cell.alpha == 1.0) CHECK(cell.separating == expect_alpha1[static_cast<int>(cell.t) - 1]);
    // packings only grow with the horizon
    if (cell.t > prev_t) CHECK(cell.separating >= prev_sep);
    prev_t = cell.t;
    prev_sep = cell.separating;
    if (cell.t == 8.0) prev_t = 0.0, prev_sep = 0;  // next alpha block restarts
  }
}

TEST_CASE("growth bound: no-orbit flow is trivially inside tolerance") {
  Flow irr = Flow::linear_torus(1.0, 0.5 * (1.0 + std::sqrt(5.0)));
  EntropyEstimate flat;
  flat.extrapolated = 0.0;
  auto report = check_growth_bound(irr, zero_census(8), flat, 0.05, {0.5}, 4, 8);
  CHECK(report.growth == 0.0);
  CHECK(report.rate_ok);
  CHECK(report.verdict);
  for (const GrowthBandCell& cell : report.cells) CHECK(cell.v_band == 0);

  // singular flows are out: M_delta = M fails and the chain does not apply
  CHECK_THROWS_AS(check_growth_bound(Flow::torus_item4(), zero_census(8), flat, 0.1),
                  InvalidArgumentError);
  CHECK_THROWS_AS(check_growth_bound(irr, zero_census(8), flat, 0.1, {}, 8),
                  InvalidArgumentError);
  CHECK_THROWS_AS(check_growth_bound(irr, zero_census(8), flat, 0.1, {-0.5}, 8),
                  InvalidArgumentError);
}
