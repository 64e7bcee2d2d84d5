#pragma once

#include <utility>
#include <vector>

#include "rescal/estimators.hpp"
#include "rescal/flow.hpp"
#include "rescal/geometry.hpp"

namespace rescal {

/**
 * Exact periodic-orbit census for the roof-1 suspension of a hyperbolic toral
 * automorphism A.  Closed orbits of the suspension correspond to periodic
 * orbits of A, and the flow period equals the (integer) map period, so the
 * census is pure integer arithmetic: fixed points of A^n counted by
 * |det(A^n - I)|, least-period orbit counts by Moebius inversion over
 * divisors.  This is deliberately analytic - numerical closed-orbit detection
 * on a hyperbolic flow is noise-bound, while the counting statements we test
 * are about cardinalities, not locations.
 */
struct PeriodRow {
  int n = 0;                         // (least) period
  long long fixed_points = 0;        // |Fix(A^n)|
  long long least_period_orbits = 0; // orbits whose least period is exactly n
};

struct OrbitCensus {
  Mat2i glue;
  std::vector<PeriodRow> per_period;                  // n = 1 .. floor(t_max)
  std::vector<std::pair<double, long long>> v_table;  // (t, v(t)) at integer t

  /** Number of distinct closed orbits with (least) period <= t. */
  long long v(double t) const;

  /** Number of distinct closed orbits having SOME period in [t - beta, t + beta]
   *  (periods of an orbit are the multiples of its least period). */
  long long v_band(double t, double beta) const;
};

/** |Fix(A^n)| = |det(A^n - I)|.  Requires |trace A| > 2 and |det A| = 1;
 *  n is capped where the integer matrix powers stay exact. */
long long fixed_point_count(const Mat2i& A, int n);

OrbitCensus orbit_census(const Mat2i& A, double t_max);

/**
 * Exponential growth rate of v(t) from the top half of the table: least
 * squares of log v(t) against (1, t, log t), returning the coefficient of t.
 * The log t regressor absorbs the 1/t orbit-density factor (v(t) ~ e^{ht}/ht),
 * which a plain two-parameter fit misreads by ~10% at these horizons; for
 * tables that are already exactly exponential or constant it fits zero to it.
 */
double growth_rate(const OrbitCensus& census);

struct GrowthBandCell {
  double alpha = 0.0;
  double t = 0.0;
  long long v_band = 0;   // orbits with a period within alpha/2 of t
  long separating = 0;    // S*(t, alpha, K)
  bool ok = false;        // v_band <= separating
};

struct GrowthBoundReport {
  double growth = 0.0;
  double e_star = 0.0;
  double tolerance = 0.0;
  bool rate_ok = false;               // growth <= e_star + tolerance
  std::vector<GrowthBandCell> cells;  // the band inequality per (alpha, t)
  bool verdict = false;               // rate_ok and every cell ok
};

/**
 * Checks the growth bound chain on a nonsingular flow: the census growth rate
 * against the entropy estimate, and the intermediate band inequality
 * v_{alpha/2}(t) <= S*(t, alpha, K) on a sampled K for integer t = 1..t_max.
 */
GrowthBoundReport check_growth_bound(const Flow& flow, const OrbitCensus& census,
                                     const EntropyEstimate& e_star, double tolerance,
                                     const std::vector<double>& alphas = {0.25, 0.5, 1.0},
                                     int t_max = 8, int resolution = 12, double step = 1e-2,
                                     int store_stride = 10);

}  // namespace rescal
