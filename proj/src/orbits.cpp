#include "rescal/orbits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "rescal/errors.hpp"

namespace rescal {

namespace {

// A^44 of the cat map is ~4e18, the last power whose entries fit an int64
constexpr int kMaxPower = 44;

void require_hyperbolic(const Mat2i& A) {
  std::int64_t det = A.det();
  if (det != 1 && det != -1)
    throw InvalidArgumentError("orbit census: |det A| must be 1, got " + std::to_string(det));
  std::int64_t tr = A.a + A.d;
  if (tr <= 2 && tr >= -2)
    throw InvalidArgumentError("orbit census: A is not hyperbolic (|trace| = " +
                               std::to_string(tr < 0 ? -tr : tr) + " <= 2)");
}

int mobius(int n) {
  int res = 1;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      n /= p;
      if (n % p == 0) return 0;
      res = -res;
    }
  if (n > 1) res = -res;
  return res;
}

}  // namespace

long long fixed_point_count(const Mat2i& A, int n) {
  require_hyperbolic(A);
  if (n < 1) throw InvalidArgumentError("fixed_point_count: n must be >= 1");
  if (n > kMaxPower)
    throw RangeError("fixed_point_count: n > " + std::to_string(kMaxPower) +
                     " overflows exact integer powers");
  Mat2i an = mat_pow(A, n);
  // entries of A^n near 4e18: take the determinant of A^n - I in 128-bit
  __int128 det = (__int128)(an.a - 1) * (an.d - 1) - (__int128)an.b * an.c;
  if (det < 0) det = -det;
  return static_cast<long long>(det);
}

OrbitCensus orbit_census(const Mat2i& A, double t_max) {
  require_hyperbolic(A);
  if (!(t_max >= 1.0)) throw InvalidArgumentError("orbit_census: t_max must be >= 1");
  int n_max = static_cast<int>(std::floor(t_max + 1e-9));
  if (n_max > kMaxPower)
    throw RangeError("orbit_census: t_max > " + std::to_string(kMaxPower) +
                     " overflows exact integer powers");

  OrbitCensus census;
  census.glue = A;
  std::vector<long long> fixed(static_cast<std::size_t>(n_max) + 1, 0);
  for (int n = 1; n <= n_max; ++n) fixed[static_cast<std::size_t>(n)] = fixed_point_count(A, n);

  long long running = 0;
  for (int n = 1; n <= n_max; ++n) {
    // n * orbits(n) = sum_{d | n} mu(n / d) |Fix(A^d)|
    long long weighted = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) weighted += mobius(n / d) * fixed[static_cast<std::size_t>(d)];
    if (weighted < 0 || weighted % n != 0)
      throw InternalError("orbit_census: Moebius inversion gave a non-integral orbit count");
    long long orbits = weighted / n;
    census.per_period.push_back({n, fixed[static_cast<std::size_t>(n)], orbits});
    running += orbits;
    census.v_table.push_back({static_cast<double>(n), running});
  }
  return census;
}

long long OrbitCensus::v(double t) const {
  long long out = 0;
  for (const auto& [tn, vn] : v_table)
    if (tn <= t + 1e-12) out = vn;
  return out;
}

long long OrbitCensus::v_band(double t, double beta) const {
  if (!(beta >= 0.0)) throw InvalidArgumentError("v_band: beta must be >= 0");
  long long out = 0;
  for (const PeriodRow& row : per_period) {
    // some multiple k n lies in [t - beta, t + beta]?
    double lo = (t - beta) / static_cast<double>(row.n);
    double hi = (t + beta) / static_cast<double>(row.n);
    long long k_lo = std::max<long long>(1, static_cast<long long>(std::ceil(lo - 1e-9)));
    long long k_hi = static_cast<long long>(std::floor(hi + 1e-9));
    if (k_lo <= k_hi) out += row.least_period_orbits;
  }
  return out;
}

double growth_rate(const OrbitCensus& census) {
  if (census.v_table.empty()) throw InsufficientDataError("growth_rate: empty census");
  double t_max = census.v_table.back().first;
  if (!(t_max >= 8.0))
    throw InsufficientDataError("growth_rate: need t_max >= 8, got " + std::to_string(t_max));

  std::vector<double> ts, ys;
  for (const auto& [t, v] : census.v_table)
    if (t >= 0.5 * t_max) {
      if (v <= 0) return 0.0;  // no periodic orbits in the window: no growth
      ts.push_back(t);
      ys.push_back(std::log(static_cast<double>(v)));
    }
  if (ts.size() < 3) throw InsufficientDataError("growth_rate: top half has fewer than 3 rows");

  // least squares on (1, t, log t); normal equations, 3x3 Gaussian elimination
  double m[3][4] = {};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double row[3] = {1.0, ts[i], std::log(ts[i])};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) m[a][b] += row[a] * row[b];
      m[a][3] += row[a] * ys[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (std::abs(m[col][col]) < 1e-12)
      throw InsufficientDataError("growth_rate: degenerate fit (collinear time ladder)");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      for (int b = col; b < 4; ++b) m[r][b] -= f * m[col][b];
    }
  }
  return m[1][3] / m[1][1];
}

GrowthBoundReport check_growth_bound(const Flow& flow, const OrbitCensus& census,
                                     const EntropyEstimate& e_star, double tolerance,
                                     const std::vector<double>& alphas, int t_max, int resolution,
                                     double step, int store_stride) {
  if (!flow.nonsingular())
    throw InvalidArgumentError(
        "check_growth_bound: needs a nonsingular flow (so M_delta = M for small delta)");
  if (alphas.empty() || t_max < 1)
    throw InvalidArgumentError("check_growth_bound: need alphas and t_max >= 1");
  for (double a : alphas)
    if (!(a > 0.0)) throw InvalidArgumentError("check_growth_bound: alphas must be > 0");

  GrowthBoundReport report;
  report.growth = growth_rate(census);
  report.e_star = e_star.extrapolated;
  report.tolerance = tolerance;
  report.rate_ok = report.growth <= e_star.extrapolated + tolerance;

  auto K = sample_grid(flow.chart(), resolution);
  auto cache = integrate_all(flow, K, static_cast<double>(t_max), step, store_stride);
  report.verdict = report.rate_ok;
  for (double alpha : alphas)
    for (int t = 1; t <= t_max; ++t) {
      GrowthBandCell cell;
      cell.alpha = alpha;
      cell.t = static_cast<double>(t);
      cell.v_band = census.v_band(cell.t, 0.5 * alpha);
      cell.separating = separating_count(flow, cache, cell.t, alpha).count;
      cell.ok = cell.v_band <= cell.separating;
      report.verdict = report.verdict && cell.ok;
      report.cells.push_back(cell);
    }
  return report;
}

}  // namespace rescal
