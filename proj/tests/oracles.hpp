#pragma once

// Brute-force reference implementations used only by tests.  These are written
// to be obviously correct (exhaustive, no tricks) and slow; expected values in
// the test files were frozen from these oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "rescal/geometry.hpp"

namespace oracles {

/** Flat-torus distance as a min over the nine lattice translates. */
inline double torus_distance_bruteforce(const rescal::ChartSpec& chart, const rescal::Vec3& p,
                                        const rescal::Vec3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) {
      double dx = p[0] - q[0] + i * chart.side_x;
      double dy = p[1] - q[1] + j * chart.side_y;
      best = std::min(best, std::sqrt(dx * dx + dy * dy));
    }
  return best;
}

/**
 * Exact minimum set cover by dynamic programming over target subsets.
 * membership[c] is the bitmask of targets covered by candidate c; targets <= 20.
 * Returns -1 when infeasible.
 */
inline int min_cover_bruteforce(const std::vector<std::uint32_t>& membership, int n_targets) {
  const std::uint32_t full = (n_targets == 32) ? 0xffffffffu : ((1u << n_targets) - 1u);
  std::vector<int> best(full + 1u, -1);
  best[0] = 0;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (best[mask] < 0) continue;
    if (mask == full) break;
    for (std::uint32_t m : membership) {
      std::uint32_t nm = mask | m;
      if (nm == mask) continue;
      if (best[nm] < 0 || best[nm] > best[mask] + 1) best[nm] = best[mask] + 1;
    }
  }
  return best[full];
}

/**
 * Exact maximum packing: largest subset with compat[i][j] true for all pairs.
 * n <= 24; simple branch and bound.
 */
inline int max_packing_bruteforce(const std::vector<std::vector<bool>>& compat) {
  int n = static_cast<int>(compat.size());
  int best = 0;
  std::vector<int> chosen;
  // depth-first over candidates in index order
  std::function<void(int)> rec = [&](int i) {
    if (i == n) {
      best = std::max(best, static_cast<int>(chosen.size()));
      return;
    }
    if (static_cast<int>(chosen.size()) + (n - i) <= best) return;  // bound
    bool ok = true;
    for (int j : chosen)
      if (!compat[j][i]) {
        ok = false;
        break;
      }
    if (ok) {
      chosen.push_back(i);
      rec(i + 1);
      chosen.pop_back();
    }
    rec(i + 1);
  };
  rec(0);
  return best;
}

/** Fixed points of A^n on the torus, counted over the (1/q)-lattice, q = |det(A^n - I)|.
 *  Every fixed point has denominator dividing q, so the count is exact. */
inline long long fixed_points_bruteforce(const rescal::Mat2i& A, int n) {
  rescal::Mat2i An = rescal::mat_pow(A, n);
  long long m00 = An.a - 1, m01 = An.b, m10 = An.c, m11 = An.d - 1;
  long long det = m00 * m11 - m01 * m10;
  long long q = det < 0 ? -det : det;
  if (q == 0) return -1;  // non-hyperbolic power; caller should not ask
  long long count = 0;
  for (long long i = 0; i < q; ++i)
    for (long long j = 0; j < q; ++j) {
      long long r0 = (m00 * i + m01 * j) % q;
      long long r1 = (m10 * i + m11 * j) % q;
      if (r0 == 0 && r1 == 0) ++count;
    }
  return count;
}

}  // namespace oracles
