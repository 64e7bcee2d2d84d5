#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rescal/errors.hpp"

namespace rescal {

using Vec3 = std::array<double, 3>;

/** 2x2 integer matrix, row major: [a b; c d]. */
struct Mat2i {
  std::int64_t a = 1, b = 0, c = 0, d = 1;

  std::int64_t det() const { return a * d - b * c; }
  Mat2i operator*(const Mat2i& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  bool operator==(const Mat2i& o) const = default;
};

Mat2i mat_pow(Mat2i m, int n);  // n >= 0
Mat2i mat_inverse_unimodular(const Mat2i& m);

enum class ManifoldKind { FlatTorus2, Sphere2, MappingTorus };

/**
 * Chart data for the three model manifolds.
 *  - FlatTorus2: fundamental domain [-sx/2, sx/2) x [0, sy); coords (x, y, 0).
 *  - Sphere2: unit sphere in R^3; coords on the sphere within 1e-12.
 *  - MappingTorus: T^2 x [0,1) with (u,1) ~ (A u, 0); coords (u, v, s),
 *    (u, v) in [0,1)^2.  Distance is max_i |F_i(p) - F_i(q)| over a fixed
 *    separating family of smooth functions on the quotient (height circle
 *    chars + windowed fiber chars, with a gluing-equivariant seam window), so
 *    the triangle inequality holds exactly.  Any naive "min over gluing
 *    liftings of the flat product" fails the triangle inequality at every
 *    scale (A is not a fiber isometry); this metric is bi-Lipschitz to a
 *    smooth Riemannian metric, which is all entropy estimation needs.
 *    Features carry the character scale (no 1/2pi): diameter 2, and a
 *    same-height fiber offset du reads as ~2pi|du|*[0.35,1].
 */
struct ChartSpec {
  ManifoldKind kind = ManifoldKind::FlatTorus2;
  double side_x = 4.0, side_y = 4.0;  // FlatTorus2
  Mat2i glue;                         // MappingTorus

  static ChartSpec flat_torus(double sx, double sy) {
    ChartSpec c;
    c.kind = ManifoldKind::FlatTorus2;
    c.side_x = sx;
    c.side_y = sy;
    return c;
  }
  static ChartSpec sphere() {
    ChartSpec c;
    c.kind = ManifoldKind::Sphere2;
    return c;
  }
  static ChartSpec mapping_torus(const Mat2i& A) {
    ChartSpec c;
    c.kind = ManifoldKind::MappingTorus;
    c.glue = A;
    return c;
  }

  bool operator==(const ChartSpec& o) const;
  std::string name() const;
};

struct ManifoldPoint {
  ChartSpec chart;
  Vec3 x{0, 0, 0};
};

/** Reduce chart coordinates into the fundamental domain (torus/mapping torus)
 *  or renormalize onto the sphere.  Throws InvalidArgumentError for NaNs or a
 *  sphere point too far off the unit shell to be a rounding artifact. */
Vec3 reduce(const ChartSpec& chart, const Vec3& raw);

ManifoldPoint make_point(const ChartSpec& chart, const Vec3& raw);

/** Geodesic distance for torus/sphere; min-over-liftings product distance for
 *  the mapping torus.  Throws ChartMismatchError when charts differ. */
double distance(const ManifoldPoint& p, const ManifoldPoint& q);

/** Distance with both points already reduced, chart supplied once (hot path). */
double chart_distance(const ChartSpec& chart, const Vec3& p, const Vec3& q);

/**
 * Deterministic well-spread sample, lexicographic order:
 *  - torus: resolution^2 lattice aligned with the fundamental domain,
 *  - sphere: Fibonacci set of resolution^2 points,
 *  - mapping torus: resolution^3 lattice in (u, v, s).
 */
std::vector<ManifoldPoint> sample_grid(const ChartSpec& chart, int resolution);

/** Covering radius of `points`, estimated by brute force against `probes`
 *  pseudo-random probes (seeded); used by tests for mesh monotonicity. */
double mesh_size(const ChartSpec& chart, const std::vector<ManifoldPoint>& points, int probes,
                 std::uint64_t seed);

/** Uniform pseudo-random point (seeded caller-side Rng state). */
Vec3 random_chart_point(const ChartSpec& chart, class Rng& rng);

/** Mapping-torus distance is max_i |F_i(p) - F_i(q)| over a fixed list of
 *  smooth separating functions; these export that embedding so bulk metric
 *  loops can cache F(p) per sample.  Dimension is 0 for charts whose distance
 *  is computed directly from coordinates. */
int chart_feature_dim(const ChartSpec& chart);
void chart_features(const ChartSpec& chart, const Vec3& p, double* out);

}  // namespace rescal
