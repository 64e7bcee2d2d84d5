#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "rescal/geometry.hpp"

namespace rescal {

enum class FlowId {
  ConstantTorus,
  LinearTorus,
  TorusItem4,
  SphereEno,
  SphereEnoUnperturbed,
  CatMapSuspension,
};

/**
 * Cached orbit segment: uniform time samples 0 = t_0 < ... < t_n = horizon
 * with reduced chart points and speed values.  If the base is (numerically) an
 * equilibrium, all samples equal the base.
 */
struct Trajectory {
  ChartSpec chart;
  Vec3 base{0, 0, 0};
  double step = 0.0;  // actual uniform step (<= requested)
  std::vector<double> times;
  std::vector<Vec3> points;
  std::vector<double> speeds;

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  ManifoldPoint point(std::size_t i) const { return {chart, points[i]}; }

  /** Number of leading samples with times <= t (within half-step slack);
   *  throws RangeError when t exceeds the cached horizon. */
  std::size_t samples_through(double t) const;
};

struct FlowSummary {
  double sup_speed = 0.0;  // ||X||_inf over the sample cascade
  double inf_speed = 0.0;  // m(X); exactly 0 for families with declared singularities
  double lipschitz = 0.0;  // upper bound for the Lipschitz constant L of X
  std::string singular_set;
};

/**
 * A built-in vector field on one of the model manifolds.  Immutable; all
 * evaluation/integration is pure, so instances can be shared across threads.
 *
 * Families:
 *  - ConstantTorus(vx, vy): X = (vx, vy) on the side-4 flat torus (nonsingular).
 *  - LinearTorus(ax, ay): same thing under its usual name (rotation vector).
 *  - TorusItem4: X = rho(x) (1,0) with rho = 1 on [-2,-1] u [1,2], rho = -x on
 *    [-1/4,1/4], rho = x - 2/3 on [7/12,9/12], C-infinity blends between; the
 *    singular set is the two circles x in {0, 2/3}.
 *  - SphereEno(a, b, w, sa, sb): X = rho(z) (xz, yz, -(x^2+y^2)) with rho a
 *    perturbation of rho0(z) = (1-z^2) e^{-1/(1-z^2)} vanishing (simple zeros,
 *    slopes sb, sa) at latitudes z = b < a < 0: exact linear windows of
 *    half-width w around a and b, blends to rho0 outside.  Speed is
 *    |rho(z)| sqrt(1-z^2); the latitude z = a is attracting at exponential
 *    rate gamma = sa (1 - a^2).
 *  - SphereEnoUnperturbed: rho = rho0 (singular only at the poles).
 *  - CatMapSuspension(A): unit-speed vertical suspension flow of the toral
 *    automorphism A on the mapping torus (nonsingular).
 */
class Flow {
 public:
  static Flow constant_torus(double vx, double vy);
  static Flow linear_torus(double ax, double ay);
  static Flow torus_item4();
  static Flow sphere_eno();  // a=-0.3, b=-0.7, w=0.05, sa=0.5, sb=-0.5
  static Flow sphere_eno(double a, double b, double w, double sa, double sb);
  static Flow sphere_eno_unperturbed();
  static Flow cat_map_suspension();  // A = [[2,1],[1,1]]
  static Flow cat_map_suspension(const Mat2i& A);

  /** The six default-parameter flows, fixed order, for "all built-ins" sweeps. */
  static const std::vector<Flow>& builtins();
  static Flow by_name(const std::string& name);

  FlowId id() const { return id_; }
  const ChartSpec& chart() const { return chart_; }
  const std::string& name() const { return name_; }
  bool nonsingular() const { return nonsingular_; }

  /** Field vector in chart coordinates and its norm; zero exactly on the
   *  declared singular set. */
  std::pair<Vec3, double> evaluate_field(const ManifoldPoint& p) const;
  double speed_at(const Vec3& reduced) const;

  /** Fixed-step RK4 (exact for the constant-speed families).  Sphere states
   *  are renormalized and torus states reduced every step; a sample with speed
   *  below 1e-14 freezes the trajectory there.  store_stride > 1 integrates at
   *  the fine step but records every stride-th sample (bulk caches). */
  Trajectory integrate(const ManifoldPoint& p, double horizon, double step = 1e-3,
                       int store_stride = 1) const;

  /** sup/inf speed over a nested sample cascade (resolution, resolution/2, ...)
   *  so the estimates are monotone along doubling ladders; Lipschitz bound from
   *  the analytic Jacobian (Frobenius norm) where the family has one. */
  FlowSummary summary(int resolution) const;

  // --- family-specific analytic accessors --------------------------------
  /** Radial profile rho: TorusItem4 takes x, the sphere families take z. */
  double rho(double coord) const;
  double rho_prime(double coord) const;
  /** SphereEno: contraction rate gamma = sa (1 - a^2) of the latitude z = a. */
  double eno_gamma() const;
  /** SphereEno: |z| of the reference parallel K (z = a + w). */
  double eno_delta() const;
  /** SphereEno: speed on K, the constant of the decay bound kappa e^{-gamma t}. */
  double eno_kappa() const;
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  const Mat2i& glue() const { return A_; }

 private:
  Flow() = default;

  Vec3 field_raw(const Vec3& x) const;  // chart coords, no reduction

  FlowId id_ = FlowId::ConstantTorus;
  ChartSpec chart_;
  std::string name_;
  bool nonsingular_ = true;
  double vx_ = 1.0, vy_ = 0.0;                              // constant/linear
  double a_ = 0.0, b_ = 0.0, w_ = 0.0, sa_ = 0.0, sb_ = 0.0;  // sphere-eno
  Mat2i A_;                                                 // cat map
};

}  // namespace rescal
