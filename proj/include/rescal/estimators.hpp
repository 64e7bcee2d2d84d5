#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rescal/flow.hpp"
#include "rescal/geometry.hpp"
#include "rescal/metrics.hpp"

namespace rescal {

/** One experiment cell: the count observed at horizon t and radius epsilon. */
struct CountSample {
  double t = 0.0;
  double epsilon = 0.0;
  long count = 0;
};

/** Result of a spanning (covering) computation. */
struct CoverReport {
  long count = 0;
  std::vector<ManifoldPoint> witnesses;  // the spanning set F
  MetricQuery query;
  std::string target;  // descriptor of the covered set
  MetricDiagnostic diagnostic;
};

/** Result of a separating (packing) computation. */
struct PackReport {
  long count = 0;
  std::vector<ManifoldPoint> witnesses;  // the separated set E, a subset of K
  MetricQuery query;
  std::string target;
};

enum class EntropyMode { Classical, Rescaled, RescaledOnK };

struct SlopeFit {
  double epsilon = 0.0;
  double slope = 0.0;
  double residual = 0.0;  // RMS of the log-count fit
  int points = 0;         // t values used (after saturation filtering)
};

struct EntropyEstimate {
  std::vector<SlopeFit> per_epsilon;  // ladder order, largest epsilon first
  double extrapolated = 0.0;          // slope at the smallest epsilon with ok residual
  double t_min = 0.0, t_max = 0.0;
  EntropyMode mode = EntropyMode::Classical;
  double resolution_discrepancy = 0.0;  // max relative slope gap vs the coarse pass
};

/** A candidate certificate for e*(X) > 0: growing separated sets E_n at
 *  horizons t_n.  growth/min_separation are caller annotations only; the
 *  certificate recomputes both. */
struct SeparatingFamily {
  std::vector<double> t_n;
  std::vector<std::vector<ManifoldPoint>> E_n;
  double growth = 0.0;
  double min_separation = 0.0;
};

struct PositivityReport {
  double growth = 0.0;          // least-squares slope of log card(E_n) vs t_n
  double min_separation = 0.0;  // inf over n of min pairwise d*_{t_n} on E_n
  bool verdict = false;
};

/** Axis-aligned identity chart: the cube [0, side]^d placed at origin. */
struct ChartMap {
  Vec3 origin{0, 0, 0};
  double side = 1.0;
};

/** Atlas for the explicit grid-spanning construction.  lipschitz_a bounds the
 *  chart-map distortion (manifold distance <= A * side * max-norm in cube
 *  coordinates); speed_floor is the min field speed rho on the chart images. */
struct ChartAtlas {
  std::vector<ChartMap> maps;
  int dim = 2;
  double lipschitz_a = 1.0;
  double speed_floor = 0.0;

  double b() const;  // B = side / (2 rho), the rescaling constant of the grid
};

/** Shared trajectory cache: integrate every point to the same horizon so all
 *  counting calls below can reuse the samples.  Fine integration step, stored
 *  every store_stride-th sample. */
std::vector<Trajectory> integrate_all(const Flow& flow, const std::vector<ManifoldPoint>& points,
                                      double horizon, double step = 1e-3, int store_stride = 1);

/**
 * Greedy set-cover estimate of R(t,eps) / R*(t,eps,K): smallest found set of
 * candidate balls covering every target sample.  Deterministic: ties broken by
 * lowest candidate index.  Count is >= the true minimum and <= (1+ln|target|)
 * times it.  InfeasibleCoverError (naming the point) when some target is not
 * covered by any candidate ball; rescaled mode requires nonsingular candidates.
 */
CoverReport spanning_count(const Flow& flow, const std::vector<Trajectory>& target, double t,
                           double epsilon, bool rescaled, const std::vector<Trajectory>& candidates);
CoverReport spanning_count(const Flow& flow, const std::vector<ManifoldPoint>& target, double t,
                           double epsilon, bool rescaled, const std::vector<ManifoldPoint>& candidates,
                           double step = 1e-3);

/**
 * First-fit packing estimate of S*(t,eps,K): scan K in order, keep a point iff
 * it is separated from every kept point.  A pair is separated when d*_t is
 * >= eps in both argument orders (suprema may occur at different samples).
 * The result is a maximal packing, hence a valid lower bound for the true
 * maximum on the sampled K; deterministic under fixed K order.
 */
PackReport separating_count(const Flow& flow, const std::vector<Trajectory>& K, double t,
                            double epsilon);
PackReport separating_count(const Flow& flow, const std::vector<ManifoldPoint>& K, double t,
                            double epsilon, double step = 1e-3);

/** Atlas of unit-style cubes covering (a neighborhood of) K; speed_floor must
 *  lower-bound the speed on the cubes (checked on K itself). */
ChartAtlas make_translation_atlas(const Flow& flow, const std::vector<ManifoldPoint>& K,
                                  double side, double speed_floor);

/**
 * Explicit rescaled (t,eps,K)-spanning set: per chart, the grid E(delta) with
 * delta = eps / (e^{2Lt} A B); cardinality is guaranteed <= (5AB/eps)^d * n *
 * e^{2dLt}.  Every K sample is then verified to lie in some witness ball;
 * failure raises ConstructorInvariantError (an L or A underestimate).
 * RangeError when the cardinality bound exceeds max_cardinality.
 */
CoverReport grid_spanning_set(const Flow& flow, const std::vector<ManifoldPoint>& K, double t,
                              double epsilon, double L, const ChartAtlas& atlas,
                              double step = 1e-3, long max_cardinality = 2000000);

/**
 * Per-epsilon least-squares slopes of log count vs t.  Needs >= 3 distinct t
 * per epsilon (InsufficientDataError).  extrapolated = slope at the smallest
 * epsilon whose RMS residual is below residual_threshold (falling back to the
 * smallest-residual epsilon when none qualifies).
 */
EntropyEstimate entropy_slope(const std::vector<CountSample>& counts,
                              EntropyMode mode = EntropyMode::Classical,
                              double residual_threshold = 0.35);

struct EstimateConfig {
  int resolution = 0;         // per-axis target sampling; 0 = per-family default
  int coarse_resolution = 0;  // refinement diagnostic pass; 0 = default
  std::vector<double> t_ladder;    // empty = per-family default
  std::vector<double> eps_ladder;  // empty = per-family default
  double step = 1e-2;
  int store_stride = 10;
  double saturation_fraction = 0.8;  // drop cells with count >= fraction * |K|
  double residual_threshold = 0.35;
};

/**
 * End-to-end estimate.  Classical mode spans the whole sampled manifold in
 * d_t; Rescaled mode spans the exhaustion K_eps = M_eps in d*_t, per epsilon.
 * Counts saturated by the sample size are excluded from the fits; a coarse-
 * resolution pass fills resolution_discrepancy (accept when within 10%).
 */
EntropyEstimate estimate_entropy(const Flow& flow, EntropyMode mode,
                                 const EstimateConfig& config = {});

/**
 * Canonical compact K in M* for each family, as a unit-period circle map:
 *  - TorusItem4: the circle {x = -1/4} (length 4), the entry edge of the
 *    exact linear decay window, so speed along its orbits is (1/4) e^{-s};
 *  - SphereEno: the parallel at z = -(eno_delta()), where the decay constant
 *    kappa is realized; SphereEnoUnperturbed: the parallel z = -1/4;
 *  - CatMapSuspension: the fiber circle {v = s = 0};
 *  - ConstantTorus / LinearTorus: the circle {x = 0}.
 */
Vec3 reference_circle_point(const Flow& flow, double frac);

/** E_n = 2^n points circle(j / 2^n), t_n = n * t_scale, n = 1..n_max. */
SeparatingFamily make_doubling_family(const ChartSpec& chart,
                                      const std::function<Vec3(double)>& circle, int n_max,
                                      double t_scale);

/**
 * Proposition-style positivity certificate: recomputes the growth rate
 * (least-squares slope of log card(E_n) against t_n) and the separation
 * inf_n min_{p != q in E_n} d*_{t_n}(p,q) by brute force over pairs, both
 * orders.  verdict = growth >= 0.05 and min_separation >= 0.01 (declared
 * margins; families whose gaps shrink with n fail the second one at modest
 * n_max).  E_n must be subsets of K; zero speed along an orbit raises
 * SingularBaseError.
 */
PositivityReport positivity_certificate(const Flow& flow, const std::vector<ManifoldPoint>& K,
                                        const SeparatingFamily& family, double step = 1e-3,
                                        int store_stride = 1);

}  // namespace rescal
