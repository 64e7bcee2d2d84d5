#pragma once

#include <vector>

#include "rescal/estimators.hpp"
#include "rescal/flow.hpp"
#include "rescal/metrics.hpp"

namespace rescal {

/**
 * Finitely supported stand-in for a Borel probability measure giving no mass
 * to Sing(X): every measure-level statement is asserted at atom-mass level.
 * Parallel arrays; weights are positive and sum to 1 within 1e-12.
 */
struct EmpiricalMeasure {
  std::vector<ManifoldPoint> atoms;
  std::vector<double> weights;

  double total() const;  // compensated sum of the weights
  /** Shape, positivity, total mass, and atom speed >= 1e-14 (off Sing(X)). */
  void validate(const Flow& flow) const;
};

enum class MeasureKind { UniformGrid, TrajectoryPush };

/** UniformGrid: equal weights on sample_grid at the resolution whose size is
 *  nearest to n, minus singular atoms (speed < 1e-14).  SingularBaseError
 *  when every grid point is singular (degenerate measure). */
EmpiricalMeasure sample_measure(const Flow& flow, int n);

/** TrajectoryPush: equal weights on n time samples of one long trajectory,
 *  spaced horizon/n apart after a burn-in (an approximate invariant measure).
 *  Singular samples are dropped; all singular -> SingularBaseError. */
EmpiricalMeasure sample_measure(const Flow& flow, const ManifoldPoint& base, double burn_in,
                                double horizon, int n, double step = 1e-2);

/** Equal weights on an explicit support, minus singular points. */
EmpiricalMeasure point_measure(const Flow& flow, const std::vector<ManifoldPoint>& support);

struct MeasureCoverReport {
  long count = 0;
  std::vector<ManifoldPoint> witnesses;  // ball centers F, a subset of the atoms
  double covered_mass = 0.0;             // mass of K inside the union of the balls
  double target_mass = 0.0;              // mass of K (1 when K is all atoms)
  MetricQuery query;
  double delta = 0.0;
};

/**
 * Greedy mass cover for R-mu-star(t, eps, delta, K): repeatedly add the atom
 * ball covering the most uncovered K-mass (ties by lowest atom index) until
 * the uncovered K-mass is strictly below delta.  K is a point list selecting
 * atoms by exact coordinates (points that are not atoms carry no mass); empty
 * K means every atom.  Atoms whose orbit leaves M* within [0, t] are excluded
 * as centers (their rescaled balls are undefined) but still carry mass.
 * Candidates exhausted while uncovered mass >= delta -> InfeasibleCoverError.
 *
 * With equal weights the selection order coincides with spanning_count's
 * greedy on the same support, so the count never exceeds a full rescaled
 * cover's: a full cover is a mu-cover for every delta.
 */
MeasureCoverReport measure_spanning_count(const Flow& flow, const EmpiricalMeasure& mu, double t,
                                          double epsilon, double delta,
                                          const std::vector<ManifoldPoint>& K = {},
                                          double step = 1e-3, int store_stride = 1);

/** Classical-ball variant, R-mu(t, eps, delta): same greedy in the d_t
 *  metric, always over all atoms. */
MeasureCoverReport classical_measure_count(const Flow& flow, const EmpiricalMeasure& mu, double t,
                                           double epsilon, double delta, double step = 1e-3,
                                           int store_stride = 1);

struct MeasureSlopeFit {
  double delta = 0.0;
  SlopeFit fit;
};

struct MeasureEntropyEstimate {
  std::vector<MeasureSlopeFit> per_cell;  // delta ladder outer (largest first), epsilon inner
  double extrapolated = 0.0;              // fit at the smallest delta, smallest ok-residual eps
  double t_min = 0.0, t_max = 0.0;
  EntropyMode mode = EntropyMode::Rescaled;
};

/**
 * e-star-mu estimate: per delta in the ladder, rescaled mass-cover counts over
 * the (t, eps) grid are fitted exactly as in entropy_slope (same saturation
 * filter against the atom count, same residual rule).  config.resolution and
 * the coarse pass do not apply (the measure fixes the sampling).
 */
MeasureEntropyEstimate estimate_e_star_mu(const Flow& flow, const EmpiricalMeasure& mu,
                                          const EstimateConfig& config = {},
                                          const std::vector<double>& delta_ladder = {0.2, 0.1,
                                                                                     0.05});

}  // namespace rescal
