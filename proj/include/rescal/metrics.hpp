#pragma once

#include <vector>

#include "rescal/flow.hpp"
#include "rescal/geometry.hpp"

namespace rescal {

/** Parameters of a dynamical-ball query B(x,t,eps) / B*(x,t,eps). */
struct MetricQuery {
  double t = 0.0;
  double epsilon = 0.0;
  bool rescaled = false;

  void validate() const;  // t >= 0, epsilon > 0
};

/**
 * d_t(x,y) = sup_{0<=s<=t} d(phi_s x, phi_s y), supremum over the shared
 * discrete samples.  Both trajectories must cover [0,t] with the same time
 * grid (same step); RangeError past the cached horizon, InvalidArgumentError
 * when the grids are misaligned.
 */
double dt_metric(const Trajectory& tx, const Trajectory& ty, double t);

/**
 * d*_t(x,y) = sup_{0<=s<=t} d(phi_s x, phi_s y) / ||X(phi_s x)||.  Asymmetric:
 * denominators come from tx only.  SingularBaseError when a sample of tx has
 * speed below 1e-14 (rather than returning infinity).
 */
double rescaled_dt_metric(const Trajectory& tx, const Trajectory& ty, double t);

/**
 * Ball-membership fast paths: equivalent to comparing the metric against eps
 * but scan backwards (expanding flows usually separate late) and exit on the
 * first violating sample.  within_rescaled_dt may return false without having
 * visited a zero-speed sample; a true answer always implies a full clean scan.
 */
bool within_dt(const Trajectory& tx, const Trajectory& ty, double t, double eps);
bool within_rescaled_dt(const Trajectory& tx, const Trajectory& ty, double t, double eps);

/**
 * Discretization slack of the sampled suprema: for the continuous-time value,
 *   d_t  <=  sampled d_t  +  dt_slack,
 *   d*_t <=  (sampled d*_t + dt_slack / (min sample speed)) * rescale_factor,
 * where dt_slack = step * sup_speed bounds the motion between samples and
 * rescale_factor = exp(lipschitz * step) bounds denominator drift.
 */
struct MetricDiagnostic {
  double dt_slack = 0.0;
  double rescale_factor = 1.0;
};
MetricDiagnostic discretization_diagnostic(const FlowSummary& summary, double step);

/** Grid sample of the sublevel set M_delta = {x : ||X(x)|| >= delta}. */
std::vector<ManifoldPoint> sublevel_sample(const Flow& flow, double delta, int resolution);

}  // namespace rescal
