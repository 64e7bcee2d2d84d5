#include "rescal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "rescal/errors.hpp"

namespace rescal {

namespace {

constexpr double kMinDenominator = 1e-14;

/** Number of shared leading samples through time t; validates alignment. */
std::size_t aligned_samples(const Trajectory& tx, const Trajectory& ty, double t) {
  if (tx.chart.kind != ty.chart.kind)
    throw ChartMismatchError("dt metric: trajectories live on different manifolds");
  std::size_t nx = tx.samples_through(t);
  std::size_t ny = ty.samples_through(t);
  if (nx != ny || std::abs(tx.step - ty.step) > 1e-12 * std::max(1.0, tx.step))
    throw InvalidArgumentError("dt metric: trajectories use different time grids");
  return nx;
}

}  // namespace

void MetricQuery::validate() const {
  if (!(t >= 0.0)) throw ConstructorInvariantError("MetricQuery: t must be >= 0");
  if (!(epsilon > 0.0)) throw ConstructorInvariantError("MetricQuery: epsilon must be > 0");
}

double dt_metric(const Trajectory& tx, const Trajectory& ty, double t) {
  std::size_t n = aligned_samples(tx, ty, t);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    sup = std::max(sup, chart_distance(tx.chart, tx.points[i], ty.points[i]));
  return sup;
}

double rescaled_dt_metric(const Trajectory& tx, const Trajectory& ty, double t) {
  std::size_t n = aligned_samples(tx, ty, t);
  double sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (tx.speeds[i] < kMinDenominator)
      throw SingularBaseError("rescaled dt metric: base trajectory reaches speed < 1e-14 at t = " +
                              std::to_string(tx.times[i]));
    sup = std::max(sup, chart_distance(tx.chart, tx.points[i], ty.points[i]) / tx.speeds[i]);
  }
  return sup;
}

bool within_dt(const Trajectory& tx, const Trajectory& ty, double t, double eps) {
  std::size_t n = aligned_samples(tx, ty, t);
  for (std::size_t i = n; i-- > 0;)
    if (chart_distance(tx.chart, tx.points[i], ty.points[i]) > eps) return false;
  return true;
}

bool within_rescaled_dt(const Trajectory& tx, const Trajectory& ty, double t, double eps) {
  std::size_t n = aligned_samples(tx, ty, t);
  for (std::size_t i = n; i-- > 0;) {
    double d = chart_distance(tx.chart, tx.points[i], ty.points[i]);
    // d > eps * 0 covers the positive-distance singular case (ratio = inf)
    if (d > eps * tx.speeds[i]) return false;
    if (tx.speeds[i] < kMinDenominator)
      throw SingularBaseError("rescaled ball query: base trajectory reaches speed < 1e-14");
  }
  return true;
}

MetricDiagnostic discretization_diagnostic(const FlowSummary& summary, double step) {
  if (!(step > 0.0)) throw InvalidArgumentError("discretization diagnostic: step must be > 0");
  MetricDiagnostic d;
  d.dt_slack = step * summary.sup_speed;
  d.rescale_factor = std::exp(summary.lipschitz * step);
  return d;
}

std::vector<ManifoldPoint> sublevel_sample(const Flow& flow, double delta, int resolution) {
  if (!(delta > 0.0)) throw InvalidArgumentError("sublevel sample: delta must be > 0");
  std::vector<ManifoldPoint> out;
  for (const ManifoldPoint& p : sample_grid(flow.chart(), resolution))
    if (flow.speed_at(p.x) >= delta) out.push_back(p);
  return out;
}

}  // namespace rescal
