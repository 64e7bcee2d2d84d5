#pragma once

// Internals shared by the counting front ends (estimators.cpp, measure.cpp).
// Keeping one ball-membership predicate is what makes the cross-module
// comparisons (mass covers vs full covers) exact rather than approximate.

#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "rescal/errors.hpp"
#include "rescal/flow.hpp"
#include "rescal/geometry.hpp"

namespace rescal {
namespace detail {

constexpr double kMinDenominator = 1e-14;

inline std::string describe_point(const ManifoldPoint& p) {
  std::ostringstream os;
  os << "(" << p.x[0] << ", " << p.x[1] << ", " << p.x[2] << ")";
  return os.str();
}

/** Aligned sample count shared by two trajectory caches through horizon t. */
inline std::size_t common_samples(const std::vector<Trajectory>& a,
                                  const std::vector<Trajectory>& b, double t) {
  if (a.empty() || b.empty()) throw InvalidArgumentError("counting: empty trajectory set");
  std::size_t n = a.front().samples_through(t);
  for (const auto* set : {&a, &b})
    for (const Trajectory& tr : *set) {
      if (tr.chart.kind != a.front().chart.kind)
        throw ChartMismatchError("counting: trajectories on different manifolds");
      if (tr.samples_through(t) != n ||
          std::abs(tr.step - a.front().step) > 1e-12 * std::max(1.0, tr.step))
        throw InvalidArgumentError("counting: trajectories use different time grids");
    }
  return n;
}

/** Per-sample feature cache so mapping-torus distances avoid re-evaluating
 *  trigonometry inside the pair loops. */
struct Cloud {
  const std::vector<Trajectory>* trs = nullptr;
  ChartSpec chart;
  int nf = 0;
  std::vector<std::vector<double>> feats;

  void build(const std::vector<Trajectory>& t) {
    trs = &t;
    chart = t.front().chart;
    nf = chart_feature_dim(chart);
    if (nf == 0) return;
    feats.resize(t.size());
    for (std::size_t a = 0; a < t.size(); ++a) {
      feats[a].resize(t[a].points.size() * static_cast<std::size_t>(nf));
      for (std::size_t i = 0; i < t[a].points.size(); ++i)
        chart_features(chart, t[a].points[i], &feats[a][i * static_cast<std::size_t>(nf)]);
    }
  }

  double dist(std::size_t a, std::size_t i, const Cloud& other, std::size_t b) const {
    if (nf) {
      const double* fa = &feats[a][i * static_cast<std::size_t>(nf)];
      const double* fb = &other.feats[b][i * static_cast<std::size_t>(nf)];
      double m = 0.0;
      for (int j = 0; j < nf; ++j) m = std::max(m, std::abs(fa[j] - fb[j]));
      return m;
    }
    return chart_distance(chart, (*trs)[a].points[i], (*other.trs)[b].points[i]);
  }
};

/** Target b inside the (rescaled) ball around candidate a?  Backward scan with
 *  early exit; denominators come from the candidate (ball center). */
inline bool ball_member(const Cloud& cand, std::size_t a, const Cloud& targ, std::size_t b,
                        std::size_t n, double eps, bool rescaled) {
  const Trajectory& ta = (*cand.trs)[a];
  for (std::size_t i = n; i-- > 0;) {
    double d = cand.dist(a, i, targ, b);
    if (!rescaled) {
      if (d > eps) return false;
      continue;
    }
    if (d > eps * ta.speeds[i]) return false;
    if (ta.speeds[i] < kMinDenominator)
      throw SingularBaseError("ball membership: candidate orbit speed fell below 1e-14");
  }
  return true;
}

inline double ls_slope(const std::vector<double>& xs, const std::vector<double>& ys,
                       double* residual) {
  double n = static_cast<double>(xs.size());
  double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
  double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom <= 0.0) throw InsufficientDataError("slope fit: degenerate t values");
  double slope = (n * sxy - sx * sy) / denom;
  double icept = (sy - slope * sx) / n;
  if (residual) {
    double ss = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      double r = ys[i] - slope * xs[i] - icept;
      ss += r * r;
    }
    *residual = std::sqrt(ss / n);
  }
  return slope;
}

/** Drop saturated cells and epsilons left with < 3 usable t values. */
template <typename Sample>
std::vector<Sample> filter_saturated(const std::vector<Sample>& raw, double fraction,
                                     const std::map<double, std::size_t>& k_sizes) {
  std::vector<Sample> kept;
  std::map<double, int> usable;
  for (const Sample& c : raw) {
    auto it = k_sizes.find(c.epsilon);
    double cap = fraction * static_cast<double>(it == k_sizes.end() ? 0 : it->second);
    if (static_cast<double>(c.count) < cap) {
      kept.push_back(c);
      ++usable[c.epsilon];
    }
  }
  std::vector<Sample> final_;
  for (const Sample& c : kept)
    if (usable[c.epsilon] >= 3) final_.push_back(c);
  return final_;
}

inline std::vector<double> default_t_ladder(const Flow& flow) {
  if (flow.id() == FlowId::CatMapSuspension) return {1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<double> t = {2, 4, 6, 8, 10, 12};
  if (flow.id() == FlowId::SphereEno)  // contraction clock runs at rate gamma
    for (double& v : t) v /= flow.eno_gamma();
  return t;
}

inline std::vector<double> default_eps_ladder(const Flow& flow) {
  // the mapping-torus character metric has diameter 2, so its ladder starts higher
  if (flow.chart().kind == ManifoldKind::MappingTorus) return {1.0, 0.75, 0.5, 0.3};
  return {0.4, 0.2, 0.1, 0.05};
}

}  // namespace detail
}  // namespace rescal
