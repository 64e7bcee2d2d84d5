#include "rescal/lemma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "cover_detail.hpp"
#include "rescal/errors.hpp"
#include "rescal/metrics.hpp"
#include "rescal/parallel.hpp"
#include "rescal/rng.hpp"

namespace rescal {

namespace {

using detail::default_eps_ladder;
using detail::default_t_ladder;
using detail::describe_point;

constexpr int kLadderDepth = 11;         // r = 1, 1/2, ..., 2^-10
constexpr double kSpeedFloor = 1e-12;    // "in M*" for sampled bases
constexpr double kInfinity = std::numeric_limits<double>::infinity();

/** Uniform-ish point of the metric ball of `radius` around `center`.  Torus
 *  and sphere are exact constructions (wrapped disc offset / geodesic cap);
 *  the mapping torus proposes coordinate offsets and shrinks until the feature
 *  metric accepts, which is all the Monte-Carlo probes need. */
Vec3 sample_in_metric_ball(const ChartSpec& chart, const Vec3& center, double radius, Rng& rng) {
  switch (chart.kind) {
    case ManifoldKind::FlatTorus2: {
      double phi = rng.uniform(0.0, 2.0 * M_PI);
      double rad = radius * std::sqrt(rng.next_double());
      return reduce(chart, {center[0] + rad * std::cos(phi), center[1] + rad * std::sin(phi), 0});
    }
    case ManifoldKind::Sphere2: {
      // tangent direction by projecting a random vector off the center
      Vec3 u{};
      double nu = 0.0;
      do {
        Vec3 g = {rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        double dot = g[0] * center[0] + g[1] * center[1] + g[2] * center[2];
        for (int i = 0; i < 3; ++i) u[i] = g[i] - dot * center[i];
        nu = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
      } while (nu < 1e-6);
      double theta = std::min(radius, M_PI) * std::sqrt(rng.next_double()) * (1.0 - 1e-12);
      double c = std::cos(theta), s = std::sin(theta) / nu;
      return reduce(chart, {c * center[0] + s * u[0], c * center[1] + s * u[1],
                            c * center[2] + s * u[2]});
    }
    case ManifoldKind::MappingTorus: {
      double scale = radius / 7.0;  // feature metric reads offsets at ~2pi their size
      for (int tries = 0;; ++tries) {
        Vec3 cand = reduce(chart, {center[0] + rng.uniform(-scale, scale),
                                   center[1] + rng.uniform(-scale, scale),
                                   center[2] + rng.uniform(-scale, scale)});
        if (chart_distance(chart, center, cand) <= radius) return cand;
        if (tries % 8 == 7) scale *= 0.5;
        if (tries > 400) throw InternalError("ball sampler: mapping-torus proposals exhausted");
      }
    }
  }
  throw InvalidArgumentError("bad chart kind");
}

Vec3 sample_nonsingular_base(const Flow& flow, Rng& rng) {
  for (int tries = 0; tries < 100000; ++tries) {
    Vec3 a = random_chart_point(flow.chart(), rng);
    if (flow.speed_at(a) >= kSpeedFloor) return a;
  }
  throw SingularBaseError("could not sample a base in M*: field is (numerically) singular a.e.");
}

Vec3 rotate(const Vec3& axis_unit, double angle, const Vec3& v) {
  const Vec3& k = axis_unit;
  double c = std::cos(angle), s = std::sin(angle);
  double dot = k[0] * v[0] + k[1] * v[1] + k[2] * v[2];
  Vec3 cross = {k[1] * v[2] - k[2] * v[1], k[2] * v[0] - k[0] * v[2], k[0] * v[1] - k[1] * v[0]};
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = v[i] * c + cross[i] * s + k[i] * dot * (1.0 - c);
  return out;
}

Vec3 unit_axis(const Vec3& axis) {
  double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  if (n < 1e-12) throw InvalidArgumentError("sphere rotation: zero axis");
  return {axis[0] / n, axis[1] / n, axis[2] / n};
}

/** Linear part of the isometry, for the commutation probe X(T p) = dT X(p). */
Vec3 push_vector(const Isometry& iso, const Vec3& v) {
  switch (iso.kind) {
    case IsometryKind::Identity:
    case IsometryKind::TorusTranslation:
      return v;
    case IsometryKind::TorusAxisSwap:
      return {v[1], v[0], v[2]};
    case IsometryKind::SphereRotation:
      return rotate(unit_axis(iso.axis), iso.angle, v);
  }
  throw InvalidArgumentError("bad isometry kind");
}

bool chart_fits(const Isometry& iso, const ChartSpec& chart) {
  switch (iso.kind) {
    case IsometryKind::Identity:
      return true;
    case IsometryKind::TorusTranslation:
      return chart.kind == ManifoldKind::FlatTorus2;
    case IsometryKind::TorusAxisSwap:
      // coordinate swap is only an isometry of a square torus
      return chart.kind == ManifoldKind::FlatTorus2 && chart.side_x == chart.side_y;
    case IsometryKind::SphereRotation:
      return chart.kind == ManifoldKind::Sphere2;
  }
  return false;
}

/** Max discrepancy of X(T p) vs dT X(p) over a probe grid; the pushforward
 *  flow is representable (it IS the flow) exactly when this vanishes. */
double commutation_defect(const Flow& flow, const Isometry& iso) {
  double worst = 0.0;
  for (const ManifoldPoint& p : sample_grid(flow.chart(), 7)) {
    ManifoldPoint tp = apply_isometry(iso, p);
    Vec3 lhs = flow.evaluate_field(tp).first;
    Vec3 rhs = push_vector(iso, flow.evaluate_field(p).first);
    for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(lhs[i] - rhs[i]));
  }
  return worst;
}

}  // namespace

std::string lemma_name(LemmaId id) {
  switch (id) {
    case LemmaId::SpeedComparability: return "speed-comparability";
    case LemmaId::BallInclusion: return "ball-inclusion";
    case LemmaId::ConeBound: return "cone-bound";
    case LemmaId::HalfVariational: return "half-variational";
    case LemmaId::NonsingularEquality: return "nonsingular-equality";
    case LemmaId::ConjugacySmoke: return "conjugacy-smoke";
  }
  throw InvalidArgumentError("bad lemma id");
}

LemmaReport probe_r0_report(const Flow& flow, int trials, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgumentError("probe_r0: trials must be >= 1");
  const ChartSpec& chart = flow.chart();
  Rng master(seed);
  LemmaReport rep;
  rep.lemma_id = LemmaId::SpeedComparability;
  rep.samples = trials;
  for (int rung = 0; rung < kLadderDepth; ++rung) {
    double r = std::ldexp(1.0, -rung);
    Rng rng = master.child(static_cast<std::uint64_t>(rung));
    long violations = 0;
    double margin = kInfinity;
    for (int i = 0; i < trials; ++i) {
      Vec3 a = sample_nonsingular_base(flow, rng);
      double sa = flow.speed_at(a);
      Vec3 b = sample_in_metric_ball(chart, a, r * sa, rng);
      double ratio = flow.speed_at(b) / sa;
      margin = std::min(margin, std::min(ratio - 0.5, 2.0 - ratio));
      if (ratio < 0.5 || ratio > 2.0) ++violations;
    }
    rep.violations = violations;
    rep.worst_margin = margin;
    rep.parameters["r0"] = r;
    if (violations == 0) return rep;
  }
  rep.parameters["flagged"] = 1.0;  // even the smallest rung failed
  return rep;
}

double probe_r0(const Flow& flow, int trials, std::uint64_t seed) {
  return probe_r0_report(flow, trials, seed).parameters.at("r0");
}

LemmaReport check_ball_inclusion(const Flow& flow, const ManifoldPoint& x, double t,
                                 double epsilon, int trials, std::uint64_t seed, double step) {
  if (t <= 0 || epsilon <= 0 || trials < 1)
    throw InvalidArgumentError("ball inclusion: need t > 0, epsilon > 0, trials >= 1");
  if (!(x.chart == flow.chart()))
    throw ChartMismatchError("ball inclusion: base point on the wrong chart");
  double sx = flow.speed_at(x.x);
  if (sx < 1e-9)
    throw SingularBaseError("ball inclusion: base " + describe_point(x) +
                            " is (numerically) singular; the rescaled ball is not defined");

  Trajectory tx = flow.integrate(x, t, step);
  const ChartSpec& chart = flow.chart();
  double quarter = epsilon / 4.0;

  // pool of N ball members gives N(N-1) ordered pairs
  int pool_size = 2;
  while (static_cast<long>(pool_size) * (pool_size - 1) < trials) ++pool_size;

  Rng rng(seed);
  std::vector<Trajectory> pool;
  pool.reserve(pool_size);
  const double top_scale = 0.9 * quarter * sx;
  double scale = top_scale;
  long proposals = 0;
  const long budget = 500L * pool_size;
  while (static_cast<int>(pool.size()) < pool_size) {
    if (++proposals > budget)
      throw SingularBaseError("ball inclusion: rejection sampling exhausted near " +
                              describe_point(x) + "; base too close to the singular set");
    // random-walk through accepted points so thin (strongly expanded) balls
    // are still explored away from the center
    const Vec3& around = (pool.empty() || rng.next_below(4) == 0)
                             ? tx.points[0]
                             : pool[rng.next_below(pool.size())].points[0];
    Vec3 cand = sample_in_metric_ball(chart, around, scale, rng);
    Trajectory tc = flow.integrate(make_point(chart, cand), t, step);
    if (within_rescaled_dt(tx, tc, t, quarter)) {
      pool.push_back(std::move(tc));
      scale = std::min(scale * 1.25, top_scale);
    } else {
      scale *= 0.7;
    }
  }

  struct Pair { std::size_t a, b; };
  std::vector<Pair> pairs;
  pairs.reserve(trials);
  for (std::size_t i = 0; i < pool.size() && pairs.size() < static_cast<std::size_t>(trials); ++i)
    for (std::size_t j = 0; j < pool.size() && pairs.size() < static_cast<std::size_t>(trials); ++j)
      if (i != j) pairs.push_back({i, j});

  std::vector<double> dist(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t k) {
    dist[k] = rescaled_dt_metric(pool[pairs[k].a], pool[pairs[k].b], t);
  });

  LemmaReport rep;
  rep.lemma_id = LemmaId::BallInclusion;
  rep.samples = static_cast<long>(pairs.size());
  rep.worst_margin = kInfinity;
  for (double d : dist) {
    rep.worst_margin = std::min(rep.worst_margin, epsilon - d);
    if (d >= epsilon) ++rep.violations;
  }
  rep.parameters["epsilon"] = epsilon;
  rep.parameters["t"] = t;
  rep.parameters["pool"] = static_cast<double>(pool.size());
  rep.parameters["proposals"] = static_cast<double>(proposals);
  return rep;
}

LemmaReport check_cone_bound(const Flow& flow, int trials, double horizon, double l_factor,
                             std::uint64_t seed, double step) {
  if (trials < 1 || horizon <= 0 || l_factor <= 0)
    throw InvalidArgumentError("cone bound: need trials >= 1, horizon > 0, l_factor > 0");
  FlowSummary summary = flow.summary(64);
  const double L = summary.lipschitz * l_factor;

  Rng master(seed);
  std::vector<Vec3> bases(trials);
  for (int i = 0; i < trials; ++i) {
    Rng rng = master.child(static_cast<std::uint64_t>(i));
    bases[i] = sample_nonsingular_base(flow, rng);
  }

  std::vector<long> counted(trials, 0), violated(trials, 0);
  std::vector<double> margins(trials, kInfinity);
  parallel_for(static_cast<std::size_t>(trials), [&](std::size_t i) {
    Trajectory tr = flow.integrate(make_point(flow.chart(), bases[i]), horizon, step);
    double s0 = tr.speeds[0];
    for (std::size_t k = 1; k < tr.size(); ++k) {  // k = 0 is ratio 1 by definition
      if (tr.speeds[k] < detail::kMinDenominator) break;  // frozen tail is not field data
      double slack = L * tr.times[k] - std::abs(std::log(tr.speeds[k] / s0));
      margins[i] = std::min(margins[i], slack);
      ++counted[i];
      if (slack < 0) ++violated[i];
    }
  });

  LemmaReport rep;
  rep.lemma_id = LemmaId::ConeBound;
  rep.worst_margin = kInfinity;
  for (int i = 0; i < trials; ++i) {
    rep.samples += counted[i];
    rep.violations += violated[i];
    rep.worst_margin = std::min(rep.worst_margin, margins[i]);
  }
  rep.parameters["L"] = L;
  rep.parameters["lipschitz"] = summary.lipschitz;
  rep.parameters["l_factor"] = l_factor;
  rep.parameters["horizon"] = horizon;
  return rep;
}

Isometry Isometry::identity() { return {}; }

Isometry Isometry::torus_translation(double dx, double dy) {
  Isometry iso;
  iso.kind = IsometryKind::TorusTranslation;
  iso.dx = dx;
  iso.dy = dy;
  return iso;
}

Isometry Isometry::torus_axis_swap() {
  Isometry iso;
  iso.kind = IsometryKind::TorusAxisSwap;
  return iso;
}

Isometry Isometry::sphere_rotation(const Vec3& axis, double angle) {
  Isometry iso;
  iso.kind = IsometryKind::SphereRotation;
  iso.axis = axis;
  iso.angle = angle;
  return iso;
}

ManifoldPoint apply_isometry(const Isometry& iso, const ManifoldPoint& p) {
  if (!chart_fits(iso, p.chart))
    throw UnsupportedError("isometry does not act on chart " + p.chart.name());
  switch (iso.kind) {
    case IsometryKind::Identity:
      return p;
    case IsometryKind::TorusTranslation:
      return make_point(p.chart, {p.x[0] + iso.dx, p.x[1] + iso.dy, 0});
    case IsometryKind::TorusAxisSwap:
      return make_point(p.chart, {p.x[1], p.x[0], 0});
    case IsometryKind::SphereRotation:
      return make_point(p.chart, rotate(unit_axis(iso.axis), iso.angle, p.x));
  }
  throw InvalidArgumentError("bad isometry kind");
}

LemmaReport conjugacy_smoke(const Flow& flow, const Isometry& iso, const SmokeConfig& cfg) {
  if (cfg.resolution < 2) throw InvalidArgumentError("conjugacy smoke: resolution too small");
  if (!chart_fits(iso, flow.chart()))
    throw UnsupportedError("conjugacy smoke: isometry does not act on chart " +
                           flow.chart().name());
  double defect = commutation_defect(flow, iso);
  if (defect > 1e-9)
    throw UnsupportedError("conjugacy smoke: isometry does not commute with the field "
                           "(pushforward not representable; probe discrepancy " +
                           std::to_string(defect) + ")");

  std::vector<double> ts = cfg.t_ladder.empty() ? default_t_ladder(flow) : cfg.t_ladder;
  std::vector<double> eps = cfg.eps_ladder.empty() ? default_eps_ladder(flow) : cfg.eps_ladder;

  std::vector<ManifoldPoint> K;
  for (const ManifoldPoint& p : sample_grid(flow.chart(), cfg.resolution))
    if (flow.speed_at(p.x) >= 1e-9) K.push_back(p);  // rescaled counts need M* candidates
  if (K.size() < 2) throw InsufficientDataError("conjugacy smoke: sampled grid left M*");
  std::vector<ManifoldPoint> mapped;
  mapped.reserve(K.size());
  for (const ManifoldPoint& p : K) mapped.push_back(apply_isometry(iso, p));

  double horizon = *std::max_element(ts.begin(), ts.end());
  std::vector<Trajectory> cache = integrate_all(flow, K, horizon, cfg.step, cfg.store_stride);
  std::vector<Trajectory> cache2 = integrate_all(flow, mapped, horizon, cfg.step, cfg.store_stride);

  LemmaReport rep;
  rep.lemma_id = LemmaId::ConjugacySmoke;
  std::vector<CountSample> counts, counts2;
  for (double e : eps)
    for (double t : ts) {
      long c1 = spanning_count(flow, cache, t, e, /*rescaled=*/true, cache).count;
      long c2 = spanning_count(flow, cache2, t, e, /*rescaled=*/true, cache2).count;
      counts.push_back({t, e, c1});
      counts2.push_back({t, e, c2});
      ++rep.samples;
      if (c1 != c2) ++rep.violations;
    }

  EntropyEstimate fit1 = entropy_slope(counts, EntropyMode::RescaledOnK);
  EntropyEstimate fit2 = entropy_slope(counts2, EntropyMode::RescaledOnK);
  double scale = std::max({std::abs(fit1.extrapolated), std::abs(fit2.extrapolated), 1e-12});
  double gap = std::abs(fit1.extrapolated - fit2.extrapolated) / scale;
  if (gap > 0.10) ++rep.violations;

  rep.worst_margin = 0.10 - gap;
  rep.parameters["estar"] = fit1.extrapolated;
  rep.parameters["estar_mapped"] = fit2.extrapolated;
  rep.parameters["estar_gap_rel"] = gap;
  rep.parameters["resolution"] = static_cast<double>(cfg.resolution);
  rep.parameters["points"] = static_cast<double>(K.size());
  return rep;
}

}  // namespace rescal
