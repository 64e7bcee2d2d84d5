#include "rescal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>

#include "cover_detail.hpp"
#include "rescal/errors.hpp"

namespace rescal {

namespace {

using detail::ball_member;
using detail::Cloud;
using detail::common_samples;
using detail::default_eps_ladder;
using detail::default_t_ladder;
using detail::describe_point;
using detail::filter_saturated;
using detail::kMinDenominator;
using detail::ls_slope;

constexpr double kGrowthMargin = 0.05;
constexpr double kSeparationMargin = 0.01;

/** Pair separation for packing: d*_t >= eps in both argument orders (their
 *  suprema may occur at different samples).  Near-zero denominators count as
 *  separating when the points are at positive distance (the ratio blows up);
 *  coincident singular samples are not decidable and raise. */
bool separated_pair(const Cloud& cloud, std::size_t a, std::size_t b, std::size_t n, double eps) {
  const Trajectory& ta = (*cloud.trs)[a];
  const Trajectory& tb = (*cloud.trs)[b];
  bool sa = false, sb = false;
  for (std::size_t i = n; i-- > 0;) {
    double d = cloud.dist(a, i, cloud, b);
    if ((ta.speeds[i] < kMinDenominator || tb.speeds[i] < kMinDenominator) && d < 1e-9)
      throw SingularBaseError("separating count: coincident near-singular samples");
    sa = sa || d >= eps * ta.speeds[i];
    sb = sb || d >= eps * tb.speeds[i];
    if (sa && sb) return true;
  }
  return false;
}

int default_resolution(const Flow& flow, bool coarse) {
  if (flow.chart().kind == ManifoldKind::MappingTorus) return coarse ? 12 : 16;
  return coarse ? 28 : 40;
}

}  // namespace

std::vector<Trajectory> integrate_all(const Flow& flow, const std::vector<ManifoldPoint>& points,
                                      double horizon, double step, int store_stride) {
  std::vector<Trajectory> out;
  out.reserve(points.size());
  for (const ManifoldPoint& p : points) out.push_back(flow.integrate(p, horizon, step, store_stride));
  return out;
}

CoverReport spanning_count(const Flow& flow, const std::vector<Trajectory>& target, double t,
                           double epsilon, bool rescaled,
                           const std::vector<Trajectory>& candidates) {
  MetricQuery query{t, epsilon, rescaled};
  query.validate();
  if (target.empty()) throw InvalidArgumentError("spanning count: target must be nonempty");
  if (candidates.empty()) throw InvalidArgumentError("spanning count: no candidates");
  if (rescaled)
    for (const Trajectory& tr : candidates)
      if (tr.speeds.front() < kMinDenominator)
        throw InvalidArgumentError("spanning count: rescaled candidates must avoid Sing(X)");

  std::size_t n = common_samples(target, candidates, t);
  Cloud targ;
  targ.build(target);
  Cloud cand_storage;
  const Cloud* cand = &targ;
  if (&candidates != &target) {
    cand_storage.build(candidates);
    cand = &cand_storage;
  }

  std::size_t nt = target.size(), nc = candidates.size();
  std::size_t words = (nt + 63) / 64;
  std::vector<std::vector<std::uint64_t>> rows(nc, std::vector<std::uint64_t>(words, 0));
  std::vector<std::uint64_t> coverable(words, 0);
  for (std::size_t c = 0; c < nc; ++c)
    for (std::size_t k = 0; k < nt; ++k)
      if (ball_member(*cand, c, targ, k, n, epsilon, rescaled)) {
        rows[c][k / 64] |= 1ull << (k % 64);
        coverable[k / 64] |= 1ull << (k % 64);
      }
  for (std::size_t k = 0; k < nt; ++k)
    if (!(coverable[k / 64] >> (k % 64) & 1))
      throw InfeasibleCoverError("spanning count: target point " +
                                 describe_point({target[k].chart, target[k].base}) +
                                 " is not covered by any candidate ball");

  // lazy greedy: cached gains only decrease, so a popped entry that still
  // beats the next one is the true maximizer; ties go to the lowest index
  std::vector<std::uint64_t> uncovered(words, ~0ull);
  if (nt % 64) uncovered[words - 1] = (1ull << (nt % 64)) - 1;
  std::size_t remaining = nt;
  auto gain = [&](std::size_t c) {
    std::uint64_t g = 0;
    for (std::size_t w = 0; w < words; ++w)
      g += static_cast<std::uint64_t>(__builtin_popcountll(rows[c][w] & uncovered[w]));
    return static_cast<long>(g);
  };
  using Entry = std::pair<long, long>;  // (gain, -index)
  std::priority_queue<Entry> heap;
  for (std::size_t c = 0; c < nc; ++c) heap.push({gain(c), -static_cast<long>(c)});

  CoverReport report;
  report.query = query;
  while (remaining > 0) {
    auto [g, negc] = heap.top();
    heap.pop();
    std::size_t c = static_cast<std::size_t>(-negc);
    long fresh = gain(c);
    if (!heap.empty() && (fresh < heap.top().first ||
                          (fresh == heap.top().first && negc < heap.top().second))) {
      heap.push({fresh, negc});
      continue;
    }
    for (std::size_t w = 0; w < words; ++w) {
      remaining -= static_cast<std::size_t>(__builtin_popcountll(rows[c][w] & uncovered[w]));
      uncovered[w] &= ~rows[c][w];
    }
    report.witnesses.push_back({candidates[c].chart, candidates[c].base});
  }
  report.count = static_cast<long>(report.witnesses.size());
  report.target = "sampled target (" + std::to_string(nt) + " points)";
  if (target.front().step > 0.0)  // t = 0 caches carry no motion between samples
    report.diagnostic = discretization_diagnostic(flow.summary(16), target.front().step);
  return report;
}

CoverReport spanning_count(const Flow& flow, const std::vector<ManifoldPoint>& target, double t,
                           double epsilon, bool rescaled,
                           const std::vector<ManifoldPoint>& candidates, double step) {
  MetricQuery{t, epsilon, rescaled}.validate();
  auto targ = integrate_all(flow, target, t, step);
  if (&candidates == &target) return spanning_count(flow, targ, t, epsilon, rescaled, targ);
  auto cand = integrate_all(flow, candidates, t, step);
  return spanning_count(flow, targ, t, epsilon, rescaled, cand);
}

PackReport separating_count(const Flow& flow, const std::vector<Trajectory>& K, double t,
                            double epsilon) {
  (void)flow;
  MetricQuery query{t, epsilon, true};
  query.validate();
  if (K.empty()) throw InvalidArgumentError("separating count: K must be nonempty");
  std::size_t n = common_samples(K, K, t);
  Cloud cloud;
  cloud.build(K);

  PackReport report;
  report.query = query;
  std::vector<std::size_t> kept;
  for (std::size_t q = 0; q < K.size(); ++q) {
    bool ok = true;
    for (std::size_t p : kept)
      if (!separated_pair(cloud, q, p, n, epsilon)) {
        ok = false;
        break;
      }
    if (ok) kept.push_back(q);
  }
  for (std::size_t p : kept) report.witnesses.push_back({K[p].chart, K[p].base});
  report.count = static_cast<long>(kept.size());
  report.target = "sampled K (" + std::to_string(K.size()) + " points)";
  return report;
}

PackReport separating_count(const Flow& flow, const std::vector<ManifoldPoint>& K, double t,
                            double epsilon, double step) {
  auto cache = integrate_all(flow, K, t, step);
  return separating_count(flow, cache, t, epsilon);
}

double ChartAtlas::b() const {
  if (maps.empty()) throw ConstructorInvariantError("atlas: no charts");
  if (!(speed_floor > 0.0)) throw ConstructorInvariantError("atlas: speed floor must be > 0");
  return maps.front().side / (2.0 * speed_floor);
}

ChartAtlas make_translation_atlas(const Flow& flow, const std::vector<ManifoldPoint>& K,
                                  double side, double speed_floor) {
  if (K.empty()) throw InvalidArgumentError("atlas: K must be nonempty");
  if (!(side > 0.0)) throw InvalidArgumentError("atlas: side must be > 0");
  if (!(speed_floor > 0.0)) throw InvalidArgumentError("atlas: speed floor must be > 0");
  const ChartSpec& chart = flow.chart();
  ChartAtlas atlas;
  atlas.speed_floor = speed_floor;
  double lo[3] = {0, 0, 0}, extent[3] = {0, 0, 0};
  if (chart.kind == ManifoldKind::FlatTorus2) {
    atlas.dim = 2;
    atlas.lipschitz_a = std::sqrt(2.0);  // cube max-norm -> flat l2 metric
    lo[0] = -chart.side_x / 2;
    extent[0] = chart.side_x;
    extent[1] = chart.side_y;
  } else if (chart.kind == ManifoldKind::MappingTorus) {
    atlas.dim = 3;
    atlas.lipschitz_a = 4.0;  // feature-metric gradient bound, coarse
    extent[0] = extent[1] = extent[2] = 1.0;
  } else {
    throw UnsupportedError("atlas: translation cubes exist for the flat charts only");
  }
  std::vector<std::array<long, 3>> seen;
  for (const ManifoldPoint& p : K) {
    if (!(p.chart == chart)) throw ChartMismatchError("atlas: K on a different chart");
    if (flow.speed_at(p.x) < speed_floor)
      throw InvalidArgumentError("atlas: K point below the declared speed floor at " +
                                 describe_point(p));
    std::array<long, 3> idx{0, 0, 0};
    for (int c = 0; c < atlas.dim; ++c) {
      long cells = std::max(1L, static_cast<long>(std::ceil(extent[c] / side - 1e-12)));
      long i = static_cast<long>(std::floor((p.x[c] - lo[c]) / side));
      idx[c] = std::min(std::max(i, 0L), cells - 1);
    }
    if (std::find(seen.begin(), seen.end(), idx) == seen.end()) seen.push_back(idx);
  }
  std::sort(seen.begin(), seen.end());
  for (const auto& idx : seen) {
    ChartMap m;
    m.side = side;
    m.origin = {lo[0] + side * static_cast<double>(idx[0]),
                lo[1] + side * static_cast<double>(idx[1]),
                lo[2] + side * static_cast<double>(idx[2])};
    atlas.maps.push_back(m);
  }
  return atlas;
}

CoverReport grid_spanning_set(const Flow& flow, const std::vector<ManifoldPoint>& K, double t,
                              double epsilon, double L, const ChartAtlas& atlas, double step,
                              long max_cardinality) {
  MetricQuery query{t, epsilon, true};
  query.validate();
  if (K.empty()) throw InvalidArgumentError("grid spanning set: K must be nonempty");
  if (L < 0.0) throw InvalidArgumentError("grid spanning set: L must be >= 0");
  double delta = epsilon / (std::exp(2.0 * L * t) * atlas.lipschitz_a * atlas.b());
  long m = std::max(1L, static_cast<long>(std::floor(5.0 / delta)));
  double per_chart = std::pow(static_cast<double>(m), atlas.dim);
  double bound = per_chart * static_cast<double>(atlas.maps.size());
  if (bound > static_cast<double>(max_cardinality))
    throw RangeError("grid spanning set: cardinality bound " + std::to_string(bound) +
                     " exceeds the materialization budget");

  const ChartSpec& chart = flow.chart();
  std::vector<ManifoldPoint> grid;
  grid.reserve(static_cast<std::size_t>(bound));
  for (const ChartMap& map : atlas.maps) {
    std::array<long, 3> ix{0, 0, 0};
    long per_axis[3] = {m, m, atlas.dim == 3 ? m : 1};
    for (ix[0] = 0; ix[0] < per_axis[0]; ++ix[0])
      for (ix[1] = 0; ix[1] < per_axis[1]; ++ix[1])
        for (ix[2] = 0; ix[2] < per_axis[2]; ++ix[2]) {
          Vec3 raw = map.origin;
          for (int c = 0; c < atlas.dim; ++c)
            raw[c] += map.side * (static_cast<double>(ix[c]) + 0.5) / static_cast<double>(m);
          Vec3 red = reduce(chart, raw);
          if (flow.speed_at(red) < 1e-12) continue;  // witnesses must avoid Sing(X)
          grid.push_back({chart, red});
        }
  }
  if (grid.empty()) throw ConstructorInvariantError("grid spanning set: all grid points singular");

  // verify spanning lazily: probe witnesses nearest to each K point first and
  // integrate them on demand (the full grid is rarely needed)
  auto targets = integrate_all(flow, K, t, step);
  std::vector<Trajectory> wtraj(grid.size());
  std::vector<char> have(grid.size(), 0);
  for (std::size_t k = 0; k < K.size(); ++k) {
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(grid.size());
    for (std::size_t w = 0; w < grid.size(); ++w)
      order.push_back({chart_distance(chart, grid[w].x, K[k].x), w});
    std::sort(order.begin(), order.end());
    bool covered = false;
    for (const auto& [d0, w] : order) {
      (void)d0;
      if (!have[w]) {
        wtraj[w] = flow.integrate(grid[w], t, step);
        have[w] = 1;
      }
      if (within_rescaled_dt(wtraj[w], targets[k], t, epsilon)) {
        covered = true;
        break;
      }
    }
    if (!covered)
      throw ConstructorInvariantError(
          "grid spanning set: K point " + describe_point(K[k]) +
          " not covered; the L or A constant underestimates the flow");
  }

  CoverReport report;
  report.count = static_cast<long>(grid.size());
  report.witnesses = std::move(grid);
  report.query = query;
  report.target = "grid construction over " + std::to_string(atlas.maps.size()) + " charts";
  report.diagnostic = discretization_diagnostic(flow.summary(16), step);
  return report;
}

EntropyEstimate entropy_slope(const std::vector<CountSample>& counts, EntropyMode mode,
                              double residual_threshold) {
  if (counts.empty()) throw InsufficientDataError("entropy slope: no counts");
  std::map<double, std::vector<std::pair<double, long>>, std::greater<double>> by_eps;
  for (const CountSample& c : counts) {
    if (c.count < 1) throw InvalidArgumentError("entropy slope: counts must be positive");
    by_eps[c.epsilon].push_back({c.t, c.count});
  }

  EntropyEstimate est;
  est.mode = mode;
  est.t_min = std::numeric_limits<double>::infinity();
  est.t_max = -est.t_min;
  for (auto& [eps, cells] : by_eps) {
    std::sort(cells.begin(), cells.end());
    std::vector<double> ts, logs;
    for (const auto& [t, count] : cells) {
      if (!ts.empty() && ts.back() == t) continue;
      ts.push_back(t);
      logs.push_back(std::log(static_cast<double>(count)));
    }
    if (ts.size() < 3)
      throw InsufficientDataError("entropy slope: need >= 3 distinct t at epsilon = " +
                                  std::to_string(eps));
    SlopeFit fit;
    fit.epsilon = eps;
    fit.points = static_cast<int>(ts.size());
    fit.slope = ls_slope(ts, logs, &fit.residual);
    est.per_epsilon.push_back(fit);
    est.t_min = std::min(est.t_min, ts.front());
    est.t_max = std::max(est.t_max, ts.back());
  }

  // smallest epsilon with an acceptable residual; otherwise the cleanest fit
  const SlopeFit* pick = nullptr;
  for (const SlopeFit& f : est.per_epsilon)
    if (f.residual <= residual_threshold) pick = &f;
  if (!pick)
    pick = &*std::min_element(
        est.per_epsilon.begin(), est.per_epsilon.end(),
        [](const SlopeFit& a, const SlopeFit& b) { return a.residual < b.residual; });
  est.extrapolated = pick->slope;
  return est;
}

namespace {

/** One full counting pass at a given resolution; returns per-epsilon fits. */
std::vector<CountSample> count_pass(const Flow& flow, EntropyMode mode, int resolution,
                                    const std::vector<double>& ts, const std::vector<double>& epss,
                                    const EstimateConfig& cfg) {
  std::vector<CountSample> out;
  double horizon = *std::max_element(ts.begin(), ts.end());
  const bool rescaled = mode != EntropyMode::Classical;
  if (!rescaled) {
    auto grid = sample_grid(flow.chart(), resolution);
    auto cache = integrate_all(flow, grid, horizon, cfg.step, cfg.store_stride);
    for (double t : ts)
      for (double eps : epss) {
        auto rep = spanning_count(flow, cache, t, eps, false, cache);
        out.push_back({t, eps, rep.count});
      }
    return out;
  }
  for (double eps : epss) {
    auto K = sublevel_sample(flow, eps, resolution);
    if (K.size() < 8) continue;  // exhaustion level empty at this scale
    auto cache = integrate_all(flow, K, horizon, cfg.step, cfg.store_stride);
    for (double t : ts) {
      auto rep = spanning_count(flow, cache, t, eps, true, cache);
      out.push_back({t, eps, rep.count});
    }
  }
  return out;
}

}  // namespace

EntropyEstimate estimate_entropy(const Flow& flow, EntropyMode mode, const EstimateConfig& config) {
  if (mode == EntropyMode::RescaledOnK)
    throw UnsupportedError("estimate entropy: RescaledOnK counts come from explicit K runs");
  EstimateConfig cfg = config;
  if (cfg.resolution <= 0) cfg.resolution = default_resolution(flow, false);
  if (cfg.coarse_resolution <= 0) cfg.coarse_resolution = default_resolution(flow, true);
  if (cfg.t_ladder.empty()) cfg.t_ladder = default_t_ladder(flow);
  if (cfg.eps_ladder.empty()) cfg.eps_ladder = default_eps_ladder(flow);

  auto sizes_at = [&](int res) {
    std::map<double, std::size_t> sizes;
    for (double eps : cfg.eps_ladder)
      sizes[eps] = mode == EntropyMode::Classical ? sample_grid(flow.chart(), res).size()
                                                  : sublevel_sample(flow, eps, res).size();
    return sizes;
  };

  auto fine_raw = count_pass(flow, mode, cfg.resolution, cfg.t_ladder, cfg.eps_ladder, cfg);
  auto fine = filter_saturated(fine_raw, cfg.saturation_fraction, sizes_at(cfg.resolution));
  if (fine.empty())
    throw InsufficientDataError("estimate entropy: every cell saturated or degenerate");
  EntropyEstimate est = entropy_slope(fine, mode, cfg.residual_threshold);

  auto coarse_raw =
      count_pass(flow, mode, cfg.coarse_resolution, cfg.t_ladder, cfg.eps_ladder, cfg);
  auto coarse =
      filter_saturated(coarse_raw, cfg.saturation_fraction, sizes_at(cfg.coarse_resolution));
  if (!coarse.empty()) {
    EntropyEstimate cest = entropy_slope(coarse, mode, cfg.residual_threshold);
    for (const SlopeFit& f : est.per_epsilon)
      for (const SlopeFit& c : cest.per_epsilon)
        if (f.epsilon == c.epsilon)
          est.resolution_discrepancy =
              std::max(est.resolution_discrepancy,
                       std::abs(f.slope - c.slope) / std::max(0.05, std::abs(f.slope)));
  }
  return est;
}

Vec3 reference_circle_point(const Flow& flow, double frac) {
  double tau = 2.0 * std::acos(-1.0) * frac;
  switch (flow.id()) {
    case FlowId::TorusItem4:
      return {-0.25, flow.chart().side_y * frac, 0.0};
    case FlowId::SphereEno:
    case FlowId::SphereEnoUnperturbed: {
      double z = flow.id() == FlowId::SphereEno ? -flow.eno_delta() : -0.25;
      double r = std::sqrt(1.0 - z * z);
      return {r * std::cos(tau), r * std::sin(tau), z};
    }
    case FlowId::CatMapSuspension:
      return {frac, 0.0, 0.0};
    case FlowId::ConstantTorus:
    case FlowId::LinearTorus:
      return {0.0, flow.chart().side_y * frac, 0.0};
  }
  throw UnsupportedError("reference circle: unknown family");
}

SeparatingFamily make_doubling_family(const ChartSpec& chart,
                                      const std::function<Vec3(double)>& circle, int n_max,
                                      double t_scale) {
  if (n_max < 1 || n_max > 20) throw InvalidArgumentError("doubling family: n_max out of range");
  if (!(t_scale > 0.0)) throw InvalidArgumentError("doubling family: t scale must be > 0");
  SeparatingFamily fam;
  for (int n = 1; n <= n_max; ++n) {
    fam.t_n.push_back(t_scale * n);
    std::vector<ManifoldPoint> level;
    long card = 1L << n;
    level.reserve(static_cast<std::size_t>(card));
    for (long j = 0; j < card; ++j)
      level.push_back(make_point(chart, circle(static_cast<double>(j) / static_cast<double>(card))));
    fam.E_n.push_back(std::move(level));
  }
  return fam;
}

PositivityReport positivity_certificate(const Flow& flow, const std::vector<ManifoldPoint>& K,
                                        const SeparatingFamily& family, double step,
                                        int store_stride) {
  if (family.t_n.size() != family.E_n.size() || family.t_n.empty())
    throw InvalidArgumentError("positivity certificate: malformed family");
  for (std::size_t i = 1; i < family.t_n.size(); ++i)
    if (!(family.t_n[i] > family.t_n[i - 1]))
      throw InvalidArgumentError("positivity certificate: t_n must increase");

  // E_n must be drawn from K
  for (const auto& level : family.E_n)
    for (const ManifoldPoint& p : level) {
      bool found = false;
      for (const ManifoldPoint& k : K)
        if (chart_distance(p.chart, p.x, k.x) < 1e-7) {
          found = true;
          break;
        }
      if (!found)
        throw InvalidArgumentError("positivity certificate: family point " + describe_point(p) +
                                   " is not in K");
    }

  // integrate each distinct base once, to the last horizon where it appears
  std::map<std::array<double, 3>, std::size_t> index;
  std::vector<Trajectory> cache;
  std::vector<std::vector<std::size_t>> level_idx(family.E_n.size());
  double horizon = family.t_n.back();
  for (std::size_t l = 0; l < family.E_n.size(); ++l)
    for (const ManifoldPoint& p : family.E_n[l]) {
      std::array<double, 3> key{p.x[0], p.x[1], p.x[2]};
      auto [it, inserted] = index.insert({key, cache.size()});
      if (inserted) cache.push_back(flow.integrate(p, horizon, step, store_stride));
      level_idx[l].push_back(it->second);
    }
  for (const Trajectory& tr : cache)
    for (double s : tr.speeds)
      if (s < kMinDenominator)
        throw SingularBaseError("positivity certificate: family orbit reaches Sing(X)");

  Cloud cloud;
  cloud.build(cache);

  std::vector<double> ts, logs;
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < family.E_n.size(); ++l) {
    ts.push_back(family.t_n[l]);
    logs.push_back(std::log(static_cast<double>(family.E_n[l].size())));
    std::size_t n = cache.front().samples_through(family.t_n[l]);
    const auto& idx = level_idx[l];
    for (std::size_t a = 0; a + 1 < idx.size(); ++a)
      for (std::size_t b = a + 1; b < idx.size(); ++b) {
        double supa = 0, supb = 0;
        const Trajectory& ta = cache[idx[a]];
        const Trajectory& tb = cache[idx[b]];
        for (std::size_t i = n; i-- > 0;) {
          double d = cloud.dist(idx[a], i, cloud, idx[b]);
          supa = std::max(supa, d / ta.speeds[i]);
          supb = std::max(supb, d / tb.speeds[i]);
          if (supa >= min_sep && supb >= min_sep) break;  // cannot lower the min
        }
        min_sep = std::min(min_sep, std::min(supa, supb));
      }
  }

  PositivityReport rep;
  rep.growth = family.t_n.size() >= 2 ? ls_slope(ts, logs, nullptr)
                                      : logs.front() / ts.front();
  rep.min_separation = min_sep;
  rep.verdict = rep.growth >= kGrowthMargin && rep.min_separation >= kSeparationMargin;
  return rep;
}

}  // namespace rescal
