#include "rescal/measure.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>

#include "cover_detail.hpp"
#include "rescal/errors.hpp"

namespace rescal {

namespace {

constexpr double kSingularSpeed = detail::kMinDenominator;

/**
 * Greedy mass cover over one shared trajectory cache: repeatedly commit the
 * atom ball with the largest uncovered K-mass (ties by lowest index) until
 * the uncovered mass drops strictly below delta.  The selection sequence does
 * not depend on delta, so one pass serves a whole (descending) delta ladder:
 * the report for each delta is the prefix at its crossing.  With equal
 * weights the sequence is the one spanning_count uses, so stopping earlier
 * can only shrink the count.
 */
std::vector<MeasureCoverReport> mass_greedy(const EmpiricalMeasure& mu,
                                            const std::vector<Trajectory>& cache, double t,
                                            double epsilon, const std::vector<double>& deltas,
                                            bool rescaled, const std::vector<char>& in_K) {
  MetricQuery query{t, epsilon, rescaled};
  query.validate();
  for (double d : deltas)
    if (!(d > 0.0 && d < 1.0))
      throw InvalidArgumentError("measure cover: delta must lie in (0, 1)");
  for (std::size_t i = 1; i < deltas.size(); ++i)
    if (!(deltas[i] < deltas[i - 1]))
      throw InvalidArgumentError("measure cover: delta ladder must descend");

  std::size_t n = cache.size();
  std::size_t nsamp = detail::common_samples(cache, cache, t);
  detail::Cloud cloud;
  cloud.build(cache);

  double target_mass = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (in_K[k]) target_mass += mu.weights[k];

  // membership rows over the K atoms; an orbit that leaves M* within [0, t]
  // cannot serve as a ball center but its atoms still carry mass to cover
  std::size_t words = (n + 63) / 64;
  std::vector<std::vector<std::uint64_t>> rows(n, std::vector<std::uint64_t>(words, 0));
  for (std::size_t c = 0; c < n; ++c) {
    try {
      for (std::size_t k = 0; k < n; ++k)
        if (in_K[k] && detail::ball_member(cloud, c, cloud, k, nsamp, epsilon, rescaled))
          rows[c][k / 64] |= 1ull << (k % 64);
    } catch (const SingularBaseError&) {
      std::fill(rows[c].begin(), rows[c].end(), 0ull);
    }
  }

  std::vector<std::uint64_t> uncovered(words, 0);
  for (std::size_t k = 0; k < n; ++k)
    if (in_K[k]) uncovered[k / 64] |= 1ull << (k % 64);
  double uncovered_mass = target_mass;
  auto gain = [&](std::size_t c) {
    double g = 0.0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t bits = rows[c][w] & uncovered[w];
      while (bits) {
        g += mu.weights[w * 64 + static_cast<std::size_t>(std::countr_zero(bits))];
        bits &= bits - 1;
      }
    }
    return g;
  };
  using Entry = std::pair<double, long>;  // (gain, -index)
  std::priority_queue<Entry> heap;
  for (std::size_t c = 0; c < n; ++c) heap.push({gain(c), -static_cast<long>(c)});

  std::vector<MeasureCoverReport> out(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    out[i].query = query;
    out[i].delta = deltas[i];
    out[i].target_mass = target_mass;
  }
  std::vector<ManifoldPoint> witnesses;
  double covered_mass = 0.0;
  std::size_t next = 0;  // first delta whose crossing is still pending
  while (next < deltas.size()) {
    if (uncovered_mass < deltas[next]) {  // prefix for this delta is complete
      out[next].count = static_cast<long>(witnesses.size());
      out[next].witnesses = witnesses;
      out[next].covered_mass = covered_mass;
      ++next;
      continue;
    }
    if (heap.empty())
      throw InfeasibleCoverError("measure cover: candidates exhausted with uncovered mass " +
                                 std::to_string(uncovered_mass) + " >= delta");
    auto [g, negc] = heap.top();
    heap.pop();
    std::size_t c = static_cast<std::size_t>(-negc);
    double fresh = gain(c);
    if (!heap.empty() && (fresh < heap.top().first ||
                          (fresh == heap.top().first && negc < heap.top().second))) {
      heap.push({fresh, negc});
      continue;
    }
    if (!(fresh > 0.0))
      throw InfeasibleCoverError("measure cover: no candidate ball adds mass; uncovered mass " +
                                 std::to_string(uncovered_mass) + " >= delta");
    for (std::size_t w = 0; w < words; ++w) uncovered[w] &= ~rows[c][w];
    uncovered_mass -= fresh;
    covered_mass += fresh;
    witnesses.push_back({cache[c].chart, cache[c].base});
  }
  return out;
}

std::vector<char> atoms_in(const EmpiricalMeasure& mu, const Flow& flow,
                           const std::vector<ManifoldPoint>& K) {
  std::vector<char> in_K(mu.atoms.size(), 1);
  if (K.empty()) return in_K;
  std::fill(in_K.begin(), in_K.end(), 0);
  std::map<std::array<double, 3>, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < mu.atoms.size(); ++i)
    index[{mu.atoms[i].x[0], mu.atoms[i].x[1], mu.atoms[i].x[2]}].push_back(i);
  for (const ManifoldPoint& p : K) {
    if (!(p.chart == flow.chart()))
      throw ChartMismatchError("measure cover: K point on a different chart");
    auto it = index.find({p.x[0], p.x[1], p.x[2]});
    if (it == index.end()) continue;  // not an atom: carries no mass
    for (std::size_t i : it->second) in_K[i] = 1;
  }
  return in_K;
}

}  // namespace

double EmpiricalMeasure::total() const {
  long double s = 0.0L;
  for (double w : weights) s += w;
  return static_cast<double>(s);
}

void EmpiricalMeasure::validate(const Flow& flow) const {
  if (atoms.empty() || atoms.size() != weights.size())
    throw ConstructorInvariantError("empirical measure: atoms and weights must align");
  for (double w : weights)
    if (!(w > 0.0)) throw ConstructorInvariantError("empirical measure: weights must be positive");
  if (std::abs(total() - 1.0) > 1e-12)
    throw ConstructorInvariantError("empirical measure: weights must sum to 1");
  for (const ManifoldPoint& p : atoms)
    if (flow.evaluate_field(p).second < kSingularSpeed)
      throw ConstructorInvariantError("empirical measure: atom on the singular set at " +
                                      detail::describe_point(p));
}

EmpiricalMeasure sample_measure(const Flow& flow, int n) {
  if (n < 1) throw InvalidArgumentError("sample_measure: n must be >= 1");
  int dim = flow.chart().kind == ManifoldKind::MappingTorus ? 3 : 2;
  int res = std::max(1, static_cast<int>(std::llround(std::pow(static_cast<double>(n), 1.0 / dim))));
  EmpiricalMeasure mu;
  for (const ManifoldPoint& p : sample_grid(flow.chart(), res))
    if (flow.speed_at(p.x) >= kSingularSpeed) mu.atoms.push_back(p);
  if (mu.atoms.empty())
    throw SingularBaseError("sample_measure: every grid atom is singular (degenerate measure)");
  mu.weights.assign(mu.atoms.size(), 1.0 / static_cast<double>(mu.atoms.size()));
  return mu;
}

EmpiricalMeasure sample_measure(const Flow& flow, const ManifoldPoint& base, double burn_in,
                                double horizon, int n, double step) {
  if (n < 1) throw InvalidArgumentError("sample_measure: n must be >= 1");
  if (burn_in < 0.0 || !(horizon > 0.0))
    throw InvalidArgumentError("sample_measure: need burn_in >= 0 and horizon > 0");
  Trajectory tr = flow.integrate(base, burn_in + horizon, step);
  EmpiricalMeasure mu;
  for (int k = 0; k < n; ++k) {
    double tau = burn_in + horizon * static_cast<double>(k) / static_cast<double>(n);
    auto i = std::min(tr.points.size() - 1,
                      static_cast<std::size_t>(std::llround(tau / tr.step)));
    if (tr.speeds[i] >= kSingularSpeed) mu.atoms.push_back(tr.point(i));
  }
  if (mu.atoms.empty())
    throw SingularBaseError("sample_measure: every time sample is singular (degenerate measure)");
  mu.weights.assign(mu.atoms.size(), 1.0 / static_cast<double>(mu.atoms.size()));
  return mu;
}

EmpiricalMeasure point_measure(const Flow& flow, const std::vector<ManifoldPoint>& support) {
  if (support.empty()) throw InvalidArgumentError("point_measure: empty support");
  EmpiricalMeasure mu;
  for (const ManifoldPoint& p : support)
    if (flow.evaluate_field(p).second >= kSingularSpeed) mu.atoms.push_back(p);
  if (mu.atoms.empty())
    throw SingularBaseError("point_measure: every support point is singular (degenerate measure)");
  mu.weights.assign(mu.atoms.size(), 1.0 / static_cast<double>(mu.atoms.size()));
  return mu;
}

MeasureCoverReport measure_spanning_count(const Flow& flow, const EmpiricalMeasure& mu, double t,
                                          double epsilon, double delta,
                                          const std::vector<ManifoldPoint>& K, double step,
                                          int store_stride) {
  mu.validate(flow);
  MetricQuery{t, epsilon, true}.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgumentError("measure cover: delta must lie in (0, 1)");
  auto in_K = atoms_in(mu, flow, K);
  auto cache = integrate_all(flow, mu.atoms, t, step, store_stride);
  return mass_greedy(mu, cache, t, epsilon, {delta}, true, in_K).front();
}

MeasureCoverReport classical_measure_count(const Flow& flow, const EmpiricalMeasure& mu, double t,
                                           double epsilon, double delta, double step,
                                           int store_stride) {
  mu.validate(flow);
  MetricQuery{t, epsilon, false}.validate();
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgumentError("measure cover: delta must lie in (0, 1)");
  auto cache = integrate_all(flow, mu.atoms, t, step, store_stride);
  return mass_greedy(mu, cache, t, epsilon, {delta}, false,
                     std::vector<char>(mu.atoms.size(), 1))
      .front();
}

MeasureEntropyEstimate estimate_e_star_mu(const Flow& flow, const EmpiricalMeasure& mu,
                                          const EstimateConfig& config,
                                          const std::vector<double>& delta_ladder) {
  mu.validate(flow);
  if (delta_ladder.empty()) throw InvalidArgumentError("e*_mu: empty delta ladder");
  for (double d : delta_ladder)
    if (!(d > 0.0 && d < 1.0)) throw InvalidArgumentError("e*_mu: deltas must lie in (0, 1)");
  std::vector<double> deltas = delta_ladder;
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());

  EstimateConfig cfg = config;
  if (cfg.t_ladder.empty()) cfg.t_ladder = detail::default_t_ladder(flow);
  if (cfg.eps_ladder.empty()) cfg.eps_ladder = detail::default_eps_ladder(flow);

  double horizon = *std::max_element(cfg.t_ladder.begin(), cfg.t_ladder.end());
  auto cache = integrate_all(flow, mu.atoms, horizon, cfg.step, cfg.store_stride);
  std::vector<char> all(mu.atoms.size(), 1);
  std::map<double, std::size_t> sizes;
  for (double eps : cfg.eps_ladder) sizes[eps] = mu.atoms.size();

  // one greedy pass per (t, eps) serves the whole delta ladder
  std::vector<std::vector<CountSample>> per_delta(deltas.size());
  for (double t : cfg.t_ladder)
    for (double eps : cfg.eps_ladder) {
      auto reps = mass_greedy(mu, cache, t, eps, deltas, true, all);
      for (std::size_t i = 0; i < deltas.size(); ++i)
        per_delta[i].push_back({t, eps, reps[i].count});
    }

  MeasureEntropyEstimate est;
  est.t_min = std::numeric_limits<double>::infinity();
  est.t_max = -est.t_min;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    auto kept = detail::filter_saturated(per_delta[i], cfg.saturation_fraction, sizes);
    if (kept.empty())
      throw InsufficientDataError("e*_mu: every cell saturated at delta = " +
                                  std::to_string(deltas[i]));
    EntropyEstimate sub = entropy_slope(kept, EntropyMode::Rescaled, cfg.residual_threshold);
    for (const SlopeFit& f : sub.per_epsilon) est.per_cell.push_back({deltas[i], f});
    est.extrapolated = sub.extrapolated;  // deltas descend: ends at the smallest
    est.t_min = std::min(est.t_min, sub.t_min);
    est.t_max = std::max(est.t_max, sub.t_max);
  }
  return est;
}

}  // namespace rescal
