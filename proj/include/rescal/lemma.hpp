#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rescal/estimators.hpp"
#include "rescal/flow.hpp"
#include "rescal/geometry.hpp"

namespace rescal {

/**
 * The pointwise facts the estimators lean on, each verified numerically:
 *  - SpeedComparability: a radius r0 > 0 such that d(a,b) <= r0 ||X(a)||
 *    forces (1/2) ||X(a)|| <= ||X(b)|| <= 2 ||X(a)||.
 *  - BallInclusion: B*(x,t,eps/4) sits inside B*(y,t,eps) for every y in it.
 *  - ConeBound: e^{-Ls} <= ||X(phi_s z)|| / ||X(z)|| <= e^{Ls} along orbits.
 *  - HalfVariational / NonsingularEquality: the e*_mu <= e* and |e - e*|
 *    comparisons (reports produced by the experiment runner).
 *  - ConjugacySmoke: isometries commuting with the field preserve counts.
 */
enum class LemmaId {
  SpeedComparability,
  BallInclusion,
  ConeBound,
  HalfVariational,
  NonsingularEquality,
  ConjugacySmoke,
};

std::string lemma_name(LemmaId id);

/** Outcome of one lemma check.  violations == 0 means the property held at
 *  every sample; worst_margin is the tightest slack among the satisfied
 *  inequalities (so a small positive value flags a near-miss). */
struct LemmaReport {
  LemmaId lemma_id = LemmaId::SpeedComparability;
  long samples = 0;
  long violations = 0;
  std::map<std::string, double> parameters;  // named reals: r0, L, epsilon, t, ...
  double worst_margin = 0.0;

  bool passed() const { return violations == 0; }
};

/**
 * Monte-Carlo probe for the speed-comparability radius: walk the ladder
 * {1, 1/2, ..., 2^-10} downward and return the first (largest) r such that
 * `trials` sampled pairs a in M*, b with d(a,b) <= r ||X(a)|| all satisfy the
 * two-sided speed bound.  A probabilistic certificate, not a proof.  If even
 * the smallest rung fails, that rung is returned with parameters["flagged"]=1
 * and the rung's violation count.
 */
LemmaReport probe_r0_report(const Flow& flow, int trials, std::uint64_t seed = 20260814u);
double probe_r0(const Flow& flow, int trials, std::uint64_t seed = 20260814u);

/**
 * Rejection-sample `trials` ordered pairs (y, w) from the rescaled ball
 * B*(x,t,eps/4) and check d*_t(y,w) < eps for each.  Proposals random-walk
 * through accepted points with an adaptive step, so thin balls (strong
 * expansion) stay reachable.  SingularBaseError when x is (numerically)
 * singular or the sampler exhausts its proposal budget near the singular set.
 * Precondition eps < probe_r0 is the caller's: the inclusion is only claimed
 * below the comparability radius.
 */
LemmaReport check_ball_inclusion(const Flow& flow, const ManifoldPoint& x, double t,
                                 double epsilon, int trials, std::uint64_t seed = 20260814u,
                                 double step = 1e-3);

/**
 * Two-sided speed cone: for `trials` random bases z in M*, every stored sample
 * of the orbit through z must satisfy e^{-Ls} <= ||X(phi_s z)||/||X(z)||
 * <= e^{Ls}, with L = flow.summary(64).lipschitz * l_factor.  Margins are in
 * log space (L s - |log ratio|).  Frozen (numerically singular) tails stop the
 * scan rather than fake data.
 */
LemmaReport check_cone_bound(const Flow& flow, int trials, double horizon,
                             double l_factor = 1.05, std::uint64_t seed = 20260814u,
                             double step = 1e-3);

enum class IsometryKind { Identity, TorusTranslation, TorusAxisSwap, SphereRotation };

/** An isometry of the model chart.  Only isometries that commute with the
 *  field give a representable pushforward (the flow itself), which is what
 *  conjugacy_smoke verifies; everything else is UnsupportedError. */
struct Isometry {
  IsometryKind kind = IsometryKind::Identity;
  double dx = 0.0, dy = 0.0;  // TorusTranslation
  Vec3 axis{0, 0, 1};         // SphereRotation
  double angle = 0.0;

  static Isometry identity();
  static Isometry torus_translation(double dx, double dy);
  static Isometry torus_axis_swap();
  static Isometry sphere_rotation(const Vec3& axis, double angle);
};

ManifoldPoint apply_isometry(const Isometry& iso, const ManifoldPoint& p);

struct SmokeConfig {
  int resolution = 10;             // candidate/target grid, per axis
  std::vector<double> t_ladder;    // empty = per-family default
  std::vector<double> eps_ladder;  // empty = per-family default
  double step = 1e-2;
  int store_stride = 10;
};

/**
 * Invariance smoke test: map the sampled candidate/target set through the
 * isometry and recompute every rescaled spanning count from scratch
 * (re-integrated orbits).  Counts must agree exactly cell by cell; the fitted
 * rescaled slopes must agree within 10% relative (trivially tight when all
 * cells match).  UnsupportedError when the isometry fails to commute with the
 * field on a probe grid (the pushforward flow is then not representable) or
 * does not fit the chart.
 */
LemmaReport conjugacy_smoke(const Flow& flow, const Isometry& iso, const SmokeConfig& cfg = {});

}  // namespace rescal
