#include "rescal/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rescal {

namespace {

constexpr double kFreezeSpeed = 1e-14;

double wrap_x4(double x) {
  // into [-2, 2); in-range values pass through bit-exact (the +2/-2 shift
  // below can cost an ulp, which matters at the profile zeros)
  if (x >= -2.0 && x < 2.0) return x;
  double r = std::fmod(x + 2.0, 4.0);
  if (r < 0) r += 4.0;
  return r - 2.0;
}

double g_bump(double t) { return t <= 0.0 ? 0.0 : std::exp(-1.0 / t); }

// C-infinity monotone step on [0,1] (all derivatives vanish at both ends)
double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double g = g_bump(t), h = g_bump(1.0 - t);
  return g / (g + h);
}

double smoothstep_prime(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double g = g_bump(t), h = g_bump(1.0 - t);
  double gp = g / (t * t), hp = h / ((1.0 - t) * (1.0 - t));
  double s = g + h;
  return (gp * h + g * hp) / (s * s);
}

struct Val {
  double v = 0.0, d = 0.0;  // value, derivative
};

/** Blend the analytic continuations of the two neighbouring pieces over
 *  [x0, x1]; matches value and all derivatives at the endpoints, and stays a
 *  convex combination (so it preserves a shared sign of the pieces). */
Val blend(double x, double x0, double x1, const Val& l, const Val& r) {
  double w = x1 - x0;
  double tau = (x - x0) / w;
  double s = smoothstep(tau);
  double sp = smoothstep_prime(tau) / w;
  return {(1.0 - s) * l.v + s * r.v, (1.0 - s) * l.d + s * r.d + sp * (r.v - l.v)};
}

Val rho_item4_val(double x) {
  x = wrap_x4(x);
  if (x <= -1.0) return {1.0, 0.0};
  if (x < -0.25) return blend(x, -1.0, -0.25, {1.0, 0.0}, {-x, -1.0});
  if (x <= 0.25) return {-x, -1.0};
  if (x < 7.0 / 12.0) return blend(x, 0.25, 7.0 / 12.0, {-x, -1.0}, {x - 2.0 / 3.0, 1.0});
  if (x <= 0.75) return {x - 2.0 / 3.0, 1.0};
  if (x < 1.0) return blend(x, 0.75, 1.0, {x - 2.0 / 3.0, 1.0}, {1.0, 0.0});
  return {1.0, 0.0};
}

Val rho0_val(double z) {
  double u = 1.0 - z * z;
  if (u <= 0.0) return {0.0, 0.0};
  double e = std::exp(-1.0 / u);
  return {u * e, -2.0 * z * e * (1.0 + 1.0 / u)};
}

Val rho_eno_val(double z, double a, double b, double w, double sa, double sb) {
  double c1 = b - 3 * w, c2 = b - w, c3 = b + w, c4 = a - w, c5 = a + w, c6 = a + 3 * w;
  Val lb{sb * (z - b), sb}, la{sa * (z - a), sa};
  if (z <= c1) return rho0_val(z);
  if (z < c2) return blend(z, c1, c2, rho0_val(z), lb);
  if (z <= c3) return lb;
  if (z < c4) return blend(z, c3, c4, lb, la);
  if (z <= c5) return la;
  if (z < c6) return blend(z, c5, c6, la, rho0_val(z));
  return rho0_val(z);
}

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

/** log of the spectral radius of a unimodular integer matrix (0 if elliptic). */
double expansion_rate(const Mat2i& m) {
  double tr = static_cast<double>(m.a + m.d);
  double disc = tr * tr - 4.0 * static_cast<double>(m.det());
  if (disc <= 0.0) return 0.0;  // complex eigenvalues of modulus 1
  double lam = (std::abs(tr) + std::sqrt(disc)) / 2.0;
  return lam > 1.0 ? std::log(lam) : 0.0;
}

}  // namespace

std::size_t Trajectory::samples_through(double t) const {
  if (times.empty()) throw RangeError("samples_through: empty trajectory");
  if (t < 0.0) throw RangeError("samples_through: negative time");
  if (t > horizon() + 0.5 * step + 1e-12)
    throw RangeError("samples_through: t = " + std::to_string(t) + " beyond cached horizon " +
                     std::to_string(horizon()));
  if (step <= 0.0) return 1;
  auto k = static_cast<std::size_t>(std::floor(t / step + 1e-9)) + 1;
  return std::min(k, times.size());
}

Flow Flow::constant_torus(double vx, double vy) {
  if (vx == 0.0 && vy == 0.0)
    throw ConstructorInvariantError("constant_torus: zero velocity vector");
  Flow f;
  f.id_ = FlowId::ConstantTorus;
  f.chart_ = ChartSpec::flat_torus(4, 4);
  f.name_ = "constant-torus";
  f.nonsingular_ = true;
  f.vx_ = vx;
  f.vy_ = vy;
  return f;
}

Flow Flow::linear_torus(double ax, double ay) {
  if (ax == 0.0 && ay == 0.0) throw ConstructorInvariantError("linear_torus: zero rotation vector");
  Flow f;
  f.id_ = FlowId::LinearTorus;
  f.chart_ = ChartSpec::flat_torus(4, 4);
  f.name_ = "linear-torus";
  f.nonsingular_ = true;
  f.vx_ = ax;
  f.vy_ = ay;
  return f;
}

Flow Flow::torus_item4() {
  Flow f;
  f.id_ = FlowId::TorusItem4;
  f.chart_ = ChartSpec::flat_torus(4, 4);
  f.name_ = "torus-item4";
  f.nonsingular_ = false;
  return f;
}

Flow Flow::sphere_eno() { return sphere_eno(-0.3, -0.7, 0.05, 0.5, -0.5); }

Flow Flow::sphere_eno(double a, double b, double w, double sa, double sb) {
  if (!(w > 0.0) || !(b < a) || !(a < 0.0) || !(a + w < 0.0))
    throw ConstructorInvariantError("sphere_eno: need b < a < 0, w > 0, a + w < 0");
  if (!(b - 3 * w > -1.0) || !(a - w > b + w) || !(a + 3 * w < 1.0))
    throw ConstructorInvariantError("sphere_eno: windows overlap or leave [-1, 1]");
  if (!(sa > 0.0) || !(sb < 0.0))
    throw ConstructorInvariantError("sphere_eno: need sa > 0 and sb < 0 (sign pattern of rho)");
  Flow f;
  f.id_ = FlowId::SphereEno;
  f.chart_ = ChartSpec::sphere();
  f.name_ = "sphere-eno";
  f.nonsingular_ = false;
  f.a_ = a;
  f.b_ = b;
  f.w_ = w;
  f.sa_ = sa;
  f.sb_ = sb;
  return f;
}

Flow Flow::sphere_eno_unperturbed() {
  Flow f;
  f.id_ = FlowId::SphereEnoUnperturbed;
  f.chart_ = ChartSpec::sphere();
  f.name_ = "sphere-eno-unperturbed";
  f.nonsingular_ = false;
  return f;
}

Flow Flow::cat_map_suspension() { return cat_map_suspension(Mat2i{2, 1, 1, 1}); }

Flow Flow::cat_map_suspension(const Mat2i& A) {
  if (A.det() != 1 && A.det() != -1)
    throw ConstructorInvariantError("cat_map_suspension: matrix must be unimodular");
  Flow f;
  f.id_ = FlowId::CatMapSuspension;
  f.chart_ = ChartSpec::mapping_torus(A);
  f.name_ = "cat-map-suspension";
  f.nonsingular_ = true;
  f.A_ = A;
  return f;
}

const std::vector<Flow>& Flow::builtins() {
  static const std::vector<Flow> flows = {
      constant_torus(1.0, 0.0),
      linear_torus(1.0, 0.6180339887498949),  // golden-ratio rotation vector
      torus_item4(),
      sphere_eno(),
      sphere_eno_unperturbed(),
      cat_map_suspension(),
  };
  return flows;
}

Flow Flow::by_name(const std::string& name) {
  for (const Flow& f : builtins())
    if (f.name() == name) return f;
  std::string known;
  for (const Flow& f : builtins()) known += (known.empty() ? "" : ", ") + f.name();
  throw InvalidArgumentError("unknown flow '" + name + "' (known: " + known + ")");
}

double Flow::rho(double coord) const {
  switch (id_) {
    case FlowId::TorusItem4:
      return rho_item4_val(coord).v;
    case FlowId::SphereEno:
      return rho_eno_val(coord, a_, b_, w_, sa_, sb_).v;
    case FlowId::SphereEnoUnperturbed:
      return rho0_val(coord).v;
    default:
      throw UnsupportedError("rho: flow family has no radial profile");
  }
}

double Flow::rho_prime(double coord) const {
  switch (id_) {
    case FlowId::TorusItem4:
      return rho_item4_val(coord).d;
    case FlowId::SphereEno:
      return rho_eno_val(coord, a_, b_, w_, sa_, sb_).d;
    case FlowId::SphereEnoUnperturbed:
      return rho0_val(coord).d;
    default:
      throw UnsupportedError("rho_prime: flow family has no radial profile");
  }
}

double Flow::eno_gamma() const {
  if (id_ != FlowId::SphereEno) throw UnsupportedError("eno_gamma: not a perturbed sphere flow");
  return sa_ * (1.0 - a_ * a_);
}

double Flow::eno_delta() const {
  if (id_ != FlowId::SphereEno) throw UnsupportedError("eno_delta: not a perturbed sphere flow");
  return -(a_ + w_);
}

double Flow::eno_kappa() const {
  if (id_ != FlowId::SphereEno) throw UnsupportedError("eno_kappa: not a perturbed sphere flow");
  double zk = a_ + w_;
  return sa_ * w_ * std::sqrt(1.0 - zk * zk);
}

Vec3 Flow::field_raw(const Vec3& x) const {
  switch (id_) {
    case FlowId::ConstantTorus:
    case FlowId::LinearTorus:
      return {vx_, vy_, 0.0};
    case FlowId::TorusItem4:
      return {rho_item4_val(x[0]).v, 0.0, 0.0};
    case FlowId::SphereEno:
    case FlowId::SphereEnoUnperturbed: {
      double r = (id_ == FlowId::SphereEno) ? rho_eno_val(x[2], a_, b_, w_, sa_, sb_).v
                                            : rho0_val(x[2]).v;
      return {r * x[0] * x[2], r * x[1] * x[2], -r * (x[0] * x[0] + x[1] * x[1])};
    }
    case FlowId::CatMapSuspension:
      return {0.0, 0.0, 1.0};
  }
  throw InvalidArgumentError("bad flow id");
}

std::pair<Vec3, double> Flow::evaluate_field(const ManifoldPoint& p) const {
  if (!(p.chart == chart_)) throw ChartMismatchError("evaluate_field: point on a different chart");
  Vec3 v = field_raw(p.x);
  return {v, norm3(v)};
}

double Flow::speed_at(const Vec3& reduced) const { return norm3(field_raw(reduced)); }

Trajectory Flow::integrate(const ManifoldPoint& p, double horizon, double step,
                            int store_stride) const {
  if (!(p.chart == chart_)) throw ChartMismatchError("integrate: point on a different chart");
  if (!(step > 0.0)) throw InvalidArgumentError("integrate: step must be positive");
  if (horizon < 0.0) throw InvalidArgumentError("integrate: negative horizon");
  if (store_stride < 1) throw InvalidArgumentError("integrate: store stride must be >= 1");
  Vec3 x = reduce(chart_, p.x);
  std::size_t stride = static_cast<std::size_t>(store_stride);
  std::size_t n = 0;
  if (horizon > 0.0) {
    // integrate at the fine step but keep every stride-th sample; round the
    // step count up to a stride multiple so the final sample lands on horizon
    std::size_t blocks =
        static_cast<std::size_t>(std::ceil(horizon / (step * static_cast<double>(stride)) - 1e-12));
    n = std::max<std::size_t>(1, blocks) * stride;
  }
  double h = n > 0 ? horizon / static_cast<double>(n) : 0.0;

  Trajectory tr;
  tr.chart = chart_;
  tr.base = x;
  tr.step = h * static_cast<double>(stride);
  tr.times.reserve(n / stride + 1);
  tr.points.reserve(n / stride + 1);
  tr.speeds.reserve(n / stride + 1);

  bool frozen = false;
  for (std::size_t i = 0;; ++i) {
    if (i % stride == 0) {
      tr.times.push_back(static_cast<double>(i) * h);
      tr.points.push_back(x);
      tr.speeds.push_back(speed_at(x));
    }
    if (i == n) break;
    double speed = speed_at(x);
    if (speed < kFreezeSpeed) frozen = true;  // numerically an equilibrium
    if (!frozen) {
      Vec3 k1 = field_raw(x);
      Vec3 y{x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1], x[2] + 0.5 * h * k1[2]};
      Vec3 k2 = field_raw(y);
      y = {x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1], x[2] + 0.5 * h * k2[2]};
      Vec3 k3 = field_raw(y);
      y = {x[0] + h * k3[0], x[1] + h * k3[1], x[2] + h * k3[2]};
      Vec3 k4 = field_raw(y);
      for (int c = 0; c < 3; ++c)
        x[c] += h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
      for (int c = 0; c < 3; ++c)
        if (!std::isfinite(x[c]))
          throw IntegrationError("non-finite state at t = " +
                                 std::to_string(static_cast<double>(i + 1) * h));
      if (chart_.kind == ManifoldKind::Sphere2) {
        double nn = norm3(x);
        x = {x[0] / nn, x[1] / nn, x[2] / nn};
      } else {
        x = reduce(chart_, x);
      }
    }
  }
  return tr;
}

FlowSummary Flow::summary(int resolution) const {
  if (resolution < 1) throw InvalidArgumentError("summary: resolution must be >= 1");
  FlowSummary out;
  out.inf_speed = std::numeric_limits<double>::infinity();

  // Nested cascade resolution, resolution/2, ... keeps the estimates monotone
  // along doubling ladders even where grids themselves are not nested (sphere).
  for (int r = resolution; r >= 1; r /= 2) {
    for (const ManifoldPoint& p : sample_grid(chart_, r)) {
      double s = speed_at(p.x);
      out.sup_speed = std::max(out.sup_speed, s);
      out.inf_speed = std::min(out.inf_speed, s);
    }
  }

  // The Jacobian norm of each profile family depends only on the profile
  // coordinate (x on the torus, z on the sphere; on the sphere x^2 + y^2 is
  // pinned to 1 - z^2), so the Lipschitz probe spends its resolution^2 budget
  // on a dense 1-D scan; midpoint grids, same dyadic union, still monotone.
  if (id_ == FlowId::TorusItem4 || id_ == FlowId::SphereEno ||
      id_ == FlowId::SphereEnoUnperturbed) {
    double lo = (id_ == FlowId::TorusItem4) ? -2.0 : -1.0;
    double hi = (id_ == FlowId::TorusItem4) ? 2.0 : 1.0;
    for (long r = resolution; r >= 1; r /= 2) {
      long n = r * r;
      for (long i = 0; i < n; ++i) {
        double c = lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        double jac;
        if (id_ == FlowId::TorusItem4) {
          jac = std::abs(rho_item4_val(c).d);
        } else {
          Val rv = (id_ == FlowId::SphereEno) ? rho_eno_val(c, a_, b_, w_, sa_, sb_)
                                              : rho0_val(c);
          double rr = rv.v, rp = rv.d, q = 1.0 - c * c;
          double fz = rp * c + rr;  // d/dz of the horizontal components, per unit x or y
          double frob2 = 2.0 * rr * rr * c * c + q * fz * fz + 4.0 * rr * rr * q +
                         rp * rp * q * q;
          jac = std::sqrt(frob2);  // Frobenius norm >= operator norm
        }
        out.lipschitz = std::max(out.lipschitz, jac);
      }
    }
  }

  // Families with declared singular sets: m(X) = 0 is the analytic value (the
  // grid only approaches it); the chart-constant suspension field's Lipschitz
  // constant in the twisted metric is the expansion rate of the gluing map.
  if (!nonsingular_) out.inf_speed = 0.0;
  if (id_ == FlowId::CatMapSuspension) out.lipschitz = expansion_rate(A_);

  switch (id_) {
    case FlowId::ConstantTorus:
    case FlowId::LinearTorus:
    case FlowId::CatMapSuspension:
      out.singular_set = "empty (nonsingular)";
      break;
    case FlowId::TorusItem4:
      out.singular_set = "two circles x in {0, 2/3}";
      break;
    case FlowId::SphereEno:
      out.singular_set = "poles and latitudes z in {b, a}";
      break;
    case FlowId::SphereEnoUnperturbed:
      out.singular_set = "poles z = +-1";
      break;
  }
  return out;
}

}  // namespace rescal
