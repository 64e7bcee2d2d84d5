#include "rescal/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rescal/rng.hpp"

namespace rescal {

namespace {

double wrap_half(double v, double period) {
  // into [-period/2, period/2)
  double r = std::fmod(v + period / 2.0, period);
  if (r < 0) r += period;
  return r - period / 2.0;
}

double wrap_pos(double v, double period) {
  // into [0, period)
  double r = std::fmod(v, period);
  if (r < 0) r += period;
  return r;
}

Vec3 apply_mat_mod1(const Mat2i& m, double u, double v) {
  double nu = static_cast<double>(m.a) * u + static_cast<double>(m.b) * v;
  double nv = static_cast<double>(m.c) * u + static_cast<double>(m.d) * v;
  return {wrap_pos(nu, 1.0), wrap_pos(nv, 1.0), 0.0};
}

// cos^2 height window supported on (-1/3, 1/3)
double bump3(double x) {
  if (x <= -1.0 / 3.0 || x >= 1.0 / 3.0) return 0.0;
  double c = std::cos(1.5 * M_PI * x);
  return c * c;
}

constexpr int kMtFeatures = 14;

/**
 * Separating feature family for the mapping torus.  Components: the height
 * circle (cos, sin of 2 pi s), and cos/sin of 2 pi u, 2 pi v carried by three
 * height windows centered at 1/3, 2/3 and at the seam.  The seam window blends
 * chars of u (below) with chars of A u (above): b(s) g(u) + b(s-1) g(A u),
 * which is the gluing-equivariance condition, so every component is continuous
 * through (u, 1) ~ (A u, 0).  max_i |F_i(p) - F_i(q)| is then a true metric:
 * triangle inequality holds exactly, and at every height some window >= 1/2
 * exposes pure characters, so points are separated (A unimodular makes the
 * twisted characters separating too).  Character scale: diameter 2, so unit
 * epsilon is a genuinely small ball (a quarter of the section circle).
 */
void mt_features(const Mat2i& A, const Vec3& p, double* f) {
  const double tau = 2.0 * M_PI;
  double u = p[0], v = p[1], s = p[2];
  double ua = static_cast<double>(A.a) * u + static_cast<double>(A.b) * v;
  double va = static_cast<double>(A.c) * u + static_cast<double>(A.d) * v;
  double cu = std::cos(tau * u), su = std::sin(tau * u);
  double cv = std::cos(tau * v), sv = std::sin(tau * v);
  f[0] = std::cos(tau * s);
  f[1] = std::sin(tau * s);
  double b1 = bump3(s - 1.0 / 3.0);
  f[2] = b1 * cu;
  f[3] = b1 * su;
  f[4] = b1 * cv;
  f[5] = b1 * sv;
  double b2 = bump3(s - 2.0 / 3.0);
  f[6] = b2 * cu;
  f[7] = b2 * su;
  f[8] = b2 * cv;
  f[9] = b2 * sv;
  double b0a = bump3(s), b0b = bump3(s - 1.0);
  f[10] = b0a * cu + b0b * std::cos(tau * ua);
  f[11] = b0a * su + b0b * std::sin(tau * ua);
  f[12] = b0a * cv + b0b * std::cos(tau * va);
  f[13] = b0a * sv + b0b * std::sin(tau * va);
}

}  // namespace

Mat2i mat_pow(Mat2i m, int n) {
  Mat2i r;  // identity
  while (n > 0) {
    if (n & 1) r = r * m;
    m = m * m;
    n >>= 1;
  }
  return r;
}

Mat2i mat_inverse_unimodular(const Mat2i& m) {
  std::int64_t det = m.det();
  if (det != 1 && det != -1)
    throw InvalidArgumentError("matrix is not unimodular; |det| = " + std::to_string(std::abs(det)));
  // adj(m)/det with integer det = +-1
  return {det * m.d, det * -m.b, det * -m.c, det * m.a};
}

bool ChartSpec::operator==(const ChartSpec& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case ManifoldKind::FlatTorus2:
      return side_x == o.side_x && side_y == o.side_y;
    case ManifoldKind::Sphere2:
      return true;
    case ManifoldKind::MappingTorus:
      return glue == o.glue;
  }
  return false;
}

std::string ChartSpec::name() const {
  switch (kind) {
    case ManifoldKind::FlatTorus2:
      return "flat-torus(" + std::to_string(side_x) + "x" + std::to_string(side_y) + ")";
    case ManifoldKind::Sphere2:
      return "sphere";
    case ManifoldKind::MappingTorus:
      return "mapping-torus";
  }
  return "?";
}

Vec3 reduce(const ChartSpec& chart, const Vec3& raw) {
  for (double v : raw)
    if (std::isnan(v)) throw InvalidArgumentError("NaN coordinate");
  switch (chart.kind) {
    case ManifoldKind::FlatTorus2:
      return {wrap_half(raw[0], chart.side_x), wrap_pos(raw[1], chart.side_y), 0.0};
    case ManifoldKind::Sphere2: {
      double n = std::sqrt(raw[0] * raw[0] + raw[1] * raw[1] + raw[2] * raw[2]);
      if (!(std::abs(n - 1.0) < 1e-6))
        throw InvalidArgumentError("point is not on the unit sphere (|p| = " + std::to_string(n) + ")");
      return {raw[0] / n, raw[1] / n, raw[2] / n};
    }
    case ManifoldKind::MappingTorus: {
      double u = wrap_pos(raw[0], 1.0), v = wrap_pos(raw[1], 1.0), s = raw[2];
      while (s >= 1.0) {
        Vec3 uv = apply_mat_mod1(chart.glue, u, v);
        u = uv[0];
        v = uv[1];
        s -= 1.0;
      }
      Mat2i inv = mat_inverse_unimodular(chart.glue);
      while (s < 0.0) {
        Vec3 uv = apply_mat_mod1(inv, u, v);
        u = uv[0];
        v = uv[1];
        s += 1.0;
      }
      return {u, v, s};
    }
  }
  throw InvalidArgumentError("bad chart kind");
}

ManifoldPoint make_point(const ChartSpec& chart, const Vec3& raw) {
  return {chart, reduce(chart, raw)};
}

double chart_distance(const ChartSpec& chart, const Vec3& p, const Vec3& q) {
  switch (chart.kind) {
    case ManifoldKind::FlatTorus2: {
      double dx = wrap_half(p[0] - q[0], chart.side_x);
      double dy = wrap_half(p[1] - q[1], chart.side_y);
      return std::sqrt(dx * dx + dy * dy);
    }
    case ManifoldKind::Sphere2: {
      // half-chord form: exact for identical points, no acos cliff near dot = 1
      double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2];
      double half = 0.5 * std::sqrt(dx * dx + dy * dy + dz * dz);
      return 2.0 * std::asin(std::min(1.0, half));
    }
    case ManifoldKind::MappingTorus: {
      double fp[kMtFeatures], fq[kMtFeatures];
      mt_features(chart.glue, p, fp);
      mt_features(chart.glue, q, fq);
      double best = 0.0;
      for (int i = 0; i < kMtFeatures; ++i) best = std::max(best, std::abs(fp[i] - fq[i]));
      return best;
    }
  }
  throw InvalidArgumentError("bad chart kind");
}

double distance(const ManifoldPoint& p, const ManifoldPoint& q) {
  if (!(p.chart == q.chart)) throw ChartMismatchError("distance: points live on different charts");
  return chart_distance(p.chart, p.x, q.x);
}

std::vector<ManifoldPoint> sample_grid(const ChartSpec& chart, int resolution) {
  if (resolution <= 0) throw InvalidArgumentError("sample_grid: resolution must be positive");
  std::vector<ManifoldPoint> out;
  switch (chart.kind) {
    case ManifoldKind::FlatTorus2: {
      out.reserve(static_cast<std::size_t>(resolution) * resolution);
      for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j) {
          double x = -chart.side_x / 2.0 + chart.side_x * i / resolution;
          double y = chart.side_y * j / resolution;
          out.push_back({chart, {x, y, 0.0}});
        }
      return out;
    }
    case ManifoldKind::Sphere2: {
      // Fibonacci set: even area coverage, no two points coincide.
      std::size_t n = static_cast<std::size_t>(resolution) * resolution;
      out.reserve(n);
      const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
      for (std::size_t i = 0; i < n; ++i) {
        double z = 1.0 - (2.0 * i + 1.0) / static_cast<double>(n);
        double phi = 2.0 * M_PI * std::fmod(static_cast<double>(i) * golden, 1.0);
        double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        out.push_back({chart, {r * std::cos(phi), r * std::sin(phi), z}});
      }
      return out;
    }
    case ManifoldKind::MappingTorus: {
      out.reserve(static_cast<std::size_t>(resolution) * resolution * resolution);
      for (int i = 0; i < resolution; ++i)
        for (int j = 0; j < resolution; ++j)
          for (int k = 0; k < resolution; ++k)
            out.push_back({chart,
                           {static_cast<double>(i) / resolution, static_cast<double>(j) / resolution,
                            static_cast<double>(k) / resolution}});
      return out;
    }
  }
  throw InvalidArgumentError("bad chart kind");
}

int chart_feature_dim(const ChartSpec& chart) {
  return chart.kind == ManifoldKind::MappingTorus ? kMtFeatures : 0;
}

void chart_features(const ChartSpec& chart, const Vec3& p, double* out) {
  if (chart.kind != ManifoldKind::MappingTorus)
    throw UnsupportedError("chart features: only the mapping torus uses a feature metric");
  mt_features(chart.glue, p, out);
}

Vec3 random_chart_point(const ChartSpec& chart, Rng& rng) {
  switch (chart.kind) {
    case ManifoldKind::FlatTorus2:
      return {rng.uniform(-chart.side_x / 2, chart.side_x / 2), rng.uniform(0, chart.side_y), 0.0};
    case ManifoldKind::Sphere2: {
      // area-uniform: z uniform, angle uniform
      double z = rng.uniform(-1.0, 1.0);
      double phi = rng.uniform(0.0, 2.0 * M_PI);
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      return {r * std::cos(phi), r * std::sin(phi), z};
    }
    case ManifoldKind::MappingTorus:
      return {rng.next_double(), rng.next_double(), rng.next_double()};
  }
  throw InvalidArgumentError("bad chart kind");
}

double mesh_size(const ChartSpec& chart, const std::vector<ManifoldPoint>& points, int probes,
                 std::uint64_t seed) {
  if (points.empty()) throw InvalidArgumentError("mesh_size: empty point set");
  Rng rng(seed);
  double worst = 0.0;
  for (int i = 0; i < probes; ++i) {
    Vec3 probe = random_chart_point(chart, rng);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : points) best = std::min(best, chart_distance(chart, probe, p.x));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace rescal
