#include "hkgeo/poincare.hpp"

#include "hkgeo/error.hpp"

#include <cmath>

namespace hkgeo {

bool operator==(const HPoint& a, const HPoint& b) { return a.x == b.x && a.y == b.y; }

namespace {

void check_point(const HPoint& z, const char* where) {
  if (!std::isfinite(z.x) || !std::isfinite(z.y))
    fail(ErrorCode::invalid_argument, std::string(where) + ": non-finite point");
  if (!(z.y > 0.0)) fail(ErrorCode::domain, std::string(where) + ": y must be > 0");
}

}  // namespace

MetricField hn_metric(int n) {
  if (n < 2) fail(ErrorCode::invalid_argument, "hn_metric: n must be >= 2");
  auto eval = [n](const Vector& x) -> Matrix {
    const double y = x[n - 1];
    return Matrix::Identity(n, n) / (y * y);
  };
  auto domain = [n](const Vector& x) { return x[n - 1] > 0.0; };
  auto deriv = [n](const Vector& x) {
    const double y = x[n - 1];
    std::vector<Matrix> d(n, Matrix::Zero(n, n));
    d[n - 1] = Matrix::Identity(n, n) * (-2.0 / (y * y * y));
    return d;
  };
  return MetricField(n, eval, domain, deriv);
}

PoincareGeodesic geodesic_between(const HPoint& z1, const HPoint& z2, double tau) {
  check_point(z1, "geodesic_between");
  check_point(z2, "geodesic_between");
  if (!(tau > 0.0) || !std::isfinite(tau))
    fail(ErrorCode::invalid_argument, "geodesic_between: tau must be > 0");
  if (z1 == z2) fail(ErrorCode::degenerate, "geodesic_between: coincident endpoints");

  const double eps_vert = 1e-12 * (1.0 + std::abs(z1.x) + std::abs(z2.x));
  if (std::abs(z2.x - z1.x) <= eps_vert)
    return VerticalLine{z1.x, z1.y, std::log(z2.y / z1.y) / tau};

  const double c = (z2.x * z2.x - z1.x * z1.x + z2.y * z2.y - z1.y * z1.y) / (2.0 * (z2.x - z1.x));
  const double r = std::hypot(z1.x - c, z1.y);
  // sinh(s) = (x - c) / y on the circle, so the parameter at each endpoint is explicit.
  const double s1 = std::asinh((z1.x - c) / z1.y);
  const double s2 = std::asinh((z2.x - c) / z2.y);
  return Semicircle{c, r, (s2 - s1) / tau, s1};
}

std::optional<PoincareGeodesic> geodesic_from_initial(const HPoint& p, const Vector& v) {
  check_point(p, "geodesic_from_initial");
  if (v.size() != 2 || !v.allFinite())
    fail(ErrorCode::invalid_argument, "geodesic_from_initial: velocity must be a finite 2-vector");
  if (v[0] == 0.0 && v[1] == 0.0) return std::nullopt;
  if (v[0] == 0.0) return VerticalLine{p.x, p.y, v[1] / p.y};

  const double v1 = v[0], v2 = v[1];
  const double c = p.x + p.y * v2 / v1;
  const double r = p.y * std::sqrt((v1 * v1 + v2 * v2) / (v1 * v1));
  const double alpha = std::copysign(std::hypot(v1, v2) / p.y, v1);
  return Semicircle{c, r, alpha, std::asinh(-v2 / v1)};
}

double arccosh1p(double u) {
  if (u < 0.0) u = 0.0;
  if (u < 1e-8) return std::sqrt(2.0 * u) * (1.0 - u / 12.0 + 3.0 * u * u / 160.0);
  return std::log1p(u + std::sqrt(u * (u + 2.0)));
}

double distance(const HPoint& z1, const HPoint& z2) {
  check_point(z1, "distance");
  check_point(z2, "distance");
  const double dx = z2.x - z1.x;
  const double dy = z2.y - z1.y;
  return arccosh1p((dx * dx + dy * dy) / (2.0 * (z1.y * z2.y)));
}

std::pair<HPoint, Vector> geodesic_eval(const PoincareGeodesic& g, double t) {
  if (const auto* v = std::get_if<VerticalLine>(&g)) {
    const double y = v->b * std::exp(v->alpha * t);
    return {{v->a, y}, Vector{{0.0, v->alpha * y}}};
  }
  const auto& s = std::get<Semicircle>(g);
  const double u = s.alpha * t + s.t0;
  const double th = std::tanh(u);
  const double sech = 1.0 / std::cosh(u);
  return {{s.r * th + s.c, s.r * sech},
          Vector{{s.r * s.alpha * sech * sech, -s.r * s.alpha * th * sech}}};
}

double geodesic_speed(const PoincareGeodesic& g) {
  return std::visit([](const auto& k) { return std::abs(k.alpha); }, g);
}

CurvePath sample_geodesic(const PoincareGeodesic& g, double t_end, int n) {
  if (n < 1 || !(t_end > 0.0))
    fail(ErrorCode::invalid_argument, "sample_geodesic: need n >= 1 and t_end > 0");
  std::vector<PathSample> samples;
  samples.reserve(n + 1);
  for (int i = 0; i <= n; ++i) {
    const double t = (i == n) ? t_end : t_end * i / n;
    auto [p, v] = geodesic_eval(g, t);
    samples.push_back({t, p.vec(), v});
  }
  return CurvePath(std::move(samples));
}

}  // namespace hkgeo
