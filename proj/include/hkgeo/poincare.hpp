#pragma once

// Closed-form geometry of the Poincare half-plane H^2 = {(x, y) : y > 0}
// with metric (dx^2 + dy^2) / y^2, plus the H^n metric field.

#include "hkgeo/geometry.hpp"

#include <optional>
#include <utility>
#include <variant>

namespace hkgeo {

struct HPoint {
  double x = 0.0;
  double y = 1.0;

  Vector vec() const { return Vector{{x, y}}; }
  static HPoint from(const Vector& v) { return {v[0], v[1]}; }
};

bool operator==(const HPoint& a, const HPoint& b);

/// phi(t) = (a, b * exp(alpha * t))
struct VerticalLine {
  double a;
  double b;
  double alpha;
};

/// phi(t) = (r * tanh(s) + c, r / cosh(s)),  s = alpha * t + t0
struct Semicircle {
  double c;
  double r;
  double alpha;
  double t0;
};

using PoincareGeodesic = std::variant<VerticalLine, Semicircle>;

/// g_ij = delta_ij / x_n^2 on {x_n > 0}, with analytic derivatives.
MetricField hn_metric(int n);

/// Unique geodesic with phi(0) = z1 and phi(tau) = z2. Throws
/// ErrorCode::degenerate when z1 == z2.
PoincareGeodesic geodesic_between(const HPoint& z1, const HPoint& z2, double tau);

/// Geodesic with phi(0) = p and phi'(0) = v. Returns nullopt for v = 0
/// (the constant curve, which is neither family).
std::optional<PoincareGeodesic> geodesic_from_initial(const HPoint& p, const Vector& v);

/// Hyperbolic distance arccosh(1 + ((x2-x1)^2 + (y2-y1)^2) / (2 y1 y2)).
double distance(const HPoint& z1, const HPoint& z2);

/// arccosh(1 + u) for u >= 0 without cancellation near u = 0.
double arccosh1p(double u);

/// Position and velocity at t.
std::pair<HPoint, Vector> geodesic_eval(const PoincareGeodesic& g, double t);

/// Constant speed |alpha| of the geodesic.
double geodesic_speed(const PoincareGeodesic& g);

/// Samples the closed form at n + 1 equally spaced parameters on [0, t_end].
CurvePath sample_geodesic(const PoincareGeodesic& g, double t_end, int n);

}  // namespace hkgeo
