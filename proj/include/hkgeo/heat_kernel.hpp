#pragma once

// First-order short-time expansion of the heat kernel of
//   D = sum_ij g^{ij} d_i d_j + sum_h b^h d_h
// p(t, x, y) ~ sqrt(det g(y) Van(x, y) / (4 pi t)^n) Par(x, y) exp(-Syn(x, y) / 2t) (a0 + a1 t)
// reported as a density in y with respect to Lebesgue measure.

#include "hkgeo/geometry.hpp"
#include "hkgeo/poincare.hpp"

#include <functional>

namespace hkgeo {

using ScalarField = std::function<double(const Vector&)>;

/// Coefficients A_1..A_n of the (n,1)-connection built from g and b.
struct ConnectionA {
  int dim = 0;
  std::function<Vector(const Vector&)> eval;
  bool identically_zero = false;

  static ConnectionA zero(int dim);
};

struct HeatKernelTerms {
  double t = 0.0;
  Vector z1;
  Vector z2;
  double dist = 0.0;
  double synge = 0.0;
  double van_vleck = 1.0;
  double par = 1.0;
  double a0 = 1.0;
  double a1 = 0.0;
  double prefactor = 0.0;  // sqrt(det g(z2) Van / (4 pi t)^n)
  double leading = 0.0;    // prefactor * par * exp(-synge / 2t)
  double density = 0.0;
  int order = 0;
};

/// dist(z1, z2)^2 / 2 on H^2.
double synge(const HPoint& z1, const HPoint& z2);

/// d / sinh(d) with d the H^2 distance; 1 at d = 0.
double van_vleck_closed(const HPoint& z1, const HPoint& z2);

/// det(-d^2 Syn / dx_i dy_j) / sqrt(det g(x) det g(y)) by mixed central
/// differences of `syn` with steps rel_step * max(1, |x_i|) and twice that,
/// Richardson-combined.
double van_vleck_numeric(const MetricField& metric,
                         const std::function<double(const Vector&, const Vector&)>& syn,
                         const Vector& z1, const Vector& z2, double rel_step);

/// Same, with Syn from geodesic_bvp distances (generic metrics).
double van_vleck_numeric(const MetricField& metric, const Vector& z1, const Vector& z2,
                         const BvpOptions& options = {});

/// Geodesic distance from a boundary-value geodesic on [0, 1].
double bvp_distance(const MetricField& metric, const Vector& z1, const Vector& z2,
                    const BvpOptions& options = {});

/// A_i = 1/2 sum_h g_ih (b^h - (1/sqrt g) sum_k d_k(sqrt g g^{hk})).
/// The divergence term is evaluated as -g^{jk} Gamma^h_jk, which is the same
/// quantity written through the Christoffel symbols.
ConnectionA connection_A(const MetricField& metric, const DriftField& drift);

/// exp(-int_0^t phi'(u) . A(phi(u)) du) along a closed-form geodesic
/// (composite Simpson from 201 nodes, doubled until two passes agree to 1e-10).
double par_factor(const ConnectionA& A, const PoincareGeodesic& geo, double t);

/// Same along a sampled path over its full parameter range.
double par_factor(const ConnectionA& A, const CurvePath& path);

/// Q = sum_ij g^{ij} A_i A_j + (1/sqrt g) sum_i d_i(sqrt g sum_j g^{ij} A_j).
ScalarField q_potential(const MetricField& metric, const ConnectionA& A);

/// a1 on the diagonal: R / 6 - Q at z.
double a1_coeff(const MetricField& metric, const ConnectionA& A, const Vector& z);
double a1_coeff(const MetricField& metric, const ScalarField& Q, const Vector& z);

/// Generic density: distance and Par from geodesic_bvp, Van by mixed
/// differences, a1 at z2. order is 0 or 1.
HeatKernelTerms density(const MetricField& metric, const DriftField& drift, double t,
                        const Vector& z1, const Vector& z2, int order,
                        const BvpOptions& options = {});

/// Density for D = y^2 (d_xx + d_yy) + b on H^2 with closed-form distance,
/// Van and geodesics. A defaults to 0 (b = 0); Q defaults to q_potential of A.
class H2Kernel {
 public:
  H2Kernel();
  H2Kernel(ConnectionA A, ScalarField Q = {});

  HeatKernelTerms operator()(double t, const HPoint& z1, const HPoint& z2, int order) const;

  double scalar_curvature() const noexcept { return scalar_; }
  const ConnectionA& connection() const noexcept { return A_; }
  double q(const HPoint& z) const { return Q_(z.vec()); }

 private:
  MetricField metric_;
  ConnectionA A_;
  ScalarField Q_;
  double scalar_;
};

/// int p(t, z1, z) dx dy over the rectangle x in x1 +- y1 sinh(D),
/// y in [y1 e^-D, y1 e^D] with exp(-D^2 / 4t) = tail.
/// Gauss-Legendre with `nodes` points per axis in (x, log y).
double h2_density_mass(const H2Kernel& kernel, double t, const HPoint& z1, int order,
                       double tail = 1e-4, int nodes = 256);

}  // namespace hkgeo
