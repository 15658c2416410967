#pragma once

// SABR model:  dF = A F^beta dW,  dA = nu A dZ,  d<W, Z> = rho dt.
// The map (f, a) -> (x, y) with
//   q = int_{f0}^{f} df'/f'^beta,  xi = a / nu,  x = q - rho xi,  y = sqrt(1 - rho^2) xi
// and tau = nu^2 t / 2 turns the generator into y^2 (d_xx + d_yy) + b^x d_x,
// b^x = -C'(f) y^2 / (1 - rho^2), the Ito term of q(F).

#include "hkgeo/heat_kernel.hpp"

#include <utility>

namespace hkgeo {

struct SabrParams {
  double f0 = 1.0;
  double alpha = 0.2;
  double beta = 1.0;
  double nu = 0.3;
  double rho = 0.0;

  /// Throws ErrorCode::invalid_argument when a field is out of range.
  void validate() const;
};

struct PoincareCoords {
  double q;
  double xi;
  double x;
  double y;
};

double q_of_f(const SabrParams& p, double f);
/// Inverse of q_of_f; returns 0 below the absorbing level when beta < 1.
double f_of_q(const SabrParams& p, double q);
double xi_of_a(const SabrParams& p, double a);
PoincareCoords to_poincare(const SabrParams& p, double f, double a);
/// (f, a) from (x, y).
std::pair<double, double> from_poincare(const SabrParams& p, double x, double y);
double tau_of_t(const SabrParams& p, double t);

/// |det d(x, y)/d(f, a)| = sqrt(1 - rho^2) / (nu f^beta).
double jacobian_factor(const SabrParams& p, double f);

/// Drift b of the rescaled generator in (x, y) coordinates.
DriftField sabr_drift(const SabrParams& p);
/// Closed-form A: A_x = -C'(f) / (2 (1 - rho^2)), A_y = 0.
ConnectionA sabr_connection(const SabrParams& p);
/// Closed-form Q = y^2 (A_x^2 + d_x A_x).
ScalarField sabr_q(const SabrParams& p);

/// Transition density of (F_t, A_t) at (f, a) started from (f0, alpha).
class SabrDensity {
 public:
  explicit SabrDensity(const SabrParams& p);

  const SabrParams& params() const noexcept { return p_; }

  /// Heat-kernel terms in the half-plane at tau = nu^2 t / 2.
  HeatKernelTerms terms(double t, double f, double a, int order) const;
  /// Density in (f, a).
  double operator()(double t, double f, double a, int order) const;

 private:
  double log_par(const HPoint& z1, const HPoint& z2) const;

  SabrParams p_;
  HPoint z1_;
  double scalar_;
  ScalarField q_;
};

/// Density mass over the box [f_lo, f_hi] x [a_lo, a_hi] (Gauss-Legendre in log f, log a).
double density_bin_mass(const SabrDensity& density, double t, int order, double f_lo,
                        double f_hi, double a_lo, double a_hi, int nodes = 8);

double transition_density(const SabrParams& p, double t, double f, double a, int order);

struct PriceOptions {
  int n_f = 256;
  int n_a = 128;
  double tail_tolerance = 1e-6;  // relative to f0
};

/// Undiscounted E[(F_T - K)^+] by Gauss-Legendre quadrature of the
/// heat-kernel density on a log grid in (f, a).
double call_price_hk(const SabrParams& p, double K, double T, int order,
                     const PriceOptions& options = {});

/// Total mass of the density over the pricing domain (for diagnostics).
double density_mass(const SabrParams& p, double T, int order, const PriceOptions& options = {});

/// Undiscounted Black call.
double black_call(double f0, double K, double T, double sigma);
double black_vega(double f0, double K, double T, double sigma);

/// sigma with black_call(f0, K, T, sigma) == price. Throws
/// ErrorCode::no_convergence when the price is outside [(f0-K)^+, f0).
double implied_vol_from_price(double f0, double K, double T, double price);

/// Hagan et al. lognormal implied-volatility approximation.
double hagan_vol(const SabrParams& p, double K, double T);

}  // namespace hkgeo
