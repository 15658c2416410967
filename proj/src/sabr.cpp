#include "hkgeo/sabr.hpp"

#include "hkgeo/error.hpp"
#include "hkgeo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <sstream>
#include <variant>

namespace hkgeo {

namespace {

constexpr double kPi = std::numbers::pi;

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double norm_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v))
    fail(ErrorCode::invalid_argument, std::string(what) + " must be finite and > 0");
}

// C'(f) and C''(f) for C(f) = f^beta.
double c_prime(const SabrParams& p, double f) {
  if (p.beta == 0.0) return 0.0;
  if (p.beta == 1.0) return 1.0;
  return p.beta * std::pow(f, p.beta - 1.0);
}

double c_second(const SabrParams& p, double f) {
  if (p.beta == 0.0 || p.beta == 1.0) return 0.0;
  return p.beta * (p.beta - 1.0) * std::pow(f, p.beta - 2.0);
}

double a_x(const SabrParams& p, double f) { return -c_prime(p, f) / (2.0 * (1.0 - p.rho * p.rho)); }

// f at a half-plane point; xi = y / sqrt(1 - rho^2), q = x + rho xi.
double f_at(const SabrParams& p, double x, double y) {
  return f_of_q(p, x + p.rho * y / std::sqrt(1.0 - p.rho * p.rho));
}

double q_closed(const SabrParams& p, double x, double y) {
  const double f = f_at(p, x, y);
  const double ax = a_x(p, f);
  // d_x A_x = dA_x/df * df/dq, df/dq = C(f)
  const double dax = -c_second(p, f) * std::pow(f, p.beta) / (2.0 * (1.0 - p.rho * p.rho));
  return y * y * (ax * ax + dax);
}

// 16-point Gauss-Legendre on [a, b], bisected until the halves agree with the whole.
template <class F>
double adaptive_gl(F& f, double a, double b, double tol, int depth) {
  const auto& gl = quad::gauss_legendre(16);
  auto rule = [&](double lo, double hi) {
    const double m = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) s += gl.weights[i] * f(m + h * gl.nodes[i]);
    return h * s;
  };
  const double whole = rule(a, b);
  const double m = 0.5 * (a + b);
  const double left = rule(a, m), right = rule(m, b);
  if (depth <= 0 || std::abs(left + right - whole) <= tol * (1.0 + std::abs(left + right)))
    return left + right;
  return adaptive_gl(f, a, m, tol, depth - 1) + adaptive_gl(f, m, b, tol, depth - 1);
}

constexpr double kAbsorbFloor = 1e-6;

struct Box {
  double f_lo, f_hi, a_lo, a_hi;
};

// Bounding box in (f, a) of the hyperbolic ball of radius D around (f0, alpha),
// with D grown until f_hi * exp(-D^2 / 4 tau) < tol * f0.
Box pricing_box(const SabrParams& p, double T, double tol) {
  const double tau = tau_of_t(p, T);
  const PoincareCoords z1 = to_poincare(p, p.f0, p.alpha);
  const double s = std::sqrt(1.0 - p.rho * p.rho);
  double D = std::sqrt(4.0 * tau * std::log(1.0 / tol));
  for (int iter = 0; iter < 400; ++iter, D *= 1.05) {
    const double half_width = z1.y * std::sinh(D);
    const double xi_lo = z1.y * std::exp(-D) / s;
    const double xi_hi = z1.y * std::exp(D) / s;
    const double q_lo = z1.x - half_width + std::min(p.rho * xi_lo, p.rho * xi_hi);
    const double q_hi = z1.x + half_width + std::max(p.rho * xi_lo, p.rho * xi_hi);
    const double f_hi = f_of_q(p, q_hi);
    if (!std::isfinite(f_hi)) break;
    if (f_hi * std::exp(-D * D / (4.0 * tau)) < tol * p.f0) {
      const double f_min = p.f0 * kAbsorbFloor;
      return {std::max(f_of_q(p, q_lo), f_min), f_hi, p.nu * xi_lo, p.nu * xi_hi};
    }
  }
  std::ostringstream os;
  os << "call_price_hk: truncation domain did not reach tail tolerance " << tol;
  fail(ErrorCode::no_convergence, os.str());
}

// int over [log f_lo, log f_hi] x [log a_lo, log a_hi] of w(f) p(f, a) f a.
template <class Weight>
double integrate_box(const SabrDensity& dens, double T, int order, double f_lo, double f_hi,
                     double a_lo, double a_hi, const PriceOptions& o, Weight w) {
  const auto& gf = quad::gauss_legendre(o.n_f);
  const auto& ga = quad::gauss_legendre(o.n_a);
  const double uf0 = std::log(f_lo), uf1 = std::log(f_hi);
  const double ua0 = std::log(a_lo), ua1 = std::log(a_hi);
  const double hf = 0.5 * (uf1 - uf0), ha = 0.5 * (ua1 - ua0);
  std::vector<double> rows(o.n_f);
  std::vector<double> cols(o.n_a);
  for (int i = 0; i < o.n_f; ++i) {
    const double f = std::exp(uf0 + hf * (gf.nodes[i] + 1.0));
    const double wf = w(f);
    if (wf == 0.0) {
      rows[i] = 0.0;
      continue;
    }
    for (int j = 0; j < o.n_a; ++j) {
      const double a = std::exp(ua0 + ha * (ga.nodes[j] + 1.0));
      cols[j] = ga.weights[j] * dens(T, f, a, order) * a;
    }
    rows[i] = gf.weights[i] * wf * f * quad::pairwise_sum(cols);
  }
  return hf * ha * quad::pairwise_sum(rows);
}

}  // namespace

void SabrParams::validate() const {
  require_positive(f0, "f0");
  require_positive(alpha, "alpha");
  require_positive(nu, "nu");
  if (!(beta >= 0.0 && beta <= 1.0)) fail(ErrorCode::invalid_argument, "beta must be in [0, 1]");
  if (!(rho > -1.0 && rho < 1.0)) fail(ErrorCode::invalid_argument, "rho must be in (-1, 1)");
}

double q_of_f(const SabrParams& p, double f) {
  require_positive(f, "f");
  if (p.beta == 1.0) return std::log(f / p.f0);
  const double e = 1.0 - p.beta;
  return (std::pow(f, e) - std::pow(p.f0, e)) / e;
}

double f_of_q(const SabrParams& p, double q) {
  if (p.beta == 1.0) return p.f0 * std::exp(q);
  const double e = 1.0 - p.beta;
  const double base = std::pow(p.f0, e) + e * q;
  return base > 0.0 ? std::pow(base, 1.0 / e) : 0.0;
}

double xi_of_a(const SabrParams& p, double a) {
  require_positive(a, "a");
  return a / p.nu;
}

PoincareCoords to_poincare(const SabrParams& p, double f, double a) {
  const double q = q_of_f(p, f);
  const double xi = xi_of_a(p, a);
  return {q, xi, q - p.rho * xi, std::sqrt(1.0 - p.rho * p.rho) * xi};
}

std::pair<double, double> from_poincare(const SabrParams& p, double x, double y) {
  require_positive(y, "y");
  const double xi = y / std::sqrt(1.0 - p.rho * p.rho);
  return {f_of_q(p, x + p.rho * xi), p.nu * xi};
}

double tau_of_t(const SabrParams& p, double t) { return 0.5 * p.nu * p.nu * t; }

double jacobian_factor(const SabrParams& p, double f) {
  return std::sqrt(1.0 - p.rho * p.rho) / (p.nu * std::pow(f, p.beta));
}

DriftField sabr_drift(const SabrParams& p) {
  return {2, [p](const Vector& z) {
            const double f = f_at(p, z[0], z[1]);
            return Vector{{-c_prime(p, f) * z[1] * z[1] / (1.0 - p.rho * p.rho), 0.0}};
          }};
}

ConnectionA sabr_connection(const SabrParams& p) {
  return {2,
          [p](const Vector& z) { return Vector{{a_x(p, f_at(p, z[0], z[1])), 0.0}}; },
          p.beta == 0.0};
}

ScalarField sabr_q(const SabrParams& p) {
  return [p](const Vector& z) { return q_closed(p, z[0], z[1]); };
}

SabrDensity::SabrDensity(const SabrParams& p) : p_(p) {
  p_.validate();
  const PoincareCoords c = to_poincare(p_, p_.f0, p_.alpha);
  z1_ = {c.x, c.y};
  scalar_ = curvature_at(hn_metric(2), Vector{{0.0, 1.0}}).scalar;
  q_ = sabr_q(p_);
}

double SabrDensity::log_par(const HPoint& z1, const HPoint& z2) const {
  if (p_.beta == 0.0 || z1 == z2) return 0.0;
  // Reversed geodesic z2 -> z1; A has only an x-component.
  if (p_.beta == 1.0) return a_x(p_, 1.0) * (z2.x - z1.x);
  const PoincareGeodesic geo = geodesic_between(z2, z1, 1.0);
  // A_x is singular on the absorbing level and log Par grows like gap^(-1/2)
  // for geodesics grazing it.  Paths dipping below the quadrature floor
  // f0 * kAbsorbFloor count as absorbed.
  const double q_abs = q_of_f(p_, p_.f0 * kAbsorbFloor);
  const double k = p_.rho / std::sqrt(1.0 - p_.rho * p_.rho);
  double q_min = std::min(z1.x + k * z1.y, z2.x + k * z2.y);
  if (const auto* sc = std::get_if<Semicircle>(&geo)) {
    // x + k y = c + r (cos th + k sin th) has its minimum on the upper arc at th = pi + atan(k).
    const double th_min = std::numbers::pi + std::atan(k);
    const double th1 = std::acos(std::clamp((z1.x - sc->c) / sc->r, -1.0, 1.0));
    const double th2 = std::acos(std::clamp((z2.x - sc->c) / sc->r, -1.0, 1.0));
    if (k < 0.0 && th_min >= std::min(th1, th2) && th_min <= std::max(th1, th2))
      q_min = std::min(q_min, sc->c - sc->r * std::sqrt(1.0 + k * k));
  }
  if (q_min <= q_abs) return -std::numeric_limits<double>::infinity();
  auto integrand = [&](double u) {
    const auto [pt, v] = geodesic_eval(geo, u);
    return v[0] * a_x(p_, f_at(p_, pt.x, pt.y));
  };
  const double integral = adaptive_gl(integrand, 0.0, 1.0, 1e-10, 40);
  return -integral;
}

HeatKernelTerms SabrDensity::terms(double t, double f, double a, int order) const {
  require_positive(t, "t");
  if (order != 0 && order != 1) fail(ErrorCode::invalid_argument, "order must be 0 or 1");
  const double tau = tau_of_t(p_, t);
  const PoincareCoords c = to_poincare(p_, f, a);
  const HPoint z2{c.x, c.y};
  HeatKernelTerms out;
  out.t = tau;
  out.z1 = z1_.vec();
  out.z2 = z2.vec();
  out.order = order;
  out.dist = distance(z1_, z2);
  out.synge = 0.5 * out.dist * out.dist;
  out.van_vleck = van_vleck_closed(z1_, z2);
  const double lp = log_par(z1_, z2);
  out.par = std::exp(lp);
  out.prefactor = std::sqrt(out.van_vleck) / (4.0 * kPi * tau * z2.y * z2.y);
  out.leading = out.prefactor * std::exp(lp - out.synge / (2.0 * tau));
  out.a1 = scalar_ / 6.0 - q_(out.z2);
  out.density = order == 0 ? out.leading : out.leading + out.leading * out.a1 * tau;
  return out;
}

double SabrDensity::operator()(double t, double f, double a, int order) const {
  return terms(t, f, a, order).density * jacobian_factor(p_, f);
}

double transition_density(const SabrParams& p, double t, double f, double a, int order) {
  return SabrDensity(p)(t, f, a, order);
}

double density_bin_mass(const SabrDensity& density, double t, int order, double f_lo,
                        double f_hi, double a_lo, double a_hi, int nodes) {
  require_positive(f_lo, "f_lo");
  require_positive(a_lo, "a_lo");
  if (!(f_hi > f_lo) || !(a_hi > a_lo)) fail(ErrorCode::invalid_argument, "density_bin_mass: empty bin");
  PriceOptions o;
  o.n_f = o.n_a = nodes;
  return integrate_box(density, t, order, f_lo, f_hi, a_lo, a_hi, o, [](double) { return 1.0; });
}

double call_price_hk(const SabrParams& p, double K, double T, int order,
                     const PriceOptions& options) {
  p.validate();
  require_positive(K, "K");
  require_positive(T, "T");
  const Box box = pricing_box(p, T, options.tail_tolerance);
  const double lo = std::max(K, box.f_lo);
  if (lo >= box.f_hi) return 0.0;
  const SabrDensity dens(p);
  return integrate_box(dens, T, order, lo, box.f_hi, box.a_lo, box.a_hi, options,
                       [K](double f) { return std::max(f - K, 0.0); });
}

double density_mass(const SabrParams& p, double T, int order, const PriceOptions& options) {
  p.validate();
  require_positive(T, "T");
  const Box box = pricing_box(p, T, options.tail_tolerance);
  const SabrDensity dens(p);
  return integrate_box(dens, T, order, box.f_lo, box.f_hi, box.a_lo, box.a_hi, options,
                       [](double) { return 1.0; });
}

double black_call(double f0, double K, double T, double sigma) {
  const double sd = sigma * std::sqrt(T);
  if (!(sd > 0.0)) return std::max(f0 - K, 0.0);
  const double d1 = std::log(f0 / K) / sd + 0.5 * sd;
  return f0 * norm_cdf(d1) - K * norm_cdf(d1 - sd);
}

double black_vega(double f0, double K, double T, double sigma) {
  const double sd = sigma * std::sqrt(T);
  if (!(sd > 0.0)) return 0.0;
  const double d1 = std::log(f0 / K) / sd + 0.5 * sd;
  return f0 * norm_pdf(d1) * std::sqrt(T);
}

double implied_vol_from_price(double f0, double K, double T, double price) {
  require_positive(f0, "f0");
  require_positive(K, "K");
  require_positive(T, "T");
  const double intrinsic = std::max(f0 - K, 0.0);
  if (!std::isfinite(price) || price < intrinsic - 1e-14 * f0 || price >= f0) {
    std::ostringstream os;
    os << "implied_vol: price " << price << " outside no-arbitrage bounds [" << intrinsic << ", "
       << f0 << ")";
    fail(ErrorCode::no_convergence, os.str());
  }
  if (price <= intrinsic) return 0.0;

  double lo = 1e-8, hi = 10.0;
  while (black_call(f0, K, T, hi) < price) {
    hi *= 2.0;
    if (hi > 1e4) fail(ErrorCode::no_convergence, "implied_vol: could not bracket the price");
  }
  if (black_call(f0, K, T, lo) > price) return lo;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (black_call(f0, K, T, mid) < price ? lo : hi) = mid;
  }
  double sigma = 0.5 * (lo + hi);
  for (int i = 0; i < 5; ++i) {
    const double vega = black_vega(f0, K, T, sigma);
    if (!(vega > 0.0)) break;
    const double next = sigma - (black_call(f0, K, T, sigma) - price) / vega;
    if (!(next > 0.0) || !std::isfinite(next)) break;
    sigma = next;
  }
  return sigma;
}

double hagan_vol(const SabrParams& p, double K, double T) {
  p.validate();
  require_positive(K, "K");
  require_positive(T, "T");
  const double f = p.f0, b = p.beta, a = p.alpha, nu = p.nu, rho = p.rho;
  const double lfk = std::log(f / K);
  const double fk_pow = std::pow(f * K, 0.5 * (1.0 - b));
  const double omb2 = (1.0 - b) * (1.0 - b);
  const double denom = fk_pow * (1.0 + omb2 / 24.0 * lfk * lfk + omb2 * omb2 / 1920.0 * std::pow(lfk, 4));
  const double z = nu / a * fk_pow * lfk;
  double z_over_chi;
  if (std::abs(z) < 1e-10) {
    z_over_chi = 1.0 - 0.5 * rho * z;
  } else {
    const double root = std::sqrt(1.0 - 2.0 * rho * z + z * z);
    const double chi = std::log1p(((z * z - 2.0 * rho * z) / (root + 1.0) + z) / (1.0 - rho));
    z_over_chi = z / chi;
  }
  const double corr = 1.0 + (omb2 / 24.0 * a * a / (fk_pow * fk_pow) +
                             0.25 * rho * b * nu * a / fk_pow + (2.0 - 3.0 * rho * rho) / 24.0 * nu * nu) *
                                T;
  return a / denom * z_over_chi * corr;
}

}  // namespace hkgeo
