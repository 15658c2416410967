#include "hkgeo/error.hpp"
#include "hkgeo/sabr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace hkgeo;

namespace {

SabrParams base() { return {100.0, 0.3, 1.0, 0.3, -0.5}; }

}  // namespace

TEST(SabrParams, Validation) {
  EXPECT_NO_THROW(base().validate());
  for (auto bad : {SabrParams{0, 0.3, 1, 0.3, 0}, SabrParams{100, 0, 1, 0.3, 0},
                   SabrParams{100, 0.3, 1.1, 0.3, 0}, SabrParams{100, 0.3, -0.1, 0.3, 0},
                   SabrParams{100, 0.3, 1, 0, 0}, SabrParams{100, 0.3, 1, 0.3, 1.0},
                   SabrParams{100, 0.3, 1, 0.3, -1.0}, SabrParams{NAN, 0.3, 1, 0.3, 0}}) {
    try {
      bad.validate();
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
    }
  }
}

TEST(Coordinates, QOfF) {
  SabrParams p = base();
  EXPECT_EQ(q_of_f(p, 100.0), 0.0);
  EXPECT_NEAR(q_of_f(p, 100.0 * std::exp(1.0)), 1.0, 1e-15);
  p.f0 = 1.0;
  p.beta = 0.5;
  EXPECT_NEAR(q_of_f(p, 4.0), 2.0, 1e-15);
  EXPECT_THROW(q_of_f(p, 0.0), Error);
}

TEST(Coordinates, XiAndY) {
  SabrParams p = base();
  p.nu = 0.4;
  EXPECT_NEAR(xi_of_a(p, 0.4), 1.0, 1e-15);
  EXPECT_NEAR(xi_of_a(p, 0.2), 0.5, 1e-15);
  EXPECT_NEAR(to_poincare(p, 90.0, 0.2).y, std::sqrt(1 - 0.25) * 0.2 / 0.4, 1e-15);
  EXPECT_THROW(xi_of_a(p, -1.0), Error);
}

TEST(Coordinates, ToPoincare) {
  SabrParams p = base();
  p.rho = 0.0;
  const PoincareCoords c = to_poincare(p, 120.0, 0.25);
  EXPECT_NEAR(c.x, std::log(1.2), 1e-15);
  EXPECT_NEAR(c.y, 0.25 / 0.3, 1e-15);
  const SabrParams q = base();
  EXPECT_NEAR(to_poincare(q, q.f0, 0.25).x, 0.5 * 0.25 / 0.3, 1e-15);
}

TEST(Coordinates, RoundTrip) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> uf(5.0, 300.0), ua(0.01, 2.0), ub(0.0, 1.0), ur(-0.95, 0.95);
  for (int i = 0; i < 1000; ++i) {
    SabrParams p = base();
    p.beta = ub(rng);
    p.rho = ur(rng);
    const double f = uf(rng), a = ua(rng);
    const PoincareCoords c = to_poincare(p, f, a);
    const auto [f2, a2] = from_poincare(p, c.x, c.y);
    EXPECT_NEAR(f2 / f, 1.0, 1e-10);
    EXPECT_NEAR(a2 / a, 1.0, 1e-10);
  }
}

TEST(Coordinates, Tau) {
  SabrParams p = base();
  p.nu = 0.4;
  EXPECT_EQ(tau_of_t(p, 0.0), 0.0);
  EXPECT_NEAR(tau_of_t(p, 1.0), 0.08, 1e-16);
  EXPECT_NEAR(tau_of_t(p, 3.0), 3.0 * tau_of_t(p, 1.0), 1e-16);
}

TEST(Coordinates, InverseMetricIsHalfPlane) {
  // Generator coefficients in (f, a) pushed to (x, y) by the Jacobian of the chain.
  std::mt19937_64 rng(37);
  std::uniform_real_distribution<double> uf(50.0, 150.0), ua(0.1, 0.6), ub(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    SabrParams p = base();
    p.beta = ub(rng);
    const double f = uf(rng), a = ua(rng), C = std::pow(f, p.beta);
    Matrix ginv(2, 2);
    ginv << 0.5 * a * a * C * C, 0.5 * p.rho * p.nu * a * a * C, 0.5 * p.rho * p.nu * a * a * C,
        0.5 * p.nu * p.nu * a * a;
    const double s = std::sqrt(1 - p.rho * p.rho);
    Matrix J(2, 2);  // d(x, y) / d(f, a)
    J << 1.0 / C, -p.rho / p.nu, 0.0, s / p.nu;
    const Matrix xy = J * ginv * J.transpose();
    const double y = to_poincare(p, f, a).y;
    const Matrix expect = 0.5 * p.nu * p.nu * y * y * Matrix::Identity(2, 2);
    EXPECT_LT((xy - expect).norm(), 1e-10 * expect.norm());
    EXPECT_NEAR(std::abs(J.determinant()), jacobian_factor(p, f), 1e-15 * jacobian_factor(p, f));
  }
}

TEST(Connection, ClosedForms) {
  SabrParams p = base();
  p.beta = 0.6;
  p.rho = 0.3;
  const ConnectionA a = sabr_connection(p);
  const ScalarField q = sabr_q(p);
  const DriftField b = sabr_drift(p);
  const MetricField g = hn_metric(2);
  const ConnectionA a_num = connection_A(g, b);
  const ScalarField q_num = q_potential(g, a_num);
  for (double f : {60.0, 100.0, 140.0})
    for (double vol : {0.2, 0.4}) {
      const PoincareCoords c = to_poincare(p, f, vol);
      const Vector x{{c.x, c.y}};
      EXPECT_LT((a.eval(x) - a_num.eval(x)).norm(), 1e-8 * (1.0 + a.eval(x).norm()));
      EXPECT_NEAR(q(x), q_num(x), 1e-5 * (1.0 + std::abs(q(x))));
    }
  p.beta = 1.0;
  const Vector x{{0.1, 0.9}};
  EXPECT_NEAR(sabr_connection(p).eval(x)[0], -1.0 / (2.0 * (1 - p.rho * p.rho)), 1e-15);
  EXPECT_NEAR(sabr_q(p)(x), 0.81 / (4.0 * std::pow(1 - p.rho * p.rho, 2)), 1e-12);
}

TEST(TransitionDensity, ParMatchesGenericQuadrature) {
  for (double beta : {0.3, 0.7, 1.0}) {
    SabrParams p = base();
    p.beta = beta;
    const SabrDensity d(p);
    const PoincareCoords c0 = to_poincare(p, p.f0, p.alpha);
    for (double f : {80.0, 125.0}) {
      const HeatKernelTerms k = d.terms(0.5, f, 0.35, 0);
      const PoincareCoords c = to_poincare(p, f, 0.35);
      const PoincareGeodesic back = geodesic_between({c.x, c.y}, {c0.x, c0.y}, 1.0);
      EXPECT_NEAR(k.par, par_factor(sabr_connection(p), back, 1.0), 1e-9) << beta << " " << f;
    }
  }
}

TEST(TransitionDensity, AbsorbingLevelCutsPar) {
  SabrParams p{1.0, 0.3, 0.5, 0.3, -0.5};
  const SabrDensity d(p);
  const HeatKernelTerms k = d.terms(0.5, 0.004, 0.05, 1);
  EXPECT_EQ(k.par, 0.0);
  EXPECT_EQ(k.density, 0.0);
}

TEST(TransitionDensity, Normalization) {
  SabrParams p = base();
  // nu^2 t / 2 = 0.01
  const double T = 0.02 / (p.nu * p.nu);
  EXPECT_NEAR(density_mass(p, T, 0), 1.0, 0.03);
  EXPECT_NEAR(density_mass(p, T, 1), 1.0, 0.03);
  EXPECT_NEAR(density_mass(p, 0.5, 1), 1.0, 1e-3);
  p.beta = 0.5;
  p.f0 = 1.0;
  EXPECT_NEAR(density_mass(p, 0.5, 1), 1.0, 1e-2);
}

TEST(TransitionDensity, ConcentratesLikeOneOverTau) {
  const SabrParams p = base();
  const double d1 = transition_density(p, 0.01, p.f0, p.alpha, 0);
  const double d2 = transition_density(p, 0.005, p.f0, p.alpha, 0);
  EXPECT_NEAR(d2 / d1, 2.0, 0.02);
  EXPECT_GT(d2, d1);
}

TEST(TransitionDensity, BinMassIsAdditive) {
  const SabrDensity d(base());
  const double whole = density_bin_mass(d, 0.5, 1, 90.0, 110.0, 0.25, 0.35, 16);
  const double left = density_bin_mass(d, 0.5, 1, 90.0, 100.0, 0.25, 0.35, 16);
  const double right = density_bin_mass(d, 0.5, 1, 100.0, 110.0, 0.25, 0.35, 16);
  EXPECT_NEAR(left + right, whole, 1e-10);
  EXPECT_GT(whole, 0.0);
  EXPECT_LT(whole, 1.0);
}

TEST(TransitionDensity, MatchesTermsTimesJacobian) {
  const SabrParams p = base();
  const SabrDensity d(p);
  const HeatKernelTerms k = d.terms(0.5, 95.0, 0.28, 1);
  EXPECT_NEAR(d(0.5, 95.0, 0.28, 1), k.density * jacobian_factor(p, 95.0), 1e-15);
  EXPECT_NEAR(k.t, tau_of_t(p, 0.5), 1e-16);
}

TEST(CallPrice, SmallStrikeGivesForward) {
  const SabrParams p = base();
  EXPECT_NEAR(call_price_hk(p, 1e-3, 0.1, 1) / p.f0, 1.0, 0.01);
}

TEST(CallPrice, MonotoneAndAboveIntrinsic) {
  const SabrParams p = base();
  double prev = 1e300;
  for (double K = 60.0; K <= 150.0; K += 10.0) {
    const double c = call_price_hk(p, K, 0.5, 1);
    EXPECT_LE(c, prev);
    EXPECT_GE(c, std::max(p.f0 - K, 0.0) - 1e-6 * p.f0);
    prev = c;
  }
}

TEST(CallPrice, NearDeterministicVolIsBlack) {
  SabrParams p{100.0, 0.3, 1.0, 0.05, 0.0};
  for (double K : {80.0, 100.0, 120.0}) {
    const double black = black_call(p.f0, K, 0.5, p.alpha);
    EXPECT_NEAR(call_price_hk(p, K, 0.5, 1) / black, 1.0, 0.005);
  }
}

TEST(Black, ImpliedVolRoundTrip) {
  for (double sigma : {0.1, 0.3, 1.0})
    for (double K : {70.0, 100.0, 140.0}) {
      const double c = black_call(100.0, K, 0.5, sigma);
      EXPECT_NEAR(implied_vol_from_price(100.0, K, 0.5, c), sigma, 1e-8);
      EXPECT_NEAR(black_call(100.0, K, 0.5, implied_vol_from_price(100.0, K, 0.5, c)), c, 1e-10);
    }
}

TEST(Black, AtmSmallMaturityExpansion) {
  const double sigma = 0.25, T = 1e-4;
  const double approx = 100.0 * sigma * std::sqrt(T / (2.0 * M_PI));
  EXPECT_NEAR(implied_vol_from_price(100.0, 100.0, T, approx), sigma, 1e-6);
}

TEST(Black, IntrinsicPriceIsZeroVol) {
  EXPECT_EQ(implied_vol_from_price(100.0, 90.0, 0.5, 10.0), 0.0);
  EXPECT_EQ(implied_vol_from_price(100.0, 110.0, 0.5, 0.0), 0.0);
}

TEST(Black, PriceOutsideBoundsThrows) {
  EXPECT_THROW(implied_vol_from_price(100.0, 90.0, 0.5, 9.0), Error);
  EXPECT_THROW(implied_vol_from_price(100.0, 90.0, 0.5, 100.0), Error);
}

TEST(Hagan, NoVolOfVolGivesAlpha) {
  SabrParams p = base();
  p.nu = 1e-8;
  for (double K : {70.0, 100.0, 130.0}) EXPECT_NEAR(hagan_vol(p, K, 1.0), p.alpha, 1e-6);
}

TEST(Hagan, AtmShortMaturityGivesAlpha) {
  const SabrParams p = base();
  double prev = 1.0;
  for (double T : {1.0, 0.1, 0.01, 0.001}) {
    const double gap = std::abs(hagan_vol(p, p.f0, T) - p.alpha);
    EXPECT_LT(gap, prev);
    prev = gap;
  }
  EXPECT_LT(prev, 1e-4);
}

TEST(Hagan, ZeroCorrelationSymmetry) {
  SabrParams p = base();
  p.rho = 0.0;
  for (double K : {60.0, 80.0, 95.0})
    EXPECT_NEAR(hagan_vol(p, K, 0.7), hagan_vol(p, p.f0 * p.f0 / K, 0.7), 1e-10);
}

TEST(Hagan, ContinuousThroughAtm) {
  const SabrParams p = base();
  EXPECT_NEAR(hagan_vol(p, p.f0 * (1 + 1e-9), 0.5), hagan_vol(p, p.f0, 0.5), 1e-9);
}

TEST(Smile, HeatKernelApproachesHaganAsMaturityShrinks) {
  const SabrParams p = base();
  for (double K : {80.0, 90.0, 100.0, 110.0, 120.0}) {
    auto gap = [&](double T) {
      return std::abs(implied_vol_from_price(p.f0, K, T, call_price_hk(p, K, T, 1)) - hagan_vol(p, K, T));
    };
    EXPECT_LE(gap(0.25), gap(1.0)) << "K=" << K;
  }
}
