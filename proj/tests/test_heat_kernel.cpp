#include "hkgeo/error.hpp"
#include "hkgeo/heat_kernel.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace hkgeo;

namespace {

constexpr double kPi = std::numbers::pi;

Vector v2(double a, double b) { return Vector{{a, b}}; }

double gaussian(double t, const Vector& x, const Vector& y) {
  const double n = static_cast<double>(x.size());
  return std::pow(4.0 * kPi * t, -n / 2.0) * std::exp(-(y - x).squaredNorm() / (4.0 * t));
}

// A_2 = -1/(2y), A_1 = 0 on H^2.
ConnectionA log_y_connection() {
  ConnectionA a;
  a.dim = 2;
  a.eval = [](const Vector& x) { return v2(0.0, -0.5 / x[1]); };
  return a;
}

// The divergence formula for A written out with its own finite differences:
// A_i = 1/2 g_ih (b^h - (1/sqrt g) d_k(sqrt g g^{hk})).
Vector literal_A(const MetricField& g, const DriftField& b, const Vector& x) {
  const int n = g.dim();
  Vector div = Vector::Zero(n);
  for (int k = 0; k < n; ++k) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[k]));
    Vector xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    const Matrix fp = g.sqrt_det(xp) * g.inverse_at(xp);
    const Matrix fm = g.sqrt_det(xm) * g.inverse_at(xm);
    div += (fp.col(k) - fm.col(k)) / (2.0 * h);
  }
  div /= g.sqrt_det(x);
  return 0.5 * g.at(x) * (b.eval(x) - div);
}

}  // namespace

TEST(Synge, Examples) {
  EXPECT_EQ(synge({0.2, 1.0}, {0.2, 1.0}), 0.0);
  EXPECT_NEAR(synge({0, 1}, {0, std::exp(1.0)}), 0.5, 1e-15);
  EXPECT_NEAR(synge({-1, 1}, {1, 1}), 0.5 * std::pow(std::acosh(3.0), 2), 1e-14);
  EXPECT_NEAR(synge({-1, 1}, {1, 1}), 1.553638, 1e-6);
}

TEST(VanVleck, ClosedFormExamples) {
  EXPECT_EQ(van_vleck_closed({1, 2}, {1, 2}), 1.0);
  EXPECT_NEAR(van_vleck_closed({-1, 1}, {1, 1}), std::acosh(3.0) / std::sqrt(8.0), 1e-15);
  EXPECT_NEAR(van_vleck_closed({-1, 1}, {1, 1}), 0.6232252401402306, 1e-15);
  EXPECT_NEAR(van_vleck_closed({0, 1}, {1e-6, 1}), 1.0, 1e-12);
}

TEST(VanVleck, ClosedFormDecreasingAndSymmetric) {
  double prev = 1.0;
  for (double y = 1.01; y < 50.0; y *= 1.3) {
    const double v = van_vleck_closed({0, 1}, {0, y});
    EXPECT_LT(v, prev);
    EXPECT_GT(v, 0.0);
    prev = v;
  }
  EXPECT_EQ(van_vleck_closed({0.3, 1.2}, {-1.0, 0.4}), van_vleck_closed({-1.0, 0.4}, {0.3, 1.2}));
}

TEST(VanVleck, NumericMatchesClosedOnHalfPlane) {
  const MetricField g = hn_metric(2);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ux(-1.5, 1.5), uy(0.5, 2.0);
  for (int i = 0; i < 6; ++i) {
    const HPoint a{ux(rng), uy(rng)}, b{ux(rng), uy(rng)};
    const double closed = van_vleck_closed(a, b);
    const double via_bvp = van_vleck_numeric(g, a.vec(), b.vec());
    EXPECT_NEAR(via_bvp / closed, 1.0, 1e-4);
    const double swapped = van_vleck_numeric(g, b.vec(), a.vec());
    EXPECT_NEAR(swapped, via_bvp, 1e-6);
    auto syn = [](const Vector& x, const Vector& y) { return synge(HPoint::from(x), HPoint::from(y)); };
    EXPECT_NEAR(van_vleck_numeric(g, syn, a.vec(), b.vec(), 1e-4) / closed, 1.0, 1e-6);
  }
}

TEST(VanVleck, EuclideanIsOne) {
  const MetricField g = euclidean_metric(2);
  EXPECT_NEAR(van_vleck_numeric(g, v2(0, 0), v2(1.0, -2.0)), 1.0, 1e-6);
}

TEST(ConnectionA, EuclideanZeroDriftIsZero) {
  const ConnectionA a = connection_A(euclidean_metric(3), DriftField::zero(3));
  EXPECT_EQ(a.eval(Vector{{1.0, 2.0, 3.0}}).norm(), 0.0);
}

TEST(ConnectionA, HalfPlaneZeroDrift) {
  // The divergence term cancels on H^2: sqrt(det g) g^{hk} = delta_hk is constant.
  const MetricField g = hn_metric(2);
  const ConnectionA a = connection_A(g, DriftField::zero(2));
  for (double y : {0.3, 1.0, 2.0, 5.0}) {
    const Vector x = v2(0.7, y);
    const Vector lit = literal_A(g, DriftField::zero(2), x);
    EXPECT_LT((a.eval(x) - lit).norm(), 1e-8 / (y * y));
    EXPECT_LT(a.eval(x).norm(), 1e-12 / (y * y));
  }
}

TEST(ConnectionA, MatchesDivergenceFormulaWithDrift) {
  const MetricField g(2, [](const Vector& x) {
    Matrix m(2, 2);
    m << 2.0 + std::sin(x[0]), 0.3 * x[1], 0.3 * x[1], 1.0 + x[0] * x[0];
    return m;
  });
  DriftField b{2, [](const Vector& x) { return v2(x[1], -0.5 * x[0] * x[0]); }};
  const ConnectionA a = connection_A(g, b);
  for (const Vector& x : {v2(0.1, 0.2), v2(-0.7, 1.1), v2(1.3, -0.4)})
    EXPECT_LT((a.eval(x) - literal_A(g, b, x)).norm(), 1e-7);
}

TEST(ParFactor, ZeroConnectionIsOne) {
  EXPECT_EQ(par_factor(ConnectionA::zero(2), Semicircle{0.0, 1.0, 1.0, 0.2}, 1.5), 1.0);
}

TEST(ParFactor, VerticalClosedForm) {
  for (double alpha : {-1.0, 0.3, 2.0})
    for (double t : {0.5, 1.0}) {
      const VerticalLine g{0.0, 1.5, alpha};
      EXPECT_NEAR(par_factor(log_y_connection(), g, t), std::exp(alpha * t / 2.0), 1e-8);
    }
}

TEST(ParFactor, SemicircleClosedForm) {
  for (double u0 : {-1.0, 0.0, 0.7})
    for (double alpha : {-0.8, 1.2}) {
      const Semicircle g{0.3, 1.4, alpha, u0};
      const double t = 1.1;
      const double expect = std::sqrt(std::cosh(u0) / std::cosh(alpha * t + u0));
      EXPECT_NEAR(par_factor(log_y_connection(), g, t), expect, 1e-8);
    }
}

TEST(ParFactor, SampledPathAgrees) {
  const Semicircle g{0.3, 1.4, 0.9, -0.2};
  const double exact = par_factor(log_y_connection(), g, 1.0);
  EXPECT_NEAR(par_factor(log_y_connection(), sample_geodesic(g, 1.0, 1000)), exact, 1e-9);
}

TEST(QPotential, EuclideanZero) {
  const ScalarField q = q_potential(euclidean_metric(2), ConnectionA::zero(2));
  EXPECT_EQ(q(v2(1.0, 2.0)), 0.0);
}

TEST(QPotential, HalfPlaneClosedForms) {
  const MetricField g = hn_metric(2);
  // A = 0 gives Q = 0; A_2 = -1/(2y) gives y^2/(4y^2) + y^2 d_y(-1/(2y)) = 1/4 + 1/2.
  const ScalarField q0 = q_potential(g, connection_A(g, DriftField::zero(2)));
  const ScalarField q1 = q_potential(g, log_y_connection());
  for (double y : {0.2, 1.0, 3.0}) {
    EXPECT_NEAR(q0(v2(0.5, y)), 0.0, 1e-8);
    EXPECT_NEAR(q1(v2(0.5, y)), 0.75, 1e-6);
  }
}

TEST(QPotential, ConstantConnection) {
  ConnectionA a;
  a.dim = 2;
  a.eval = [](const Vector&) { return v2(0.3, -0.4); };
  EXPECT_NEAR(q_potential(euclidean_metric(2), a)(v2(1.0, 1.0)), 0.25, 1e-12);
}

TEST(A1Coeff, EuclideanZero) {
  EXPECT_EQ(a1_coeff(euclidean_metric(2), ConnectionA::zero(2), v2(0.1, 0.2)), 0.0);
}

TEST(A1Coeff, HalfPlaneConstant) {
  const MetricField g = hn_metric(2);
  const ConnectionA a = connection_A(g, DriftField::zero(2));
  double lo = 1e300, hi = -1e300;
  for (double x : {-2.0, 0.0, 1.0})
    for (double y : {0.3, 1.0, 4.0}) {
      const double v = a1_coeff(g, a, v2(x, y));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  EXPECT_NEAR(lo, -1.0 / 3.0, 1e-6);
  EXPECT_LT(hi - lo, 1e-8);
  const H2Kernel k;
  EXPECT_NEAR(k.scalar_curvature(), -2.0, 1e-6);
}

TEST(Density, EuclideanOrderZeroIsGaussian) {
  const MetricField g = euclidean_metric(2);
  for (double t : {0.01, 0.1, 1.0}) {
    const Vector x = v2(0.2, -0.1), y = v2(0.35, 0.05);
    const HeatKernelTerms k = density(g, DriftField::zero(2), t, x, y, 0);
    EXPECT_NEAR(k.density / gaussian(t, x, y), 1.0, 1e-12);
    EXPECT_EQ(k.a0, 1.0);
  }
}

TEST(Density, EuclideanConstantDriftFirstOrder) {
  // Exact kernel of Laplacian + b.grad: Gaussian centred at x + b t.
  const MetricField g = euclidean_metric(2);
  const Vector b = v2(0.6, -0.3);
  DriftField drift{2, [b](const Vector&) { return b; }};
  const Vector x = v2(0.0, 0.0), y = v2(0.1, 0.05);
  double prev = 1.0;
  for (double t : {0.1, 0.05, 0.025}) {
    const double exact = std::pow(4.0 * kPi * t, -1.0) *
                         std::exp(-(y - x - b * t).squaredNorm() / (4.0 * t));
    const HeatKernelTerms k = density(g, drift, t, x, y, 1);
    const double err = std::abs(k.density / exact - 1.0);
    EXPECT_LT(err, 0.6 * std::pow(b.squaredNorm() * t / 4.0, 2) + 1e-9);
    EXPECT_LT(err, prev);
    prev = err;
    EXPECT_NEAR(k.a1, -b.squaredNorm() / 4.0, 1e-8);
  }
}

TEST(Density, EuclideanSolvesHeatEquation) {
  const MetricField g = euclidean_metric(2);
  const Vector x = v2(0.0, 0.0);
  auto p = [&](double t, const Vector& y) { return density(g, DriftField::zero(2), t, x, y, 0).density; };
  const double t = 0.2, ht = 1e-4, hx = 1e-3;
  for (const Vector& y : {v2(0.1, 0.2), v2(-0.5, 0.3), v2(0.8, -0.6)}) {
    const double dt = (p(t + ht, y) - p(t - ht, y)) / (2 * ht);
    double lap = 0.0;
    for (int i = 0; i < 2; ++i) {
      Vector e = Vector::Zero(2);
      e[i] = hx;
      lap += (p(t, y + e) - 2.0 * p(t, y) + p(t, y - e)) / (hx * hx);
    }
    EXPECT_LT(std::abs(dt - lap), 1e-4 * std::abs(dt) + 1e-9);
  }
}

TEST(Density, GenericAgreesWithHalfPlaneClosedForm) {
  const H2Kernel k;
  const HeatKernelTerms closed = k(0.1, {0.0, 1.0}, {0.4, 1.3}, 1);
  const HeatKernelTerms generic =
      density(hn_metric(2), DriftField::zero(2), 0.1, v2(0.0, 1.0), v2(0.4, 1.3), 1);
  EXPECT_NEAR(generic.dist, closed.dist, 1e-8);
  EXPECT_NEAR(generic.van_vleck / closed.van_vleck, 1.0, 1e-4);
  EXPECT_NEAR(generic.a1, closed.a1, 1e-6);
  EXPECT_NEAR(generic.density / closed.density, 1.0, 1e-4);
}

TEST(Density, HalfPlaneTerms) {
  const H2Kernel k;
  const HPoint z1{0.0, 1.0}, z2{0.5, 1.5};
  const double t = 0.05;
  const HeatKernelTerms a = k(t, z1, z2, 0), b = k(t, z1, z2, 1);
  EXPECT_EQ(a.synge, 0.5 * a.dist * a.dist);
  EXPECT_NEAR(std::exp(-a.synge / (2 * t)), std::exp(-std::pow(distance(z1, z2), 2) / (4 * t)), 1e-15);
  EXPECT_NEAR(a.prefactor, std::sqrt(a.van_vleck) / (4 * kPi * t * z2.y * z2.y), 1e-15);
  EXPECT_NEAR(b.density - a.density, a.leading * b.a1 * t, 1e-14 * a.density);
  EXPECT_EQ(a.par, 1.0);
}

TEST(Density, DiagonalAndVanishingLimit) {
  const H2Kernel k;
  const HeatKernelTerms d = k(0.1, {0.0, 1.0}, {0.0, 1.0}, 1);
  EXPECT_EQ(d.van_vleck, 1.0);
  EXPECT_EQ(d.par, 1.0);
  EXPECT_EQ(d.dist, 0.0);
  double prev = 1e300;
  for (double t : {0.1, 0.03, 0.01, 0.003}) {
    const double p = k(t, {0.0, 1.0}, {0.5, 1.0}, 0).density;
    EXPECT_LT(p, prev);
    prev = p;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(Density, HalfPlaneNormalization) {
  const H2Kernel k;
  double prev_err = 1.0;
  for (double t : {0.04, 0.02, 0.01}) {
    const double err = std::abs(h2_density_mass(k, t, {0.0, 1.0}, 0) - 1.0);
    EXPECT_LT(err, prev_err);
    prev_err = err;
  }
  EXPECT_LT(prev_err, 0.02);
  // First order removes the O(t) part of the mass defect.
  EXPECT_LT(std::abs(h2_density_mass(k, 0.01, {0.0, 1.0}, 1) - 1.0), prev_err);
}

TEST(Density, RejectsBadInput) {
  const H2Kernel k;
  EXPECT_THROW(k(0.0, {0, 1}, {0, 1}, 0), Error);
  EXPECT_THROW(k(0.1, {0, 1}, {0, 1}, 2), Error);
  EXPECT_THROW(k(0.1, {0, 1}, {0, -1}, 0), Error);
}
