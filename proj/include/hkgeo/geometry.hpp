#pragma once

// Numerical Riemannian geometry on open subsets of R^n with a single chart:
// metric fields, Levi-Civita Christoffel symbols, curvature, geodesics,
// parallel transport, curve length and metric pullback.

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <vector>

namespace hkgeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Central-difference step per coordinate: cbrt(eps) * max(1, |x_i|).
Vector fd_steps(const Vector& x);

/// A Riemannian structure g on a region of R^n.
///
/// `eval` returns the n x n matrix g(x). `deriv`, when supplied, returns n
/// matrices with deriv(x)[l](i, j) = d_l g_ij(x); otherwise derivatives are
/// taken by central differences. `domain` defaults to the whole of R^n.
class MetricField {
 public:
  using Eval = std::function<Matrix(const Vector&)>;
  using Deriv = std::function<std::vector<Matrix>(const Vector&)>;
  using Domain = std::function<bool(const Vector&)>;

  MetricField(int dim, Eval eval, Domain domain = {}, Deriv deriv = {});

  int dim() const noexcept { return dim_; }
  bool contains(const Vector& x) const;
  bool has_analytic_derivatives() const noexcept { return static_cast<bool>(deriv_); }

  /// g(x). Throws ErrorCode::domain outside the domain.
  Matrix at(const Vector& x) const;
  /// g^{-1}(x) via Cholesky. Throws ErrorCode::degenerate when g(x) is not SPD.
  Matrix inverse_at(const Vector& x) const;
  /// sqrt(det g(x)).
  double sqrt_det(const Vector& x) const;
  /// d_l g_ij(x), analytic when available.
  std::vector<Matrix> derivatives_at(const Vector& x) const;

  /// <u, v>_x
  double inner(const Vector& x, const Vector& u, const Vector& v) const;

  /// Same field with the analytic derivative dropped (forces finite differences).
  MetricField without_derivatives() const;

 private:
  int dim_;
  Eval eval_;
  Domain domain_;
  Deriv deriv_;
};

MetricField euclidean_metric(int dim);

/// Dense n x n x n array indexed (a, b, c).
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

  int dim() const noexcept { return n_; }
  double& operator()(int a, int b, int c) { return data_[index(a, b, c)]; }
  double operator()(int a, int b, int c) const { return data_[index(a, b, c)]; }

 private:
  std::size_t index(int a, int b, int c) const {
    return (static_cast<std::size_t>(a) * n_ + b) * n_ + c;
  }
  int n_ = 0;
  std::vector<double> data_;
};

/// Dense n^4 array indexed (a, b, c, d).
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(int n)
      : n_(n), data_(static_cast<std::size_t>(n) * n * n * n, 0.0) {}

  int dim() const noexcept { return n_; }
  double& operator()(int a, int b, int c, int d) { return data_[index(a, b, c, d)]; }
  double operator()(int a, int b, int c, int d) const { return data_[index(a, b, c, d)]; }

 private:
  std::size_t index(int a, int b, int c, int d) const {
    return ((static_cast<std::size_t>(a) * n_ + b) * n_ + c) * n_ + d;
  }
  int n_ = 0;
  std::vector<double> data_;
};

/// Christoffel symbols of the Levi-Civita connection; gamma(k, i, j) = Gamma^k_ij.
struct ChristoffelTensor {
  Vector point;
  Tensor3 gamma;

  double operator()(int k, int i, int j) const { return gamma(k, i, j); }
};

/// riemann(i, j, k, l) = R^i_jkl; ricci(j, l) = sum_i R^i_jil; scalar = g^{jl} R_jl.
struct CurvatureBundle {
  Vector point;
  Tensor4 riemann;
  Matrix ricci;
  double scalar = 0.0;
};

ChristoffelTensor christoffel_at(const MetricField& metric, const Vector& x);
CurvatureBundle curvature_at(const MetricField& metric, const Vector& x);

struct PathSample {
  double t;
  Vector point;
  Vector velocity;
};

/// Sampled curve with strictly increasing parameter. Positions between
/// samples are recovered by cubic Hermite interpolation.
class CurvePath {
 public:
  explicit CurvePath(std::vector<PathSample> samples);

  int dim() const noexcept { return dim_; }
  const std::vector<PathSample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }
  double t_begin() const { return samples_.front().t; }
  double t_end() const { return samples_.back().t; }
  const PathSample& front() const { return samples_.front(); }
  const PathSample& back() const { return samples_.back(); }

  /// Hermite-interpolated (position, velocity) at t in [t_begin, t_end].
  PathSample interpolate(double t) const;

 private:
  int dim_;
  std::vector<PathSample> samples_;
};

/// CSV with columns t, x_1..x_n, v_1..v_n.
void write_path_csv(std::ostream& out, const CurvePath& path);

/// Fixed-step RK4 integration of the geodesic equation from (p, v) over [0, t_end].
/// The step is shrunk so that an integer number of steps lands on t_end.
CurvePath geodesic_ivp(const MetricField& metric, const Vector& p, const Vector& v,
                       double t_end, double step = 1e-3);

struct BvpOptions {
  double step = 1e-3;
  int max_iterations = 100;
  double tolerance = 1e-10;
};

/// Geodesic with phi(0) = z1, phi(t_end) = z2, by damped Newton shooting on
/// the initial velocity. Throws ConvergenceError carrying the best residual.
CurvePath geodesic_bvp(const MetricField& metric, const Vector& z1, const Vector& z2,
                       double t_end, const BvpOptions& options = {});

/// Parallel transport of v0 along `path`; one vector per path sample.
std::vector<Vector> parallel_transport(const MetricField& metric, const CurvePath& path,
                                       const Vector& v0);

/// Coefficient vector of an (n,1)-connection: x -> (Gamma^1_{11}(x), ..., Gamma^1_{n1}(x)).
using CovectorField = std::function<Vector(const Vector&)>;

/// Scalar parallel transport: solves dV/dt = -(phi' . coeff(phi)) V along the path.
std::vector<double> transport_scalar(const CurvePath& path, const CovectorField& coeff,
                                     double v0);

/// Length of the sampled path: composite Simpson on the stored grid.
double curve_length(const MetricField& metric, const CurvePath& path);

using PointMap = std::function<Vector(const Vector&)>;
using JacobianMap = std::function<Matrix(const Vector&)>;

/// f*g(x) = J(x)^T g(f(x)) J(x). Throws ErrorCode::degenerate at points where
/// J is singular.
MetricField pullback_metric(const MetricField& metric, PointMap map, JacobianMap jac);

/// Drift coefficients b^h(x) of a second-order operator.
struct DriftField {
  int dim = 0;
  std::function<Vector(const Vector&)> eval;

  static DriftField zero(int dim);
};

}  // namespace hkgeo
