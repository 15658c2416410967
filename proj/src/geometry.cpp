#include "hkgeo/geometry.hpp"

#include "hkgeo/error.hpp"
#include "hkgeo/quadrature.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <utility>

namespace hkgeo {

namespace {

const double kCbrtEps = std::cbrt(std::numeric_limits<double>::epsilon());

std::string describe(const Vector& x) {
  std::ostringstream os;
  os << '(';
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
  os << ')';
  return os.str();
}

bool all_finite(const Vector& v) { return v.allFinite(); }

// Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_li - d_l g_ij)
Tensor3 levi_civita(const Matrix& ginv, const std::vector<Matrix>& dg) {
  const int n = static_cast<int>(ginv.rows());
  Tensor3 first(n);  // Gamma_{l,ij} (lowered index first)
  for (int l = 0; l < n; ++l)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        first(l, i, j) = 0.5 * (dg[i](j, l) + dg[j](l, i) - dg[l](i, j));
  Tensor3 gamma(n);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += ginv(k, l) * first(l, i, j);
        gamma(k, i, j) = s;
        gamma(k, j, i) = s;
      }
  return gamma;
}

// a_k = -Gamma^k_ij v_i v_j
Vector geodesic_acceleration(const MetricField& metric, const Vector& x, const Vector& v) {
  const ChristoffelTensor ch = christoffel_at(metric, x);
  const int n = metric.dim();
  Vector a(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += ch(k, i, j) * v[i] * v[j];
    a[k] = -s;
  }
  return a;
}

struct ShotEnd {
  Vector point;
  bool ok = true;
};

// RK4 state integration; when `samples` is non-null every step is recorded.
ShotEnd integrate_geodesic(const MetricField& metric, const Vector& p, const Vector& v,
                           double t_end, double step, std::vector<PathSample>* samples) {
  if (!(step > 0.0)) fail(ErrorCode::invalid_argument, "geodesic_ivp: step must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end))
    fail(ErrorCode::invalid_argument, "geodesic_ivp: t_end must be finite and >= 0");
  if (!metric.contains(p))
    fail(ErrorCode::domain, "geodesic_ivp: start point " + describe(p) + " outside domain");

  const int steps = std::max(1, static_cast<int>(std::ceil(t_end / step - 1e-9)));
  const double h = t_end / steps;
  Vector x = p;
  Vector u = v;
  if (samples) {
    samples->clear();
    samples->reserve(steps + 1);
    samples->push_back({0.0, x, u});
  }
  if (t_end == 0.0) return {x, true};

  auto check = [&](const Vector& y, double t) {
    if (!all_finite(y))
      fail(ErrorCode::numerical, "geodesic_ivp: non-finite state near t = " + std::to_string(t));
    if (!metric.contains(y))
      fail(ErrorCode::domain, "geodesic_ivp: path left the domain after t = " + std::to_string(t));
  };

  for (int s = 0; s < steps; ++s) {
    const double t = s * h;
    const Vector k1x = u;
    const Vector k1v = geodesic_acceleration(metric, x, u);
    const Vector x2 = x + 0.5 * h * k1x;
    const Vector u2 = u + 0.5 * h * k1v;
    check(x2, t);
    const Vector k2v = geodesic_acceleration(metric, x2, u2);
    const Vector x3 = x + 0.5 * h * u2;
    const Vector u3 = u + 0.5 * h * k2v;
    check(x3, t);
    const Vector k3v = geodesic_acceleration(metric, x3, u3);
    const Vector x4 = x + h * u3;
    const Vector u4 = u + h * k3v;
    check(x4, t);
    const Vector k4v = geodesic_acceleration(metric, x4, u4);
    x += h / 6.0 * (k1x + 2.0 * u2 + 2.0 * u3 + u4);
    u += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    check(x, t);
    if (!all_finite(u)) check(u, t);
    if (samples) samples->push_back({(s + 1 == steps) ? t_end : (s + 1) * h, x, u});
  }
  return {x, true};
}

// Residual of a trial shot; +inf when the trial leaves the domain.
double shoot(const MetricField& metric, const Vector& z1, const Vector& z2, const Vector& v,
             double t_end, double step, Vector* residual) {
  try {
    const ShotEnd end = integrate_geodesic(metric, z1, v, t_end, step, nullptr);
    *residual = end.point - z2;
    return residual->norm();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::domain || e.code() == ErrorCode::numerical)
      return std::numeric_limits<double>::infinity();
    throw;
  }
}

}  // namespace

Vector fd_steps(const Vector& x) {
  Vector h(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) h[i] = kCbrtEps * std::max(1.0, std::abs(x[i]));
  return h;
}

// ---------------------------------------------------------------------------
// MetricField

MetricField::MetricField(int dim, Eval eval, Domain domain, Deriv deriv)
    : dim_(dim), eval_(std::move(eval)), domain_(std::move(domain)), deriv_(std::move(deriv)) {
  if (dim_ < 1) fail(ErrorCode::invalid_argument, "MetricField: dimension must be >= 1");
  if (!eval_) fail(ErrorCode::invalid_argument, "MetricField: missing evaluator");
}

bool MetricField::contains(const Vector& x) const {
  if (x.size() != dim_ || !all_finite(x)) return false;
  return !domain_ || domain_(x);
}

Matrix MetricField::at(const Vector& x) const {
  if (x.size() != dim_)
    fail(ErrorCode::invalid_argument, "MetricField: point has wrong dimension");
  if (!contains(x)) fail(ErrorCode::domain, "MetricField: point " + describe(x) + " outside domain");
  Matrix g = eval_(x);
  if (g.rows() != dim_ || g.cols() != dim_)
    fail(ErrorCode::invalid_argument, "MetricField: evaluator returned wrong shape");
  if (!g.allFinite()) fail(ErrorCode::numerical, "MetricField: non-finite metric at " + describe(x));
  return g;
}

Matrix MetricField::inverse_at(const Vector& x) const {
  const Matrix g = at(x);
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::degenerate, "MetricField: metric not positive definite at " + describe(x));
  return llt.solve(Matrix::Identity(dim_, dim_));
}

double MetricField::sqrt_det(const Vector& x) const {
  const Matrix g = at(x);
  Eigen::LLT<Matrix> llt(g);
  if (llt.info() != Eigen::Success)
    fail(ErrorCode::degenerate, "MetricField: metric not positive definite at " + describe(x));
  // det g = prod(L_ii)^2
  double s = 1.0;
  for (int i = 0; i < dim_; ++i) s *= llt.matrixL()(i, i);
  return s;
}

std::vector<Matrix> MetricField::derivatives_at(const Vector& x) const {
  if (deriv_) {
    if (!contains(x))
      fail(ErrorCode::domain, "MetricField: point " + describe(x) + " outside domain");
    std::vector<Matrix> d = deriv_(x);
    if (static_cast<int>(d.size()) != dim_)
      fail(ErrorCode::invalid_argument, "MetricField: derivative has wrong shape");
    return d;
  }
  const Vector h = fd_steps(x);
  std::vector<Matrix> d(dim_);
  for (int l = 0; l < dim_; ++l) {
    Vector xp = x, xm = x;
    xp[l] += h[l];
    xm[l] -= h[l];
    d[l] = (at(xp) - at(xm)) / (xp[l] - xm[l]);
  }
  return d;
}

double MetricField::inner(const Vector& x, const Vector& u, const Vector& v) const {
  return u.dot(at(x) * v);
}

MetricField MetricField::without_derivatives() const {
  return MetricField(dim_, eval_, domain_, {});
}

MetricField euclidean_metric(int dim) {
  return MetricField(
      dim, [dim](const Vector&) { return Matrix::Identity(dim, dim); }, {},
      [dim](const Vector&) { return std::vector<Matrix>(dim, Matrix::Zero(dim, dim)); });
}

DriftField DriftField::zero(int dim) {
  return {dim, [dim](const Vector&) { return Vector::Zero(dim).eval(); }};
}

// ---------------------------------------------------------------------------
// Connection and curvature

ChristoffelTensor christoffel_at(const MetricField& metric, const Vector& x) {
  const Matrix ginv = metric.inverse_at(x);
  return {x, levi_civita(ginv, metric.derivatives_at(x))};
}

CurvatureBundle curvature_at(const MetricField& metric, const Vector& x) {
  const int n = metric.dim();
  const ChristoffelTensor ch = christoffel_at(metric, x);
  const Vector h = fd_steps(x);

  // dgamma[m](k, i, j) = d_m Gamma^k_ij
  std::vector<Tensor3> dgamma;
  dgamma.reserve(n);
  for (int m = 0; m < n; ++m) {
    Vector xp = x, xm = x;
    xp[m] += h[m];
    xm[m] -= h[m];
    const ChristoffelTensor cp = christoffel_at(metric, xp);
    const ChristoffelTensor cm = christoffel_at(metric, xm);
    const double width = xp[m] - xm[m];
    Tensor3 d(n);
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) d(k, i, j) = (cp(k, i, j) - cm(k, i, j)) / width;
    dgamma.push_back(std::move(d));
  }

  CurvatureBundle out;
  out.point = x;
  out.riemann = Tensor4(n);
  // R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj + Gamma^i_kr Gamma^r_lj - Gamma^i_lr Gamma^r_kj
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = k + 1; l < n; ++l) {
          double r = dgamma[k](i, l, j) - dgamma[l](i, k, j);
          for (int s = 0; s < n; ++s) r += ch(i, k, s) * ch(s, l, j) - ch(i, l, s) * ch(s, k, j);
          out.riemann(i, j, k, l) = r;
          out.riemann(i, j, l, k) = -r;
        }

  out.ricci = Matrix::Zero(n, n);
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += out.riemann(i, j, i, l);
      out.ricci(j, l) = s;
    }
  const Matrix ginv = metric.inverse_at(x);
  out.scalar = (ginv.array() * out.ricci.array()).sum();
  return out;
}

// ---------------------------------------------------------------------------
// Paths

CurvePath::CurvePath(std::vector<PathSample> samples) : samples_(std::move(samples)) {
  if (samples_.empty()) fail(ErrorCode::invalid_argument, "CurvePath: no samples");
  dim_ = static_cast<int>(samples_.front().point.size());
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const PathSample& s = samples_[i];
    if (s.point.size() != dim_ || s.velocity.size() != dim_)
      fail(ErrorCode::invalid_argument, "CurvePath: inconsistent sample dimension");
    if (i > 0 && !(s.t > samples_[i - 1].t))
      fail(ErrorCode::invalid_argument, "CurvePath: parameter must be strictly increasing");
  }
}

PathSample CurvePath::interpolate(double t) const {
  if (samples_.size() == 1 || t <= t_begin()) return samples_.front();
  if (t >= t_end()) return samples_.back();
  auto it = std::upper_bound(samples_.begin(), samples_.end(), t,
                             [](double v, const PathSample& s) { return v < s.t; });
  const PathSample& b = *it;
  const PathSample& a = *(it - 1);
  const double h = b.t - a.t;
  const double s = (t - a.t) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double d00 = (6 * s2 - 6 * s) / h, d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h, d11 = 3 * s2 - 2 * s;
  PathSample out;
  out.t = t;
  out.point = h00 * a.point + h10 * h * a.velocity + h01 * b.point + h11 * h * b.velocity;
  out.velocity = d00 * a.point + d10 * a.velocity + d01 * b.point + d11 * b.velocity;
  return out;
}

void write_path_csv(std::ostream& out, const CurvePath& path) {
  const int n = path.dim();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x_" << i;
  for (int i = 1; i <= n; ++i) out << ",v_" << i;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (const PathSample& s : path.samples()) {
    put(s.t);
    for (int i = 0; i < n; ++i) out << ',', put(s.point[i]);
    for (int i = 0; i < n; ++i) out << ',', put(s.velocity[i]);
    out << '\n';
  }
}

CurvePath geodesic_ivp(const MetricField& metric, const Vector& p, const Vector& v,
                       double t_end, double step) {
  if (p.size() != metric.dim() || v.size() != metric.dim())
    fail(ErrorCode::invalid_argument, "geodesic_ivp: dimension mismatch");
  std::vector<PathSample> samples;
  integrate_geodesic(metric, p, v, t_end, step, &samples);
  if (samples.size() == 1) samples.push_back({t_end > 0 ? t_end : 1.0, p, v});
  return CurvePath(std::move(samples));
}

namespace {

// Damped Newton on the initial velocity; v is updated in place. Returns the
// final endpoint residual (infinite if the start already leaves the domain).
double newton_shoot(const MetricField& metric, const Vector& z1, const Vector& z2, Vector& v,
                    double t_end, const BvpOptions& options) {
  const int n = metric.dim();
  Vector residual(n);
  double norm = shoot(metric, z1, z2, v, t_end, options.step, &residual);
  if (!std::isfinite(norm)) return norm;

  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  for (int iter = 0; iter < options.max_iterations && norm > options.tolerance; ++iter) {
    Matrix jac(n, n);
    for (int j = 0; j < n; ++j) {
      Vector vp = v;
      const double dv = sqrt_eps * std::max(1.0, std::abs(v[j]));
      vp[j] += dv;
      Vector rp(n);
      if (!std::isfinite(shoot(metric, z1, z2, vp, t_end, options.step, &rp))) {
        vp[j] = v[j] - dv;
        shoot(metric, z1, z2, vp, t_end, options.step, &rp);
        jac.col(j) = (residual - rp) / dv;
      } else {
        jac.col(j) = (rp - residual) / dv;
      }
    }
    Eigen::FullPivLU<Matrix> lu(jac);
    if (!lu.isInvertible()) break;
    const Vector delta = lu.solve(residual);

    double lambda = 1.0;
    bool improved = false;
    for (int halvings = 0; halvings < 40; ++halvings, lambda *= 0.5) {
      const Vector trial = v - lambda * delta;
      Vector r(n);
      const double trial_norm = shoot(metric, z1, z2, trial, t_end, options.step, &r);
      if (trial_norm < norm) {
        v = trial;
        residual = r;
        norm = trial_norm;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return norm;
}

}  // namespace

CurvePath geodesic_bvp(const MetricField& metric, const Vector& z1, const Vector& z2,
                       double t_end, const BvpOptions& options) {
  const int n = metric.dim();
  if (z1.size() != n || z2.size() != n)
    fail(ErrorCode::invalid_argument, "geodesic_bvp: dimension mismatch");
  if (!(t_end > 0.0)) fail(ErrorCode::invalid_argument, "geodesic_bvp: t_end must be > 0");
  if (!metric.contains(z1) || !metric.contains(z2))
    fail(ErrorCode::domain, "geodesic_bvp: endpoint outside domain");
  if ((z2 - z1).norm() == 0.0) return geodesic_ivp(metric, z1, Vector::Zero(n), t_end, options.step);

  Vector v = (z2 - z1) / t_end;
  double norm = newton_shoot(metric, z1, z2, v, t_end, options);

  // Continuation: walk the target along the coordinate segment, warm-starting
  // each stage, with finer stages when a pass stalls.
  for (int stages = 4; !(norm <= options.tolerance) && stages <= 256; stages *= 4) {
    Vector w = (z2 - z1) / (stages * t_end);
    double stage_norm = 0.0;
    for (int k = 1; k <= stages && stage_norm <= options.tolerance; ++k) {
      const Vector target = z1 + (z2 - z1) * (static_cast<double>(k) / stages);
      if (!metric.contains(target)) {
        stage_norm = std::numeric_limits<double>::infinity();
        break;
      }
      if (k > 1) w *= static_cast<double>(k) / (k - 1);  // predictor: scale with the target
      stage_norm = newton_shoot(metric, z1, target, w, t_end, options);
    }
    if (stage_norm <= options.tolerance) {
      v = w;
      norm = stage_norm;
    } else if (std::isfinite(stage_norm) && !std::isfinite(norm)) {
      norm = stage_norm;
    }
  }
  if (!(norm <= options.tolerance)) {
    if (!std::isfinite(norm))
      fail(ErrorCode::no_convergence, "geodesic_bvp: shooting leaves the domain");
    std::ostringstream os;
    os << "geodesic_bvp: no convergence, best endpoint residual " << norm;
    throw ConvergenceError(os.str(), norm);
  }
  return geodesic_ivp(metric, z1, v, t_end, options.step);
}

namespace {

// RK4 over the path samples for dY/dt = rhs(t, phi(t), phi'(t), Y); midpoints
// come from Hermite interpolation of the path.
template <class State, class Rhs>
std::vector<State> transport_along(const CurvePath& path, const State& y0, Rhs rhs) {
  const auto& s = path.samples();
  std::vector<State> out;
  out.reserve(s.size());
  out.push_back(y0);
  State y = y0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const double h = s[i + 1].t - s[i].t;
    const PathSample mid = path.interpolate(s[i].t + 0.5 * h);
    const State k1 = rhs(s[i], y);
    const State k2 = rhs(mid, State(y + 0.5 * h * k1));
    const State k3 = rhs(mid, State(y + 0.5 * h * k2));
    const State k4 = rhs(s[i + 1], State(y + h * k3));
    y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back(y);
  }
  return out;
}

}  // namespace

std::vector<Vector> parallel_transport(const MetricField& metric, const CurvePath& path,
                                       const Vector& v0) {
  const int n = metric.dim();
  if (path.dim() != n || v0.size() != n)
    fail(ErrorCode::invalid_argument, "parallel_transport: dimension mismatch");
  return transport_along<Vector>(path, v0, [&](const PathSample& p, const Vector& V) {
    const ChristoffelTensor ch = christoffel_at(metric, p.point);
    Vector dv(n);
    for (int k = 0; k < n; ++k) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc += p.velocity[i] * ch(k, i, j) * V[j];
      dv[k] = -acc;
    }
    return dv;
  });
}

std::vector<double> transport_scalar(const CurvePath& path, const CovectorField& coeff,
                                     double v0) {
  return transport_along<double>(path, v0, [&](const PathSample& p, double V) {
    return -p.velocity.dot(coeff(p.point)) * V;
  });
}

double curve_length(const MetricField& metric, const CurvePath& path) {
  if (path.dim() != metric.dim())
    fail(ErrorCode::invalid_argument, "curve_length: dimension mismatch");
  std::vector<double> t, speed;
  t.reserve(path.size());
  speed.reserve(path.size());
  for (const PathSample& s : path.samples()) {
    t.push_back(s.t);
    speed.push_back(std::sqrt(std::max(0.0, metric.inner(s.point, s.velocity, s.velocity))));
  }
  return quad::simpson(t, speed);
}

MetricField pullback_metric(const MetricField& metric, PointMap map, JacobianMap jac) {
  const int n = metric.dim();
  auto eval = [metric, map, jac, n](const Vector& x) -> Matrix {
    const Matrix J = jac(x);
    if (J.rows() != n || J.cols() != n)
      fail(ErrorCode::invalid_argument, "pullback_metric: Jacobian has wrong shape");
    const double det = J.determinant();
    if (!(std::abs(det) > 1e-14 * std::max(1.0, J.cwiseAbs().maxCoeff())))
      fail(ErrorCode::degenerate, "pullback_metric: singular Jacobian at " + describe(x));
    return J.transpose() * metric.at(map(x)) * J;
  };
  auto domain = [metric, map](const Vector& x) { return metric.contains(map(x)); };
  return MetricField(n, std::move(eval), std::move(domain));
}

}  // namespace hkgeo
