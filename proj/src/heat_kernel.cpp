#include "hkgeo/heat_kernel.hpp"

#include "hkgeo/error.hpp"
#include "hkgeo/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace hkgeo {

namespace {

constexpr double kPi = std::numbers::pi;

const double kQuarticEps = std::pow(std::numeric_limits<double>::epsilon(), 0.25);

// Contracted Christoffel symbols g^{jk} Gamma^h_jk.
Vector contracted_gamma(const MetricField& metric, const Vector& x) {
  const int n = metric.dim();
  const ChristoffelTensor ch = christoffel_at(metric, x);
  const Matrix ginv = metric.inverse_at(x);
  Vector out(n);
  for (int h = 0; h < n; ++h) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s += ginv(j, k) * ch(h, j, k);
    out[h] = s;
  }
  return out;
}

CurvePath reversed(const CurvePath& path) {
  const auto& s = path.samples();
  const double t_end = path.t_end(), t_begin = path.t_begin();
  std::vector<PathSample> out;
  out.reserve(s.size());
  for (auto it = s.rbegin(); it != s.rend(); ++it)
    out.push_back({t_end + t_begin - it->t, it->point, -it->velocity});
  return CurvePath(std::move(out));
}

void check_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t))
    fail(ErrorCode::invalid_argument, "density: t must be finite and > 0");
}

}  // namespace

ConnectionA ConnectionA::zero(int dim) {
  return {dim, [dim](const Vector&) { return Vector::Zero(dim).eval(); }, true};
}

double synge(const HPoint& z1, const HPoint& z2) {
  const double d = distance(z1, z2);
  return 0.5 * d * d;
}

double van_vleck_closed(const HPoint& z1, const HPoint& z2) {
  const double d = distance(z1, z2);
  if (d < 1e-4) return 1.0 - d * d / 6.0 + 7.0 * d * d * d * d / 360.0;
  return d / std::sinh(d);
}

double van_vleck_numeric(const MetricField& metric,
                         const std::function<double(const Vector&, const Vector&)>& syn,
                         const Vector& z1, const Vector& z2, double rel_step) {
  const int n = metric.dim();
  if (z1.size() != n || z2.size() != n)
    fail(ErrorCode::invalid_argument, "van_vleck_numeric: dimension mismatch");
  Vector hx(n), hy(n);
  for (int i = 0; i < n; ++i) {
    hx[i] = rel_step * std::max(1.0, std::abs(z1[i]));
    hy[i] = rel_step * std::max(1.0, std::abs(z2[i]));
  }
  // Mixed differences at h and 2h, Richardson-combined: O(h^4) truncation
  // with a step large enough to keep rounding near 1e-13.
  auto mixed = [&](double scale) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int si : {1, -1})
          for (int sj : {1, -1}) {
            Vector x = z1, y = z2;
            x[i] += si * scale * hx[i];
            y[j] += sj * scale * hy[j];
            acc += si * sj * syn(x, y);
          }
        m(i, j) = -acc / (4.0 * scale * hx[i] * scale * hy[j]);
      }
    return m;
  };
  const Matrix m = (4.0 * mixed(1.0) - mixed(2.0)) / 3.0;
  return m.determinant() / (metric.sqrt_det(z1) * metric.sqrt_det(z2));
}

double bvp_distance(const MetricField& metric, const Vector& z1, const Vector& z2,
                    const BvpOptions& options) {
  if ((z1 - z2).norm() == 0.0) return 0.0;
  const CurvePath path = geodesic_bvp(metric, z1, z2, 1.0, options);
  const PathSample& s = path.front();
  return std::sqrt(metric.inner(s.point, s.velocity, s.velocity));
}

double van_vleck_numeric(const MetricField& metric, const Vector& z1, const Vector& z2,
                         const BvpOptions& options) {
  BvpOptions tight = options;
  tight.tolerance = std::min(options.tolerance, 1e-12);
  auto syn = [&](const Vector& x, const Vector& y) {
    const double d = bvp_distance(metric, x, y, tight);
    return 0.5 * d * d;
  };
  return van_vleck_numeric(metric, syn, z1, z2, 1e-2);
}

ConnectionA connection_A(const MetricField& metric, const DriftField& drift) {
  if (drift.dim != metric.dim() || !drift.eval)
    fail(ErrorCode::invalid_argument, "connection_A: drift dimension mismatch");
  auto eval = [metric, drift](const Vector& x) -> Vector {
    const Vector b = drift.eval(x);
    if (b.size() != metric.dim() || !b.allFinite())
      fail(ErrorCode::numerical, "connection_A: drift not finite");
    return 0.5 * metric.at(x) * (b + contracted_gamma(metric, x));
  };
  return {metric.dim(), eval, false};
}

double par_factor(const ConnectionA& A, const PoincareGeodesic& geo, double t) {
  if (!(t > 0.0)) fail(ErrorCode::invalid_argument, "par_factor: t must be > 0");
  if (A.dim != 2) fail(ErrorCode::invalid_argument, "par_factor: connection must be 2-dimensional");
  if (A.identically_zero) return 1.0;
  auto integrand = [&](double u) {
    auto [p, v] = geodesic_eval(geo, u);
    return v.dot(A.eval(p.vec()));
  };
  return std::exp(-quad::simpson_adaptive(integrand, 0.0, t));
}

double par_factor(const ConnectionA& A, const CurvePath& path) {
  if (A.dim != path.dim()) fail(ErrorCode::invalid_argument, "par_factor: dimension mismatch");
  if (A.identically_zero) return 1.0;
  std::vector<double> t, f;
  t.reserve(path.size());
  f.reserve(path.size());
  for (const PathSample& s : path.samples()) {
    t.push_back(s.t);
    f.push_back(s.velocity.dot(A.eval(s.point)));
  }
  return std::exp(-quad::simpson(t, f));
}

ScalarField q_potential(const MetricField& metric, const ConnectionA& A) {
  if (A.dim != metric.dim()) fail(ErrorCode::invalid_argument, "q_potential: dimension mismatch");
  if (A.identically_zero) return [](const Vector&) { return 0.0; };
  return [metric, A](const Vector& x) {
    const int n = metric.dim();
    // B^i = sqrt(g) g^{ij} A_j
    auto flux = [&](const Vector& p) -> Vector {
      return metric.sqrt_det(p) * (metric.inverse_at(p) * A.eval(p));
    };
    const Vector a = A.eval(x);
    double q = a.dot(metric.inverse_at(x) * a);
    double div = 0.0;
    for (int i = 0; i < n; ++i) {
      // A already carries one difference quotient, so the outer step is eps^(1/4).
      const double h = kQuarticEps * std::max(1.0, std::abs(x[i]));
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      div += (flux(xp)[i] - flux(xm)[i]) / (xp[i] - xm[i]);
    }
    return q + div / metric.sqrt_det(x);
  };
}

double a1_coeff(const MetricField& metric, const ScalarField& Q, const Vector& z) {
  return curvature_at(metric, z).scalar / 6.0 - Q(z);
}

double a1_coeff(const MetricField& metric, const ConnectionA& A, const Vector& z) {
  return a1_coeff(metric, q_potential(metric, A), z);
}

HeatKernelTerms density(const MetricField& metric, const DriftField& drift, double t,
                        const Vector& z1, const Vector& z2, int order,
                        const BvpOptions& options) {
  check_time(t);
  if (order != 0 && order != 1) fail(ErrorCode::invalid_argument, "density: order must be 0 or 1");
  const int n = metric.dim();
  if (!metric.contains(z1) || !metric.contains(z2))
    fail(ErrorCode::domain, "density: endpoint outside domain");

  const ConnectionA A = connection_A(metric, drift);
  HeatKernelTerms out;
  out.t = t;
  out.z1 = z1;
  out.z2 = z2;
  out.order = order;
  if ((z1 - z2).norm() > 0.0) {
    const CurvePath path = geodesic_bvp(metric, z1, z2, 1.0, options);
    const PathSample& s = path.front();
    out.dist = std::sqrt(metric.inner(s.point, s.velocity, s.velocity));
    out.van_vleck = van_vleck_numeric(metric, z1, z2, options);
    out.par = par_factor(A, reversed(path));
  }
  out.synge = 0.5 * out.dist * out.dist;
  const double sd = metric.sqrt_det(z2);
  out.prefactor = sd * std::sqrt(out.van_vleck / std::pow(4.0 * kPi * t, n));
  out.leading = out.prefactor * out.par * std::exp(-out.synge / (2.0 * t));
  out.a1 = a1_coeff(metric, A, z2);
  out.density = order == 0 ? out.leading : out.leading + out.leading * out.a1 * t;
  return out;
}

H2Kernel::H2Kernel() : H2Kernel(ConnectionA::zero(2)) {}

H2Kernel::H2Kernel(ConnectionA A, ScalarField Q)
    : metric_(hn_metric(2)), A_(std::move(A)), Q_(std::move(Q)) {
  if (A_.dim != 2) fail(ErrorCode::invalid_argument, "H2Kernel: connection must be 2-dimensional");
  if (!Q_) Q_ = q_potential(metric_, A_);
  // H^2 is homogeneous; one evaluation of the curvature definitions suffices.
  scalar_ = curvature_at(metric_, Vector{{0.0, 1.0}}).scalar;
}

HeatKernelTerms H2Kernel::operator()(double t, const HPoint& z1, const HPoint& z2,
                                     int order) const {
  check_time(t);
  if (order != 0 && order != 1) fail(ErrorCode::invalid_argument, "density: order must be 0 or 1");
  HeatKernelTerms out;
  out.t = t;
  out.z1 = z1.vec();
  out.z2 = z2.vec();
  out.order = order;
  out.dist = distance(z1, z2);
  out.synge = 0.5 * out.dist * out.dist;
  out.van_vleck = van_vleck_closed(z1, z2);
  if (!(z1 == z2) && !A_.identically_zero)
    out.par = par_factor(A_, geodesic_between(z2, z1, 1.0), 1.0);
  // sqrt(det g(z2)) = 1 / y2^2
  out.prefactor = std::sqrt(out.van_vleck) / (4.0 * kPi * t * z2.y * z2.y);
  out.leading = out.prefactor * out.par * std::exp(-out.synge / (2.0 * t));
  out.a1 = scalar_ / 6.0 - Q_(out.z2);
  out.density = order == 0 ? out.leading : out.leading + out.leading * out.a1 * t;
  return out;
}

double h2_density_mass(const H2Kernel& kernel, double t, const HPoint& z1, int order,
                       double tail, int nodes) {
  check_time(t);
  if (!(tail > 0.0 && tail < 1.0)) fail(ErrorCode::invalid_argument, "h2_density_mass: tail must be in (0, 1)");
  const double D = std::sqrt(4.0 * t * std::log(1.0 / tail));
  const auto& gl = quad::gauss_legendre(nodes);
  const double hx = z1.y * std::sinh(D);
  std::vector<double> rows(nodes), cols(nodes);
  for (int i = 0; i < nodes; ++i) {
    const double x = z1.x + hx * gl.nodes[i];
    for (int j = 0; j < nodes; ++j) {
      const double y = z1.y * std::exp(D * gl.nodes[j]);
      cols[j] = gl.weights[j] * kernel(t, z1, {x, y}, order).density * y;
    }
    rows[i] = gl.weights[i] * quad::pairwise_sum(cols);
  }
  return hx * D * quad::pairwise_sum(rows);
}

}  // namespace hkgeo
