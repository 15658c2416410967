#include "hkgeo/hkgeo.h"

#include "hkgeo/error.hpp"
#include "hkgeo/geometry.hpp"
#include "hkgeo/heat_kernel.hpp"
#include "hkgeo/mc_oracle.hpp"
#include "hkgeo/poincare.hpp"
#include "hkgeo/sabr.hpp"

#include <cstring>
#include <new>
#include <string>

#ifndef HKGEO_VERSION
#define HKGEO_VERSION "0.0.0"
#endif

struct hkg_metric {
  hkgeo::MetricField field;
};

struct hkg_path {
  hkgeo::CurvePath path;
};

struct hkg_sabr {
  hkgeo::SabrParams params;
  hkgeo::SabrDensity density;
};

struct hkg_mc_run {
  std::vector<hkgeo::TerminalState> states;
};

namespace {

thread_local std::string g_last_error;

hkg_status to_status(hkgeo::ErrorCode code) {
  switch (code) {
    case hkgeo::ErrorCode::invalid_argument: return HKG_ERR_INVALID_ARGUMENT;
    case hkgeo::ErrorCode::domain: return HKG_ERR_DOMAIN;
    case hkgeo::ErrorCode::degenerate: return HKG_ERR_DEGENERATE;
    case hkgeo::ErrorCode::no_convergence: return HKG_ERR_NO_CONVERGENCE;
    case hkgeo::ErrorCode::numerical: return HKG_ERR_NUMERICAL;
  }
  return HKG_ERR_INTERNAL;
}

template <class F>
hkg_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return HKG_OK;
  } catch (const hkgeo::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HKG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HKG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return HKG_ERR_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) hkgeo::fail(hkgeo::ErrorCode::invalid_argument, what);
}

hkgeo::Vector to_vector(const double* p, int n) {
  return Eigen::Map<const hkgeo::Vector>(p, n);
}

void fill_terms(const hkgeo::HeatKernelTerms& t, hkg_hk_terms* out) {
  *out = {t.t, t.dist, t.synge, t.van_vleck, t.par, t.a0, t.a1, t.prefactor, t.leading, t.density};
}

hkg_h2_geodesic to_c(const hkgeo::PoincareGeodesic& g) {
  hkg_h2_geodesic out{};
  if (const auto* v = std::get_if<hkgeo::VerticalLine>(&g)) {
    out.kind = HKG_VERTICAL;
    out.a = v->a;
    out.b = v->b;
    out.alpha = v->alpha;
  } else {
    const auto& s = std::get<hkgeo::Semicircle>(g);
    out.kind = HKG_SEMICIRCLE;
    out.c = s.c;
    out.r = s.r;
    out.alpha = s.alpha;
    out.t0 = s.t0;
  }
  return out;
}

hkgeo::PoincareGeodesic from_c(const hkg_h2_geodesic& g) {
  if (g.kind == HKG_VERTICAL) return hkgeo::VerticalLine{g.a, g.b, g.alpha};
  return hkgeo::Semicircle{g.c, g.r, g.alpha, g.t0};
}

hkgeo::McConfig to_cfg(const hkg_mc_config& c) {
  hkgeo::McConfig cfg;
  cfg.n_paths = c.n_paths;
  cfg.n_steps = c.n_steps;
  cfg.seed = c.seed;
  cfg.threads = c.threads;
  return cfg;
}

}  // namespace

extern "C" {

const char* hkg_version(void) { return HKGEO_VERSION; }

const char* hkg_last_error(void) { return g_last_error.c_str(); }

const char* hkg_status_name(hkg_status status) {
  switch (status) {
    case HKG_OK: return "ok";
    case HKG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case HKG_ERR_DOMAIN: return "domain error";
    case HKG_ERR_DEGENERATE: return "degenerate input";
    case HKG_ERR_NO_CONVERGENCE: return "no convergence";
    case HKG_ERR_NUMERICAL: return "numerical error";
    case HKG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

hkg_status hkg_metric_euclidean(int dim, hkg_metric** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    require(dim >= 1, "dimension must be >= 1");
    *out = new hkg_metric{hkgeo::euclidean_metric(dim)};
  });
}

hkg_status hkg_metric_hn(int dim, hkg_metric** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new hkg_metric{hkgeo::hn_metric(dim)};
  });
}

void hkg_metric_destroy(hkg_metric* metric) { delete metric; }

int hkg_metric_dim(const hkg_metric* metric) { return metric ? metric->field.dim() : 0; }

hkg_status hkg_curvature(const hkg_metric* metric, const double* x, double* scalar, double* ricci,
                         double* christoffel) {
  return guarded([&] {
    require(metric && x, "metric or point is NULL");
    const int n = metric->field.dim();
    const hkgeo::Vector p = to_vector(x, n);
    const hkgeo::CurvatureBundle c = hkgeo::curvature_at(metric->field, p);
    if (scalar) *scalar = c.scalar;
    if (ricci)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ricci[i * n + j] = c.ricci(i, j);
    if (christoffel) {
      const hkgeo::ChristoffelTensor g = hkgeo::christoffel_at(metric->field, p);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) christoffel[(k * n + i) * n + j] = g(k, i, j);
    }
  });
}

hkg_status hkg_geodesic_ivp(const hkg_metric* metric, const double* p, const double* v,
                            double t_end, double step, hkg_path** out) {
  return guarded([&] {
    require(metric && p && v && out, "NULL argument");
    const int n = metric->field.dim();
    *out = new hkg_path{hkgeo::geodesic_ivp(metric->field, to_vector(p, n), to_vector(v, n), t_end,
                                            step)};
  });
}

hkg_status hkg_geodesic_bvp(const hkg_metric* metric, const double* z1, const double* z2,
                            double t_end, double step, hkg_path** out) {
  return guarded([&] {
    require(metric && z1 && z2 && out, "NULL argument");
    const int n = metric->field.dim();
    hkgeo::BvpOptions o;
    o.step = step;
    *out = new hkg_path{
        hkgeo::geodesic_bvp(metric->field, to_vector(z1, n), to_vector(z2, n), t_end, o)};
  });
}

void hkg_path_destroy(hkg_path* path) { delete path; }

size_t hkg_path_size(const hkg_path* path) { return path ? path->path.size() : 0; }

int hkg_path_dim(const hkg_path* path) { return path ? path->path.dim() : 0; }

hkg_status hkg_path_sample(const hkg_path* path, size_t index, double* t, double* point,
                           double* velocity) {
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    require(index < path->path.size(), "sample index out of range");
    const hkgeo::PathSample& s = path->path.samples()[index];
    if (t) *t = s.t;
    const int n = path->path.dim();
    for (int i = 0; i < n; ++i) {
      if (point) point[i] = s.point[i];
      if (velocity) velocity[i] = s.velocity[i];
    }
  });
}

hkg_status hkg_path_interpolate(const hkg_path* path, double t, double* point,
                                double* velocity) {
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    require(t >= path->path.t_begin() && t <= path->path.t_end(), "t outside the path range");
    const hkgeo::PathSample s = path->path.interpolate(t);
    for (int i = 0; i < path->path.dim(); ++i) {
      if (point) point[i] = s.point[i];
      if (velocity) velocity[i] = s.velocity[i];
    }
  });
}

hkg_status hkg_path_length(const hkg_metric* metric, const hkg_path* path, double* out) {
  return guarded([&] {
    require(metric && path && out, "NULL argument");
    *out = hkgeo::curve_length(metric->field, path->path);
  });
}

hkg_status hkg_h2_distance(double x1, double y1, double x2, double y2, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = hkgeo::distance({x1, y1}, {x2, y2});
  });
}

hkg_status hkg_h2_geodesic_between(double x1, double y1, double x2, double y2, double tau,
                                   hkg_h2_geodesic* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = to_c(hkgeo::geodesic_between({x1, y1}, {x2, y2}, tau));
  });
}

hkg_status hkg_h2_geodesic_from_initial(double x, double y, double vx, double vy,
                                        hkg_h2_geodesic* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    const auto g = hkgeo::geodesic_from_initial({x, y}, hkgeo::Vector{{vx, vy}});
    if (!g) hkgeo::fail(hkgeo::ErrorCode::degenerate, "zero initial velocity: constant curve");
    *out = to_c(*g);
  });
}

hkg_status hkg_h2_geodesic_eval(const hkg_h2_geodesic* g, double t, double position[2],
                                double velocity[2]) {
  return guarded([&] {
    require(g != nullptr, "geodesic is NULL");
    const auto [p, v] = hkgeo::geodesic_eval(from_c(*g), t);
    if (position) position[0] = p.x, position[1] = p.y;
    if (velocity) velocity[0] = v[0], velocity[1] = v[1];
  });
}

hkg_status hkg_density(const hkg_metric* metric, double t, const double* z1, const double* z2,
                       int order, hkg_hk_terms* out) {
  return guarded([&] {
    require(metric && z1 && z2 && out, "NULL argument");
    const int n = metric->field.dim();
    fill_terms(hkgeo::density(metric->field, hkgeo::DriftField::zero(n), t, to_vector(z1, n),
                              to_vector(z2, n), order),
               out);
  });
}

hkg_status hkg_h2_density(double t, double x1, double y1, double x2, double y2, int order,
                          hkg_hk_terms* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    static const hkgeo::H2Kernel kernel;
    fill_terms(kernel(t, {x1, y1}, {x2, y2}, order), out);
  });
}

hkg_status hkg_h2_density_mass(double t, double x1, double y1, int order, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    static const hkgeo::H2Kernel kernel;
    *out = hkgeo::h2_density_mass(kernel, t, {x1, y1}, order);
  });
}

hkg_status hkg_sabr_create(const hkg_sabr_params* params, hkg_sabr** out) {
  return guarded([&] {
    require(params && out, "NULL argument");
    const hkgeo::SabrParams p{params->f0, params->alpha, params->beta, params->nu, params->rho};
    *out = new hkg_sabr{p, hkgeo::SabrDensity(p)};
  });
}

void hkg_sabr_destroy(hkg_sabr* model) { delete model; }

hkg_status hkg_sabr_to_poincare(const hkg_sabr* model, double f, double a, double out[4]) {
  return guarded([&] {
    require(model && out, "NULL argument");
    const hkgeo::PoincareCoords c = hkgeo::to_poincare(model->params, f, a);
    out[0] = c.q, out[1] = c.xi, out[2] = c.x, out[3] = c.y;
  });
}

hkg_status hkg_sabr_density(const hkg_sabr* model, double t, double f, double a, int order,
                            double* density, hkg_hk_terms* terms) {
  return guarded([&] {
    require(model != nullptr, "model is NULL");
    const hkgeo::HeatKernelTerms k = model->density.terms(t, f, a, order);
    if (density) *density = k.density * hkgeo::jacobian_factor(model->params, f);
    if (terms) fill_terms(k, terms);
  });
}

hkg_status hkg_sabr_density_mass(const hkg_sabr* model, double t, int order, double* out) {
  return guarded([&] {
    require(model && out, "NULL argument");
    *out = hkgeo::density_mass(model->params, t, order);
  });
}

hkg_status hkg_sabr_bin_mass(const hkg_sabr* model, double t, int order, double f_lo, double f_hi,
                             double a_lo, double a_hi, double* out) {
  return guarded([&] {
    require(model && out, "NULL argument");
    *out = hkgeo::density_bin_mass(model->density, t, order, f_lo, f_hi, a_lo, a_hi);
  });
}

hkg_status hkg_sabr_call_price(const hkg_sabr* model, double K, double T, int order, int n_f,
                               int n_a, double* out) {
  return guarded([&] {
    require(model && out, "NULL argument");
    hkgeo::PriceOptions o;
    if (n_f > 0) o.n_f = n_f;
    if (n_a > 0) o.n_a = n_a;
    *out = hkgeo::call_price_hk(model->params, K, T, order, o);
  });
}

hkg_status hkg_sabr_hagan_vol(const hkg_sabr* model, double K, double T, double* out) {
  return guarded([&] {
    require(model && out, "NULL argument");
    *out = hkgeo::hagan_vol(model->params, K, T);
  });
}

hkg_status hkg_black_call(double f0, double K, double T, double sigma, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    require(f0 > 0 && K > 0 && T > 0 && sigma >= 0, "black_call: arguments out of range");
    *out = hkgeo::black_call(f0, K, T, sigma);
  });
}

hkg_status hkg_implied_vol(double f0, double K, double T, double price, double* out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = hkgeo::implied_vol_from_price(f0, K, T, price);
  });
}

hkg_status hkg_mc_simulate(const hkg_sabr* model, double T, const hkg_mc_config* cfg,
                           hkg_mc_run** out) {
  return guarded([&] {
    require(model && cfg && out, "NULL argument");
    *out = new hkg_mc_run{hkgeo::simulate_terminal(model->params, T, to_cfg(*cfg))};
  });
}

void hkg_mc_destroy(hkg_mc_run* run) { delete run; }

hkg_status hkg_mc_price_call(const hkg_mc_run* run, double K, hkg_mc_estimate* out) {
  return guarded([&] {
    require(run && out, "NULL argument");
    const hkgeo::McResult r = hkgeo::price_from_states(run->states, K);
    *out = {r.estimate, r.std_error, r.n_effective};
  });
}

hkg_status hkg_mc_histogram(const hkg_mc_run* run, const double* f_edges, size_t n_f_edges,
                            const double* a_edges, size_t n_a_edges, hkg_hist_bin* bins,
                            double* absorbed_mass, double* outside_mass) {
  return guarded([&] {
    require(run && f_edges && a_edges && bins, "NULL argument");
    const hkgeo::McResult r = hkgeo::histogram_from_states(
        run->states, std::vector<double>(f_edges, f_edges + n_f_edges),
        std::vector<double>(a_edges, a_edges + n_a_edges));
    const auto& h = *r.histogram;
    for (std::size_t i = 0; i < h.size(); ++i)
      bins[i] = {h[i].f_low, h[i].f_high, h[i].a_low, h[i].a_high, h[i].mass, h[i].std_err};
    if (absorbed_mass) *absorbed_mass = r.absorbed_mass;
    if (outside_mass) *outside_mass = r.outside_mass;
  });
}

}  // extern "C"
