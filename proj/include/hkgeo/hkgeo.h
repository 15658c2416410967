/* C interface to the hkgeo library.
 *
 * Every fallible call returns an hkg_status. On failure the message is
 * available from hkg_last_error() on the calling thread until the next call
 * into the library. Objects are opaque and released with their _destroy
 * function; destroy functions accept NULL. */
#ifndef HKGEO_H
#define HKGEO_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define HKG_API __declspec(dllexport)
#else
#define HKG_API __attribute__((visibility("default")))
#endif

typedef enum hkg_status {
  HKG_OK = 0,
  HKG_ERR_INVALID_ARGUMENT = 1,
  HKG_ERR_DOMAIN = 2,
  HKG_ERR_DEGENERATE = 3,
  HKG_ERR_NO_CONVERGENCE = 4,
  HKG_ERR_NUMERICAL = 5,
  HKG_ERR_INTERNAL = 6
} hkg_status;

HKG_API const char* hkg_version(void);
HKG_API const char* hkg_last_error(void);
HKG_API const char* hkg_status_name(hkg_status status);

/* ---- metrics and numeric geometry ------------------------------------- */

typedef struct hkg_metric hkg_metric;
typedef struct hkg_path hkg_path;

HKG_API hkg_status hkg_metric_euclidean(int dim, hkg_metric** out);
/* g_ij = delta_ij / x_n^2 on x_n > 0 */
HKG_API hkg_status hkg_metric_hn(int dim, hkg_metric** out);
HKG_API void hkg_metric_destroy(hkg_metric* metric);
HKG_API int hkg_metric_dim(const hkg_metric* metric);

/* christoffel: n^3 entries [k][i][j] = Gamma^k_ij, may be NULL.
 * ricci: n^2 entries row-major, may be NULL. */
HKG_API hkg_status hkg_curvature(const hkg_metric* metric, const double* x, double* scalar,
                                 double* ricci, double* christoffel);

HKG_API hkg_status hkg_geodesic_ivp(const hkg_metric* metric, const double* p, const double* v,
                                    double t_end, double step, hkg_path** out);
HKG_API hkg_status hkg_geodesic_bvp(const hkg_metric* metric, const double* z1, const double* z2,
                                    double t_end, double step, hkg_path** out);
HKG_API void hkg_path_destroy(hkg_path* path);
HKG_API size_t hkg_path_size(const hkg_path* path);
HKG_API int hkg_path_dim(const hkg_path* path);
/* point and velocity receive dim entries each; either may be NULL. */
HKG_API hkg_status hkg_path_sample(const hkg_path* path, size_t index, double* t, double* point,
                                   double* velocity);
/* Hermite-interpolated state at t in [t_begin, t_end]. */
HKG_API hkg_status hkg_path_interpolate(const hkg_path* path, double t, double* point,
                                        double* velocity);
HKG_API hkg_status hkg_path_length(const hkg_metric* metric, const hkg_path* path, double* out);

/* ---- Poincare half-plane ---------------------------------------------- */

typedef enum hkg_geodesic_kind { HKG_VERTICAL = 0, HKG_SEMICIRCLE = 1 } hkg_geodesic_kind;

/* VERTICAL:   phi(t) = (a, b exp(alpha t))
 * SEMICIRCLE: phi(t) = (r tanh(alpha t + t0) + c, r / cosh(alpha t + t0)) */
typedef struct hkg_h2_geodesic {
  hkg_geodesic_kind kind;
  double a, b, c, r, alpha, t0;
} hkg_h2_geodesic;

HKG_API hkg_status hkg_h2_distance(double x1, double y1, double x2, double y2, double* out);
HKG_API hkg_status hkg_h2_geodesic_between(double x1, double y1, double x2, double y2, double tau,
                                           hkg_h2_geodesic* out);
/* HKG_ERR_DEGENERATE for a zero velocity. */
HKG_API hkg_status hkg_h2_geodesic_from_initial(double x, double y, double vx, double vy,
                                                hkg_h2_geodesic* out);
HKG_API hkg_status hkg_h2_geodesic_eval(const hkg_h2_geodesic* g, double t, double position[2],
                                        double velocity[2]);

/* ---- heat kernel ------------------------------------------------------- */

typedef struct hkg_hk_terms {
  double t;
  double dist;
  double synge;
  double van_vleck;
  double par;
  double a0;
  double a1;
  double prefactor;
  double leading;
  double density;
} hkg_hk_terms;

/* Zero-drift kernel of the metric; generic BVP-based evaluation. */
HKG_API hkg_status hkg_density(const hkg_metric* metric, double t, const double* z1,
                               const double* z2, int order, hkg_hk_terms* out);
/* Laplace-Beltrami kernel on H^2 with closed forms. */
HKG_API hkg_status hkg_h2_density(double t, double x1, double y1, double x2, double y2, int order,
                                  hkg_hk_terms* out);
/* Integral of the H^2 density in (x, y) over a truncated rectangle. */
HKG_API hkg_status hkg_h2_density_mass(double t, double x1, double y1, int order, double* out);

/* ---- SABR -------------------------------------------------------------- */

typedef struct hkg_sabr_params {
  double f0;
  double alpha;
  double beta;
  double nu;
  double rho;
} hkg_sabr_params;

typedef struct hkg_sabr hkg_sabr;

HKG_API hkg_status hkg_sabr_create(const hkg_sabr_params* params, hkg_sabr** out);
HKG_API void hkg_sabr_destroy(hkg_sabr* model);

/* out[4] = (q, xi, x, y) */
HKG_API hkg_status hkg_sabr_to_poincare(const hkg_sabr* model, double f, double a, double out[4]);
/* Density in (f, a); terms (half-plane quantities at tau) may be NULL. */
HKG_API hkg_status hkg_sabr_density(const hkg_sabr* model, double t, double f, double a, int order,
                                    double* density, hkg_hk_terms* terms);
HKG_API hkg_status hkg_sabr_density_mass(const hkg_sabr* model, double t, int order, double* out);
HKG_API hkg_status hkg_sabr_bin_mass(const hkg_sabr* model, double t, int order, double f_lo,
                                     double f_hi, double a_lo, double a_hi, double* out);
/* n_f, n_a <= 0 select the defaults (256 x 128). */
HKG_API hkg_status hkg_sabr_call_price(const hkg_sabr* model, double K, double T, int order,
                                       int n_f, int n_a, double* out);
HKG_API hkg_status hkg_sabr_hagan_vol(const hkg_sabr* model, double K, double T, double* out);

HKG_API hkg_status hkg_black_call(double f0, double K, double T, double sigma, double* out);
HKG_API hkg_status hkg_implied_vol(double f0, double K, double T, double price, double* out);

/* ---- Monte Carlo ------------------------------------------------------- */

typedef struct hkg_mc_config {
  int64_t n_paths;
  int n_steps;
  uint64_t seed;
  int threads; /* 0: hardware concurrency */
} hkg_mc_config;

typedef struct hkg_mc_estimate {
  double estimate;
  double std_error;
  int64_t n_effective;
} hkg_mc_estimate;

typedef struct hkg_hist_bin {
  double f_low, f_high, a_low, a_high;
  double mass;
  double std_err;
} hkg_hist_bin;

typedef struct hkg_mc_run hkg_mc_run;

/* Simulates terminal states once; prices and histograms reuse them. */
HKG_API hkg_status hkg_mc_simulate(const hkg_sabr* model, double T, const hkg_mc_config* cfg,
                                   hkg_mc_run** out);
HKG_API void hkg_mc_destroy(hkg_mc_run* run);
HKG_API hkg_status hkg_mc_price_call(const hkg_mc_run* run, double K, hkg_mc_estimate* out);
/* Fills bins row-major in (f, a): (n_f_edges - 1) * (n_a_edges - 1) entries. */
HKG_API hkg_status hkg_mc_histogram(const hkg_mc_run* run, const double* f_edges, size_t n_f_edges,
                                    const double* a_edges, size_t n_a_edges, hkg_hist_bin* bins,
                                    double* absorbed_mass, double* outside_mass);

#ifdef __cplusplus
}
#endif

#endif /* HKGEO_H */
