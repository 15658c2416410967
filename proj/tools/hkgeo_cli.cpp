// hkgeo_cli: batch front end over the hkgeo C API.
//
//   hkgeo_cli <curvature|geodesic|density|smile|validate> CONFIG.json
//             [--output FILE] [--normalize] [--verbose]
//
// Exit codes: 0 ok, 1 acceptance check failed, 2 config error, 3 numerical error.

#include "hkgeo/hkgeo.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitAcceptance = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::string output;
  bool normalize = false;
  bool verbose = false;
};

void check(hkg_status s, const std::string& what) {
  if (s == HKG_OK) return;
  const std::string msg = what + ": " + hkg_last_error();
  if (s == HKG_ERR_INVALID_ARGUMENT || s == HKG_ERR_DEGENERATE) throw ConfigError(msg);
  throw NumericalError(msg);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

// ---- config access ---------------------------------------------------------

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* a : keys) ok = ok || k == a;
    if (!ok) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

const json& need(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  return obj.at(key);
}

double number(const json& v, const std::string& what) {
  if (!v.is_number()) throw ConfigError(what + " must be a number");
  return v.get<double>();
}

double number(const json& obj, const char* key, const std::string& where, double fallback) {
  return obj.contains(key) ? number(obj.at(key), where + "." + key) : fallback;
}

long long integer(const json& obj, const char* key, const std::string& where, long long fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return v.get<long long>();
}

std::vector<double> numbers(const json& v, const std::string& what) {
  if (!v.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const json& e : v) out.push_back(number(e, what));
  return out;
}

std::vector<double> point(const json& v, std::size_t dim, const std::string& what) {
  std::vector<double> p = numbers(v, what);
  if (p.size() != dim) throw ConfigError(what + " must have " + std::to_string(dim) + " entries");
  return p;
}

// [lo, hi, n] -> n equally spaced values
std::vector<double> axis(const json& v, const std::string& what) {
  const std::vector<double> r = numbers(v, what);
  if (r.size() != 3) throw ConfigError(what + " must be [lo, hi, n]");
  const double n = r[2];
  if (!(n >= 1) || n != std::floor(n) || n > 1e6) throw ConfigError(what + ": n must be a positive integer");
  if (!(r[1] >= r[0])) throw ConfigError(what + ": hi must be >= lo");
  const int count = static_cast<int>(n);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
    out[i] = count == 1 ? r[0] : (i == count - 1 ? r[1] : r[0] + (r[1] - r[0]) * i / (count - 1));
  return out;
}

int order_of(const json& cfg) {
  const long long o = integer(cfg, "order", "config", 1);
  if (o != 0 && o != 1) throw ConfigError("order must be 0 or 1");
  return static_cast<int>(o);
}

hkg_sabr_params sabr_params(const json& cfg, bool with_defaults) {
  const json empty = json::object();
  const json& p = cfg.contains("params") ? cfg.at("params") : (with_defaults ? empty : need(cfg, "params", "config"));
  allow_keys(p, {"f0", "alpha", "beta", "nu", "rho"}, "params");
  auto get = [&](const char* k, double d) {
    if (!with_defaults) need(p, k, "params");
    return number(p, k, "params", d);
  };
  return {get("f0", 100.0), get("alpha", 0.3), get("beta", 1.0), get("nu", 0.3), get("rho", -0.5)};
}

struct Sabr {
  explicit Sabr(const hkg_sabr_params& p) { check(hkg_sabr_create(&p, &handle), "params"); }
  ~Sabr() { hkg_sabr_destroy(handle); }
  Sabr(const Sabr&) = delete;
  Sabr& operator=(const Sabr&) = delete;
  hkg_sabr* handle = nullptr;
};

// ---- commands ----------------------------------------------------------------

std::string cmd_curvature(const json& cfg, const Options&) {
  allow_keys(cfg, {"metric", "dim", "grid"}, "config");
  const json& m = need(cfg, "metric", "config");
  if (!m.is_string()) throw ConfigError("metric must be a string");
  const std::string metric_name = m.get<std::string>();
  const long long dim = integer(cfg, "dim", "config", 2);
  if (dim < 1 || dim > 16) throw ConfigError("dim must be in [1, 16]");
  hkg_metric* raw = nullptr;
  if (metric_name == "euclidean") {
    check(hkg_metric_euclidean(static_cast<int>(dim), &raw), "metric");
  } else if (metric_name == "poincare-hn" || metric_name == "poincare-h2") {
    check(hkg_metric_hn(static_cast<int>(dim), &raw), "metric");
  } else {
    throw ConfigError("metric must be 'euclidean' or 'poincare-hn'");
  }
  std::unique_ptr<hkg_metric, decltype(&hkg_metric_destroy)> metric(raw, hkg_metric_destroy);

  const json& grid = need(cfg, "grid", "config");
  if (!grid.is_array() || grid.size() != static_cast<std::size_t>(dim))
    throw ConfigError("grid must list one [lo, hi, n] axis per dimension");
  std::vector<std::vector<double>> axes;
  for (std::size_t i = 0; i < grid.size(); ++i) axes.push_back(axis(grid[i], "grid[" + std::to_string(i) + "]"));

  const int n = static_cast<int>(dim);
  std::ostringstream out;
  for (int i = 1; i <= n; ++i) out << (i > 1 ? "," : "") << "x_" << i;
  out << ",scalar";
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) out << ",ricci_" << i << j;
  out << '\n';

  std::vector<std::size_t> idx(n, 0);
  std::vector<double> x(n), ricci(n * n);
  while (true) {
    for (int i = 0; i < n; ++i) x[i] = axes[i][idx[i]];
    double scalar = 0.0;
    check(hkg_curvature(metric.get(), x.data(), &scalar, ricci.data(), nullptr), "curvature");
    for (int i = 0; i < n; ++i) out << (i ? "," : "") << fmt(x[i]);
    out << ',' << fmt(scalar);
    for (double r : ricci) out << ',' << fmt(r);
    out << '\n';
    int k = n - 1;
    while (k >= 0 && ++idx[k] == axes[k].size()) idx[k--] = 0;
    if (k < 0) break;
  }
  return out.str();
}

std::string geodesic_params(const hkg_h2_geodesic& g) {
  if (g.kind == HKG_VERTICAL)
    return "# kind=vertical,a=" + fmt(g.a) + ",b=" + fmt(g.b) + ",alpha=" + fmt(g.alpha) + "\n";
  return "# kind=semicircle,c=" + fmt(g.c) + ",r=" + fmt(g.r) + ",alpha=" + fmt(g.alpha) +
         ",t0=" + fmt(g.t0) + "\n";
}

std::string cmd_geodesic(const json& cfg, const Options&) {
  allow_keys(cfg, {"mode", "z1", "z2", "p", "v", "t_end", "samples", "step"}, "config");
  std::string mode = "closed";
  if (cfg.contains("mode")) {
    if (!cfg.at("mode").is_string()) throw ConfigError("mode must be a string");
    mode = cfg.at("mode").get<std::string>();
  }
  if (mode != "closed" && mode != "ode") throw ConfigError("mode must be 'closed' or 'ode'");
  const bool endpoints = cfg.contains("z1") || cfg.contains("z2");
  if (endpoints == (cfg.contains("p") || cfg.contains("v")))
    throw ConfigError("give either z1 and z2, or p and v");
  const double t_end = number(cfg, "t_end", "config", 1.0);
  if (!(t_end > 0.0)) throw ConfigError("t_end must be > 0");
  const long long samples = integer(cfg, "samples", "config", 100);
  if (samples < 1 || samples > 10000000) throw ConfigError("samples must be >= 1");
  const double step = number(cfg, "step", "config", 1e-3);
  if (!(step > 0.0)) throw ConfigError("step must be > 0");

  std::vector<double> a, b;
  if (endpoints) {
    a = point(need(cfg, "z1", "config"), 2, "z1");
    b = point(need(cfg, "z2", "config"), 2, "z2");
  } else {
    a = point(need(cfg, "p", "config"), 2, "p");
    b = point(need(cfg, "v", "config"), 2, "v");
  }
  if (!(a[1] > 0.0) || (endpoints && !(b[1] > 0.0))) throw ConfigError("points need y > 0");

  // Closed-form parameters are reported in both modes.
  hkg_h2_geodesic g{};
  if (endpoints) {
    check(hkg_h2_geodesic_between(a[0], a[1], b[0], b[1], t_end, &g), "geodesic");
  } else {
    check(hkg_h2_geodesic_from_initial(a[0], a[1], b[0], b[1], &g), "geodesic");
  }

  std::ostringstream out;
  out << geodesic_params(g);
  std::vector<std::array<double, 5>> rows;
  double length = 0.0;
  if (mode == "closed") {
    for (long long i = 0; i <= samples; ++i) {
      const double t = i == samples ? t_end : t_end * static_cast<double>(i) / samples;
      double p[2], v[2];
      check(hkg_h2_geodesic_eval(&g, t, p, v), "geodesic");
      rows.push_back({t, p[0], p[1], v[0], v[1]});
    }
    length = std::abs(g.alpha) * t_end;
  } else {
    hkg_metric* raw = nullptr;
    check(hkg_metric_hn(2, &raw), "metric");
    std::unique_ptr<hkg_metric, decltype(&hkg_metric_destroy)> metric(raw, hkg_metric_destroy);
    hkg_path* path_raw = nullptr;
    if (endpoints) {
      check(hkg_geodesic_bvp(metric.get(), a.data(), b.data(), t_end, step, &path_raw), "geodesic_bvp");
    } else {
      check(hkg_geodesic_ivp(metric.get(), a.data(), b.data(), t_end, step, &path_raw), "geodesic_ivp");
    }
    std::unique_ptr<hkg_path, decltype(&hkg_path_destroy)> path(path_raw, hkg_path_destroy);
    for (long long i = 0; i <= samples; ++i) {
      const double t = i == samples ? t_end : t_end * static_cast<double>(i) / samples;
      double p[2], v[2];
      check(hkg_path_interpolate(path.get(), t, p, v), "path");
      rows.push_back({t, p[0], p[1], v[0], v[1]});
    }
    check(hkg_path_length(metric.get(), path.get(), &length), "length");
  }
  out << "# length=" << fmt(length) << '\n';
  out << "t,x,y,vx,vy\n";
  for (const auto& r : rows)
    out << fmt(r[0]) << ',' << fmt(r[1]) << ',' << fmt(r[2]) << ',' << fmt(r[3]) << ',' << fmt(r[4]) << '\n';
  return out.str();
}

std::vector<double> times_of(const json& cfg) {
  const json& t = need(cfg, "t", "config");
  std::vector<double> ts = t.is_array() ? numbers(t, "t") : std::vector<double>{number(t, "t")};
  if (ts.empty()) throw ConfigError("t must not be empty");
  for (double v : ts)
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("t must be > 0");
  return ts;
}

std::string cmd_density(const json& cfg, const Options& opt) {
  allow_keys(cfg, {"model", "order", "t", "z1", "grid", "params"}, "config");
  const json& m = need(cfg, "model", "config");
  if (!m.is_string()) throw ConfigError("model must be a string");
  const std::string model = m.get<std::string>();
  const int order = order_of(cfg);
  const std::vector<double> ts = times_of(cfg);
  const json& grid = need(cfg, "grid", "config");
  std::ostringstream out;
  std::ostringstream tail;

  if (model == "h2") {
    if (cfg.contains("params")) throw ConfigError("params only applies to model 'sabr'");
    allow_keys(grid, {"x", "y"}, "grid");
    const std::vector<double> z1 = point(need(cfg, "z1", "config"), 2, "z1");
    if (!(z1[1] > 0.0)) throw ConfigError("z1 needs y > 0");
    const auto xs = axis(need(grid, "x", "grid"), "grid.x");
    const auto ys = axis(need(grid, "y", "grid"), "grid.y");
    for (double y : ys)
      if (!(y > 0.0)) throw ConfigError("grid.y must be > 0");
    out << "t,x2,y2,dist,van_vleck,par,density,a1,leading\n";
    for (double t : ts) {
      for (double x : xs)
        for (double y : ys) {
          hkg_hk_terms k;
          check(hkg_h2_density(t, z1[0], z1[1], x, y, order, &k), "density");
          out << fmt(t) << ',' << fmt(x) << ',' << fmt(y) << ',' << fmt(k.dist) << ','
              << fmt(k.van_vleck) << ',' << fmt(k.par) << ',' << fmt(k.density) << ','
              << fmt(k.a1) << ',' << fmt(k.leading) << '\n';
        }
      if (opt.normalize) {
        double mass = 0.0;
        check(hkg_h2_density_mass(t, z1[0], z1[1], order, &mass), "normalize");
        tail << "# integral,t=" << fmt(t) << ",value=" << fmt(mass) << '\n';
      }
    }
  } else if (model == "sabr") {
    if (cfg.contains("z1")) throw ConfigError("z1 only applies to model 'h2'");
    allow_keys(grid, {"f", "a"}, "grid");
    Sabr sabr(sabr_params(cfg, false));
    const auto fs = axis(need(grid, "f", "grid"), "grid.f");
    const auto as = axis(need(grid, "a", "grid"), "grid.a");
    out << "t,f,a,x2,y2,dist,van_vleck,par,density,a1,leading\n";
    for (double t : ts) {
      for (double f : fs)
        for (double a : as) {
          hkg_hk_terms k;
          double dens = 0.0, xy[4];
          check(hkg_sabr_to_poincare(sabr.handle, f, a, xy), "density");
          check(hkg_sabr_density(sabr.handle, t, f, a, order, &dens, &k), "density");
          const double jac = k.density != 0.0 ? dens / k.density : 0.0;
          out << fmt(t) << ',' << fmt(f) << ',' << fmt(a) << ',' << fmt(xy[2]) << ',' << fmt(xy[3])
              << ',' << fmt(k.dist) << ',' << fmt(k.van_vleck) << ',' << fmt(k.par) << ','
              << fmt(dens) << ',' << fmt(k.a1) << ',' << fmt(k.leading * jac) << '\n';
        }
      if (opt.normalize) {
        double mass = 0.0;
        check(hkg_sabr_density_mass(sabr.handle, t, order, &mass), "normalize");
        tail << "# integral,t=" << fmt(t) << ",value=" << fmt(mass) << '\n';
      }
    }
  } else {
    throw ConfigError("model must be 'h2' or 'sabr'");
  }
  if (opt.verbose && !tail.str().empty()) std::cerr << tail.str();
  return out.str() + tail.str();
}

std::vector<double> strikes_of(const json& cfg, bool required) {
  if (!cfg.contains("strikes")) {
    if (required) need(cfg, "strikes", "config");
    return {80.0, 90.0, 100.0, 110.0, 120.0};
  }
  std::vector<double> ks = numbers(cfg.at("strikes"), "strikes");
  if (ks.empty()) throw ConfigError("strikes must not be empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (!(ks[i] > 0.0) || !std::isfinite(ks[i])) throw ConfigError("strikes must be > 0");
    if (i && !(ks[i] > ks[i - 1])) throw ConfigError("strikes must be strictly ascending");
  }
  return ks;
}

double maturity_of(const json& cfg, bool required) {
  if (required) need(cfg, "maturity", "config");
  const double T = number(cfg, "maturity", "config", 0.5);
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("maturity must be > 0");
  return T;
}

std::string cmd_smile(const json& cfg, const Options& opt) {
  allow_keys(cfg, {"params", "strikes", "maturity", "order", "quadrature"}, "config");
  Sabr sabr(sabr_params(cfg, false));
  const hkg_sabr_params p = sabr_params(cfg, false);
  const std::vector<double> ks = strikes_of(cfg, true);
  const double T = maturity_of(cfg, true);
  const int order = order_of(cfg);
  int n_f = 0, n_a = 0;
  if (cfg.contains("quadrature")) {
    const json& q = cfg.at("quadrature");
    allow_keys(q, {"n_f", "n_a"}, "quadrature");
    n_f = static_cast<int>(integer(q, "n_f", "quadrature", 0));
    n_a = static_cast<int>(integer(q, "n_a", "quadrature", 0));
    if (n_f < 0 || n_a < 0 || n_f > 100000 || n_a > 100000)
      throw ConfigError("quadrature node counts must be positive");
  }

  std::ostringstream out;
  out << "strike,hk_price,hk_implied_vol,hagan_vol,abs_diff_bps\n";
  int warnings = 0;
  for (double K : ks) {
    double price = 0.0, hagan = 0.0, iv = std::nan("");
    check(hkg_sabr_call_price(sabr.handle, K, T, order, n_f, n_a, &price), "call_price");
    check(hkg_sabr_hagan_vol(sabr.handle, K, T, &hagan), "hagan_vol");
    if (hkg_implied_vol(p.f0, K, T, price, &iv) != HKG_OK) {
      ++warnings;
      iv = std::nan("");
      std::cerr << "warning: strike " << fmt(K) << ": " << hkg_last_error() << '\n';
    }
    out << fmt(K) << ',' << fmt(price) << ',' << fmt(iv) << ',' << fmt(hagan) << ','
        << fmt(std::abs(iv - hagan) * 1e4) << '\n';
  }
  if (warnings > 0 || opt.verbose) std::cerr << "smile: " << warnings << " inversion warning(s)\n";
  return out.str();
}

struct ValidateResult {
  std::string report;
  bool all_pass;
};

ValidateResult cmd_validate(const json& cfg, const Options& opt, const std::string& header_fields) {
  allow_keys(cfg, {"params", "strikes", "maturity", "order", "mc", "histogram", "tolerances"}, "config");
  const hkg_sabr_params p = sabr_params(cfg, true);
  Sabr sabr(p);
  const std::vector<double> ks = strikes_of(cfg, false);
  const double T = maturity_of(cfg, false);
  const int order = order_of(cfg);

  hkg_mc_config mc{200000, 200, 20240611ULL, 0};
  if (cfg.contains("mc")) {
    const json& m = cfg.at("mc");
    allow_keys(m, {"n_paths", "n_steps", "seed", "threads"}, "mc");
    mc.n_paths = integer(m, "n_paths", "mc", mc.n_paths);
    mc.n_steps = static_cast<int>(integer(m, "n_steps", "mc", mc.n_steps));
    mc.threads = static_cast<int>(integer(m, "threads", "mc", 0));
    if (m.contains("seed")) {
      if (!m.at("seed").is_number_unsigned()) throw ConfigError("mc.seed must be a non-negative integer");
      mc.seed = m.at("seed").get<std::uint64_t>();
    }
    if (mc.n_paths < 1 || mc.n_steps < 1 || mc.threads < 0)
      throw ConfigError("mc.n_paths and mc.n_steps must be >= 1, mc.threads >= 0");
  }
  long long f_bins = 24, a_bins = 16;
  double width = 3.0;
  if (cfg.contains("histogram")) {
    const json& h = cfg.at("histogram");
    allow_keys(h, {"f_bins", "a_bins", "width_sd"}, "histogram");
    f_bins = integer(h, "f_bins", "histogram", f_bins);
    a_bins = integer(h, "a_bins", "histogram", a_bins);
    width = number(h, "width_sd", "histogram", width);
    if (f_bins < 1 || a_bins < 1 || f_bins * a_bins > 1000000 || !(width > 0.0))
      throw ConfigError("histogram needs positive bin counts and width_sd");
  }
  double k_price = 3.0, k_bin = 3.0, min_fraction = 0.95;
  if (cfg.contains("tolerances")) {
    const json& t = cfg.at("tolerances");
    allow_keys(t, {"price_se", "bin_se", "bin_fraction"}, "tolerances");
    k_price = number(t, "price_se", "tolerances", k_price);
    k_bin = number(t, "bin_se", "tolerances", k_bin);
    min_fraction = number(t, "bin_fraction", "tolerances", min_fraction);
  }

  hkg_mc_run* raw = nullptr;
  check(hkg_mc_simulate(sabr.handle, T, &mc, &raw), "monte carlo");
  std::unique_ptr<hkg_mc_run, decltype(&hkg_mc_destroy)> run(raw, hkg_mc_destroy);

  ordered_json checks = ordered_json::array();
  bool all_pass = true;
  for (double K : ks) {
    double hk = 0.0;
    hkg_mc_estimate est;
    check(hkg_sabr_call_price(sabr.handle, K, T, order, 0, 0, &hk), "call_price");
    check(hkg_mc_price_call(run.get(), K, &est), "mc price");
    const double z = est.std_error > 0 ? std::abs(hk - est.estimate) / est.std_error : (hk == est.estimate ? 0.0 : INFINITY);
    const bool pass = z <= k_price;
    all_pass = all_pass && pass;
    ordered_json c;
    c["name"] = "call_price_K" + fmt(K);
    c["hk_price"] = hk;
    c["mc_price"] = est.estimate;
    c["mc_std_error"] = est.std_error;
    c["measured"] = z;
    c["tolerance"] = k_price;
    c["unit"] = "mc_std_errors";
    c["pass"] = pass;
    checks.push_back(c);
    if (opt.verbose) std::cerr << "K=" << K << " hk=" << hk << " mc=" << est.estimate << " z=" << z << '\n';
  }

  // Bins span +- width standard deviations of log F_T and log A_T.
  const double sd_f = p.alpha * std::sqrt(T), sd_a = p.nu * std::sqrt(T);
  const double ca = std::log(p.alpha) - 0.5 * p.nu * p.nu * T;
  std::vector<double> fe(f_bins + 1), ae(a_bins + 1);
  for (long long i = 0; i <= f_bins; ++i)
    fe[i] = p.f0 * std::exp(-width * sd_f + 2.0 * width * sd_f * static_cast<double>(i) / f_bins);
  for (long long j = 0; j <= a_bins; ++j)
    ae[j] = std::exp(ca - width * sd_a + 2.0 * width * sd_a * static_cast<double>(j) / a_bins);
  std::vector<hkg_hist_bin> bins(static_cast<std::size_t>(f_bins * a_bins));
  double absorbed = 0.0, outside = 0.0;
  check(hkg_mc_histogram(run.get(), fe.data(), fe.size(), ae.data(), ae.size(), bins.data(), &absorbed, &outside),
        "histogram");
  long long bulk = 0, within = 0;
  const double bulk_mass = 50.0 / static_cast<double>(mc.n_paths);
  for (const hkg_hist_bin& b : bins) {
    if (b.mass < bulk_mass) continue;
    double expected = 0.0;
    check(hkg_sabr_bin_mass(sabr.handle, T, order, b.f_low, b.f_high, b.a_low, b.a_high, &expected), "bin mass");
    ++bulk;
    if (std::abs(expected - b.mass) <= k_bin * b.std_err) ++within;
  }
  const double fraction = bulk > 0 ? static_cast<double>(within) / bulk : 0.0;
  const bool bins_pass = bulk > 0 && fraction >= min_fraction;
  all_pass = all_pass && bins_pass;
  ordered_json c;
  c["name"] = "density_bins";
  c["bulk_bins"] = bulk;
  c["bins_within"] = within;
  c["absorbed_mass"] = absorbed;
  c["outside_mass"] = outside;
  c["measured"] = fraction;
  c["tolerance"] = min_fraction;
  c["unit"] = "fraction_of_bulk_bins";
  c["pass"] = bins_pass;
  checks.push_back(c);

  ordered_json body;
  ordered_json params;
  params["f0"] = p.f0;
  params["alpha"] = p.alpha;
  params["beta"] = p.beta;
  params["nu"] = p.nu;
  params["rho"] = p.rho;
  body["params"] = params;
  body["maturity"] = T;
  body["order"] = order;
  body["mc"] = {{"n_paths", mc.n_paths}, {"n_steps", mc.n_steps}, {"seed", mc.seed}};
  body["checks"] = checks;
  body["all_pass"] = all_pass;
  // Header fields share the first line with the opening brace.
  const std::string dumped = body.dump(2);
  return {"{" + header_fields + ",\n" + dumped.substr(2) + "\n", all_pass};
}

int run(const std::string& command, const Options& opt) {
  std::ifstream in(opt.config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + opt.config_path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::string digest = fnv1a64(text);
  json cfg;
  try {
    cfg = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw ConfigError("config must be a JSON object");

  const std::string version = hkg_version();
  std::string output;
  int code = kExitOk;
  if (command == "validate") {
    const std::string fields = "\"tool\": \"hkgeo_cli " + version + "\", \"config_digest\": \"fnv1a64:" + digest + "\"";
    ValidateResult r = cmd_validate(cfg, opt, fields);
    output = std::move(r.report);
    code = r.all_pass ? kExitOk : kExitAcceptance;
  } else {
    std::string body;
    if (command == "curvature") body = cmd_curvature(cfg, opt);
    else if (command == "geodesic") body = cmd_geodesic(cfg, opt);
    else if (command == "density") body = cmd_density(cfg, opt);
    else body = cmd_smile(cfg, opt);
    output = "# hkgeo_cli " + version + " config_digest=fnv1a64:" + digest + "\n" + body;
  }

  if (opt.output.empty()) {
    std::cout << output;
    std::cout.flush();
  } else {
    std::ofstream f(opt.output, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot open output file '" + opt.output + "'");
    f << output;
    if (!f) throw NumericalError("failed writing '" + opt.output + "'");
  }
  if (opt.verbose) std::cerr << command << ": exit " << code << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat-kernel geometry and SABR toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hkgeo_cli ") + hkg_version());
  Options opt;
  const char* names[][2] = {{"curvature", "Curvature of a metric on a point grid"},
                            {"geodesic", "Closed-form or numeric geodesic on the half-plane"},
                            {"density", "Heat-kernel density on a grid"},
                            {"smile", "Heat-kernel and Hagan implied volatilities"},
                            {"validate", "Monte Carlo checks of the heat-kernel prices and density"}};
  for (const auto& n : names) {
    CLI::App* sub = app.add_subcommand(n[0], n[1]);
    sub->add_option("config", opt.config_path, "JSON config file")->required();
    sub->add_option("--output,-o", opt.output, "Output file (default: stdout)");
    sub->add_flag("--normalize", opt.normalize, "Report the integral of the density");
    sub->add_flag("--verbose,-v", opt.verbose, "Diagnostics on standard error");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  }
}
