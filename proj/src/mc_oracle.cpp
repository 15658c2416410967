#include "hkgeo/mc_oracle.hpp"

#include "hkgeo/error.hpp"
#include "hkgeo/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

namespace hkgeo {

namespace {

std::mt19937_64 path_engine(std::uint64_t seed, std::int64_t path) {
  const auto ip = static_cast<std::uint64_t>(path);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(ip), static_cast<std::uint32_t>(ip >> 32)};
  return std::mt19937_64(seq);
}

int thread_count(const McConfig& cfg) {
  int n = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, n);
}

// Runs body(i) for i in [0, n) over contiguous blocks.
template <class Body>
void parallel_for(std::int64_t n, int threads, Body body) {
  if (threads <= 1 || n < 1024) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::int64_t block = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::int64_t lo = t * block, hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([=, &body] {
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

McResult mean_and_error(const std::vector<double>& values) {
  McResult r;
  const auto n = static_cast<std::int64_t>(values.size());
  r.n_effective = n;
  if (n == 0) return r;
  r.estimate = quad::pairwise_sum(values) / n;
  if (n > 1) {
    std::vector<double> sq(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double d = values[i] - r.estimate;
      sq[i] = d * d;
    }
    r.std_error = std::sqrt(quad::pairwise_sum(sq) / (n - 1) / n);
  }
  return r;
}

void check_edges(const std::vector<double>& e, const char* what) {
  if (e.size() < 2) fail(ErrorCode::invalid_argument, std::string(what) + ": need >= 2 edges");
  for (std::size_t i = 1; i < e.size(); ++i)
    if (!(e[i] > e[i - 1]))
      fail(ErrorCode::invalid_argument, std::string(what) + ": edges must be ascending");
}

}  // namespace

void McConfig::validate() const {
  if (n_paths < 1) fail(ErrorCode::invalid_argument, "n_paths must be >= 1");
  if (n_steps < 1) fail(ErrorCode::invalid_argument, "n_steps must be >= 1");
  if (threads < 0) fail(ErrorCode::invalid_argument, "threads must be >= 0");
}

std::vector<TerminalState> simulate_terminal(const SabrParams& p, double T, const McConfig& cfg) {
  p.validate();
  cfg.validate();
  if (!(T > 0.0) || !std::isfinite(T)) fail(ErrorCode::invalid_argument, "T must be > 0");

  const double dt = T / cfg.n_steps;
  const double sdt = std::sqrt(dt);
  const double vol_drift = -0.5 * p.nu * p.nu * dt;
  const double rho_c = std::sqrt(1.0 - p.rho * p.rho);
  std::vector<TerminalState> out(static_cast<std::size_t>(cfg.n_paths));

  parallel_for(cfg.n_paths, thread_count(cfg), [&](std::int64_t i) {
    std::mt19937_64 eng = path_engine(cfg.seed, i);
    std::normal_distribution<double> normal;
    double f = p.f0, a = p.alpha;
    bool absorbed = false;
    for (int s = 0; s < cfg.n_steps; ++s) {
      const double z = normal(eng);
      const double zp = normal(eng);
      const double w = p.rho * z + rho_c * zp;
      if (!absorbed) {
        const double cf = p.beta == 1.0 ? f : std::pow(f, p.beta);
        f += a * cf * sdt * w;
        if (f <= 0.0) {
          f = 0.0;
          absorbed = true;
        }
      }
      a *= std::exp(p.nu * sdt * z + vol_drift);
    }
    out[static_cast<std::size_t>(i)] = {f, a, absorbed};
  });
  return out;
}

McResult price_from_states(const std::vector<TerminalState>& states, double K) {
  if (!(K >= 0.0) || !std::isfinite(K)) fail(ErrorCode::invalid_argument, "strike must be >= 0");
  std::vector<double> payoff(states.size());
  for (std::size_t i = 0; i < states.size(); ++i) payoff[i] = std::max(states[i].f - K, 0.0);
  return mean_and_error(payoff);
}

std::vector<McResult> price_calls(const SabrParams& p, const std::vector<double>& strikes,
                                  double T, const McConfig& cfg) {
  for (double K : strikes)
    if (!(K >= 0.0) || !std::isfinite(K)) fail(ErrorCode::invalid_argument, "strike must be >= 0");
  const std::vector<TerminalState> states = simulate_terminal(p, T, cfg);
  std::vector<McResult> out;
  out.reserve(strikes.size());
  for (double K : strikes) out.push_back(price_from_states(states, K));
  return out;
}

McResult price_call(const SabrParams& p, double K, double T, const McConfig& cfg) {
  return price_calls(p, {K}, T, cfg).front();
}

McResult histogram_from_states(const std::vector<TerminalState>& states,
                               const std::vector<double>& f_edges,
                               const std::vector<double>& a_edges) {
  check_edges(f_edges, "density_histogram f_edges");
  check_edges(a_edges, "density_histogram a_edges");
  const std::size_t nf = f_edges.size() - 1, na = a_edges.size() - 1;
  std::vector<std::int64_t> counts(nf * na, 0);
  std::int64_t absorbed = 0, outside = 0;
  for (const TerminalState& s : states) {
    if (s.absorbed) {
      ++absorbed;
      continue;
    }
    const auto fi = std::upper_bound(f_edges.begin(), f_edges.end(), s.f) - f_edges.begin() - 1;
    const auto ai = std::upper_bound(a_edges.begin(), a_edges.end(), s.a) - a_edges.begin() - 1;
    if (fi < 0 || ai < 0 || fi >= static_cast<std::ptrdiff_t>(nf) ||
        ai >= static_cast<std::ptrdiff_t>(na)) {
      ++outside;
      continue;
    }
    ++counts[static_cast<std::size_t>(fi) * na + static_cast<std::size_t>(ai)];
  }
  const double n = static_cast<double>(states.size());
  McResult r;
  r.n_effective = static_cast<std::int64_t>(states.size());
  r.absorbed_mass = absorbed / n;
  r.outside_mass = outside / n;
  std::vector<HistogramBin> bins;
  bins.reserve(nf * na);
  double total = 0.0;
  for (std::size_t i = 0; i < nf; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      const double m = counts[i * na + j] / n;
      total += m;
      bins.push_back({f_edges[i], f_edges[i + 1], a_edges[j], a_edges[j + 1], m,
                      std::sqrt(m * (1.0 - m) / n)});
    }
  r.estimate = total;
  r.std_error = std::sqrt(total * (1.0 - total) / n);
  r.histogram = std::move(bins);
  return r;
}

McResult density_histogram(const SabrParams& p, double T, const McConfig& cfg,
                           const std::vector<double>& f_edges, const std::vector<double>& a_edges) {
  return histogram_from_states(simulate_terminal(p, T, cfg), f_edges, a_edges);
}

double increment_correlation(const SabrParams& p, const McConfig& cfg) {
  p.validate();
  cfg.validate();
  const double rho_c = std::sqrt(1.0 - p.rho * p.rho);
  const auto n = static_cast<std::size_t>(cfg.n_paths);
  std::vector<double> szz(n), sww(n), szw(n), sz(n), sw(n);
  parallel_for(cfg.n_paths, thread_count(cfg), [&](std::int64_t i) {
    std::mt19937_64 eng = path_engine(cfg.seed, i);
    std::normal_distribution<double> normal;
    double a = 0, b = 0, c = 0, d = 0, e = 0;
    for (int s = 0; s < cfg.n_steps; ++s) {
      const double z = normal(eng);
      const double w = p.rho * z + rho_c * normal(eng);
      a += z * z;
      b += w * w;
      c += z * w;
      d += z;
      e += w;
    }
    const auto k = static_cast<std::size_t>(i);
    szz[k] = a, sww[k] = b, szw[k] = c, sz[k] = d, sw[k] = e;
  });
  const double m = static_cast<double>(n) * cfg.n_steps;
  const double mz = quad::pairwise_sum(sz) / m, mw = quad::pairwise_sum(sw) / m;
  const double vz = quad::pairwise_sum(szz) / m - mz * mz;
  const double vw = quad::pairwise_sum(sww) / m - mw * mw;
  const double cov = quad::pairwise_sum(szw) / m - mz * mw;
  return cov / std::sqrt(vz * vw);
}

double ks_log_vol(const SabrParams& p, double T, const std::vector<TerminalState>& states) {
  if (states.empty()) fail(ErrorCode::invalid_argument, "ks_log_vol: no samples");
  std::vector<double> x;
  x.reserve(states.size());
  for (const TerminalState& s : states) x.push_back(std::log(s.a));
  std::sort(x.begin(), x.end());
  const double mean = std::log(p.alpha) - 0.5 * p.nu * p.nu * T;
  const double sd = p.nu * std::sqrt(T);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-(x[i] - mean) / (sd * std::numbers::sqrt2));
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  return d;
}

}  // namespace hkgeo
