#pragma once

// Seeded Monte Carlo for the SABR system. A is advanced exactly as GBM,
// F by Euler with absorption at 0. Path i draws from its own generator
// seeded by (seed, i), so results do not depend on the thread schedule.

#include "hkgeo/sabr.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hkgeo {

enum class McScheme { euler_abs };

struct McConfig {
  std::int64_t n_paths = 200000;
  int n_steps = 200;
  std::uint64_t seed = 1;
  McScheme scheme = McScheme::euler_abs;
  int threads = 0;  // 0: hardware concurrency

  void validate() const;
};

struct TerminalState {
  double f;
  double a;
  bool absorbed;
};

struct HistogramBin {
  double f_low, f_high, a_low, a_high;
  double mass;
  double std_err;
};

struct McResult {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t n_effective = 0;
  std::optional<std::vector<HistogramBin>> histogram;
  double absorbed_mass = 0.0;
  double outside_mass = 0.0;  // paths that landed in no bin
};

std::vector<TerminalState> simulate_terminal(const SabrParams& p, double T, const McConfig& cfg);

/// Mean payoff (F_T - K)^+ with standard error from simulated states.
McResult price_from_states(const std::vector<TerminalState>& states, double K);

McResult price_call(const SabrParams& p, double K, double T, const McConfig& cfg);
/// Prices for a strike ladder from a single simulation (common random numbers).
std::vector<McResult> price_calls(const SabrParams& p, const std::vector<double>& strikes,
                                  double T, const McConfig& cfg);

/// 2-D histogram of (F_T, A_T); edges are ascending bin boundaries.
McResult density_histogram(const SabrParams& p, double T, const McConfig& cfg,
                           const std::vector<double>& f_edges, const std::vector<double>& a_edges);
McResult histogram_from_states(const std::vector<TerminalState>& states,
                               const std::vector<double>& f_edges,
                               const std::vector<double>& a_edges);

/// Sample correlation of the (Z, W) increments over all paths and steps.
double increment_correlation(const SabrParams& p, const McConfig& cfg);

/// Kolmogorov-Smirnov statistic of log A_T against N(log alpha - nu^2 T / 2, nu^2 T).
double ks_log_vol(const SabrParams& p, double T, const std::vector<TerminalState>& states);

}  // namespace hkgeo
