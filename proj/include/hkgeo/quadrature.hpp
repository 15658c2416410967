#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hkgeo::quad {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule (Newton iteration on P_n). Cached per n.
const GaussLegendre& gauss_legendre(int n);

/// Composite Simpson for samples on an arbitrary increasing grid. Pairs of
/// intervals use the three-point rule for unequal widths; an odd trailing
/// interval is closed with the quadratic through the last three samples.
double simpson(std::span<const double> t, std::span<const double> f);

/// Composite Simpson of f on [a, b] with `nodes` (odd, >= 3) equally spaced nodes.
double simpson(const std::function<double(double)>& f, double a, double b, int nodes);

/// Simpson starting at `nodes` and halving the spacing until two successive
/// values differ by less than `tolerance` (or `max_nodes` is reached).
double simpson_adaptive(const std::function<double(double)>& f, double a, double b,
                        int nodes = 201, double tolerance = 1e-10,
                        int max_nodes = 1 << 16);

/// Pairwise summation; result independent of how the caller chunked the work.
double pairwise_sum(std::span<const double> values);

}  // namespace hkgeo::quad
