#include "hkgeo/quadrature.hpp"

#include "hkgeo/error.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace hkgeo::quad {

namespace {

GaussLegendre build_gauss_legendre(int n) {
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    if (n == 1) dp = 1.0;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
    rule.nodes[i] = -x;
    rule.weights[i] = w;
  }
  if (n == 1) {
    rule.nodes[0] = 0.0;
    rule.weights[0] = 2.0;
  }
  return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
  if (n < 1) fail(ErrorCode::invalid_argument, "gauss_legendre: n must be >= 1");
  static std::mutex mutex;
  static std::map<int, GaussLegendre> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, build_gauss_legendre(n)).first;
  return it->second;
}

double simpson(std::span<const double> t, std::span<const double> f) {
  const std::size_t n = t.size();
  if (n != f.size()) fail(ErrorCode::invalid_argument, "simpson: size mismatch");
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);

  auto panel = [&](std::size_t i) {
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    const double hs = h0 + h1;
    return hs / 6.0 *
           ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] +
            (2.0 - h0 / h1) * f[i + 2]);
  };

  const std::size_t intervals = n - 1;
  const std::size_t paired = intervals - intervals % 2;
  double sum = 0.0;
  for (std::size_t i = 0; i + 2 <= paired; i += 2) sum += panel(i);
  if (intervals % 2 == 1) {
    // Last interval [t_{n-2}, t_{n-1}] from the quadratic through the last three points.
    const std::size_t i = n - 3;
    const double h0 = t[i + 1] - t[i];
    const double h1 = t[i + 2] - t[i + 1];
    const double a = (2.0 * h1 * h1 + 3.0 * h0 * h1) / (6.0 * (h0 + h1));
    const double b = (h1 * h1 + 3.0 * h0 * h1) / (6.0 * h0);
    const double c = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    sum += a * f[i + 2] + b * f[i + 1] + c * f[i];
  }
  return sum;
}

double simpson(const std::function<double(double)>& f, double a, double b, int nodes) {
  if (nodes < 3 || nodes % 2 == 0)
    fail(ErrorCode::invalid_argument, "simpson: node count must be odd and >= 3");
  const int intervals = nodes - 1;
  const double h = (b - a) / intervals;
  double ends = f(a) + f(b);
  double odd = 0.0;
  double even = 0.0;
  for (int i = 1; i < intervals; ++i) {
    const double v = f(a + i * h);
    (i % 2 == 1 ? odd : even) += v;
  }
  return h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
}

double simpson_adaptive(const std::function<double(double)>& f, double a, double b,
                        int nodes, double tolerance, int max_nodes) {
  double previous = simpson(f, a, b, nodes);
  while (2 * (nodes - 1) + 1 <= max_nodes) {
    nodes = 2 * (nodes - 1) + 1;
    const double current = simpson(f, a, b, nodes);
    if (std::abs(current - previous) < tolerance) return current;
    previous = current;
  }
  return previous;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t mid = values.size() / 2;
  return pairwise_sum(values.first(mid)) + pairwise_sum(values.subspan(mid));
}

}  // namespace hkgeo::quad
