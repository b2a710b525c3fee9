#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <vector>

namespace momentkit::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// x^n by repeated multiplication; exact for exactly representable bases.
inline double powi(double x, int n) {
  double r = 1.0;
  double base = x;
  int e = n;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

/// Binomial coefficient as double (Pascal recurrence, n <= ~1020 safe).
inline double binom(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return r;
}

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

/// Gauss-Legendre rule of given order. Newton iteration on P_n with
/// Chebyshev starting guesses; rules are cached per order.
inline const GaussRule& gauss_legendre(int order) {
  if (order < 1 || order > 512) throw std::invalid_argument("gauss_legendre: order out of range");
  static std::map<int, GaussRule> cache;
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;

  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence for P_n(x) and P'_n(x)
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::fabs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  auto [pos, ok] = cache.emplace(order, std::move(rule));
  (void)ok;
  return pos->second;
}

/// Composite Gauss-Legendre over [a,b], n_sub equal subintervals.
inline double integrate_composite(const std::function<double(double)>& f, double a, double b,
                                  int order, int n_sub) {
  if (!(a < b)) return 0.0;
  const GaussRule& rule = gauss_legendre(order);
  const double h = (b - a) / n_sub;
  double acc = 0.0;
  for (int s = 0; s < n_sub; ++s) {
    const double lo = a + s * h;
    const double mid = lo + 0.5 * h;
    double part = 0.0;
    for (int i = 0; i < order; ++i) part += rule.weights[i] * f(mid + 0.5 * h * rule.nodes[i]);
    acc += 0.5 * h * part;
  }
  if (!std::isfinite(acc)) throw std::runtime_error("integrate_composite: non-finite integral");
  return acc;
}

/// Single Gauss-Legendre panel on [a,b].
inline double gl_panel(const std::function<double(double)>& f, double a, double b, int order) {
  const GaussRule& rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double acc = 0.0;
  for (int i = 0; i < order; ++i) acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return half * acc;
}

/// Adaptive bisection around the fixed-order panel rule: refine until the
/// two-half sum reproduces the parent panel to rel_tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 int order, double rel_tol = 1e-13, int depth = 26) {
  if (!(a < b)) return 0.0;
  const double whole = gl_panel(f, a, b, order);
  const double mid = 0.5 * (a + b);
  const double l = gl_panel(f, a, mid, order);
  const double r = gl_panel(f, mid, b, order);
  const double sum = l + r;
  if (depth <= 0 || std::fabs(sum - whole) <= rel_tol * (std::fabs(l) + std::fabs(r)) + 1e-300)
    return sum;
  return integrate_adaptive(f, a, mid, order, rel_tol, depth - 1) +
         integrate_adaptive(f, mid, b, order, rel_tol, depth - 1);
}

/// Subinterval count so that the composite rule reproduces the degree-`deg`
/// monomial on [a,b] to 1e-12 relative. With order >= (deg+1)/2 this is
/// satisfied at the initial count already (Gauss exactness).
inline int calibrate_subdivision(int order, double a, double b, int deg, int initial = 8) {
  int n_sub = initial;
  const double exact = (powi(b, deg + 1) - powi(a, deg + 1)) / (deg + 1);
  const double scale = std::max({1.0, std::fabs(exact)});
  while (n_sub <= 8192) {
    double approx = integrate_composite([deg](double u) { return powi(u, deg); }, a, b, order, n_sub);
    if (std::fabs(approx - exact) <= 1e-12 * scale) return n_sub;
    n_sub *= 2;
  }
  return 8192;
}

}  // namespace momentkit::detail
