#pragma once

// Symmetric tridiagonal eigensolver with implicit shifts and accumulated
// eigenvectors. Derived from the Algol procedure tql2 (Bowdler, Martin,
// Reinsch, Wilkinson) via the EISPACK lineage.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace momentkit {

namespace detail {
inline double pythag(double a, double b) {
  const double absa = std::fabs(a), absb = std::fabs(b);
  if (absa > absb) {
    const double r = absb / absa;
    return absa * std::sqrt(1.0 + r * r);
  }
  if (absb == 0.0) return 0.0;
  const double r = absa / absb;
  return absb * std::sqrt(1.0 + r * r);
}
}  // namespace detail

struct TridiagonalEigen {
  std::vector<double> eigenvalues;          // ascending
  std::vector<std::vector<double>> vectors;  // vectors[i] is the i-th eigenvector
};

/// Eigen-decompose the symmetric tridiagonal matrix with diagonal `diag`
/// and subdiagonal `offdiag` (offdiag[i] couples rows i and i+1).
inline TridiagonalEigen tridiagonal_ql(std::vector<double> d, std::vector<double> e,
                                       int max_iter = 50) {
  const int n = static_cast<int>(d.size());
  if (n < 1) throw std::invalid_argument("tridiagonal_ql: empty matrix");
  if (static_cast<int>(e.size()) != n - 1)
    throw std::invalid_argument("tridiagonal_ql: offdiagonal length must be n-1");

  // z: eigenvector accumulation, starts from the identity
  std::vector<std::vector<double>> z(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) z[i][i] = 1.0;

  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-15 * dd) break;
      }
      if (m != l) {
        if (iter++ == max_iter)
          throw std::runtime_error("tridiagonal_ql: eigen iteration did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = detail::pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = detail::pythag(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z[k][i + 1];
            z[k][i + 1] = s * z[k][i] + c * f;
            z[k][i] = c * z[k][i] - s * f;
          }
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  // sort ascending, carry vectors along
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return d[a] < d[b]; });

  TridiagonalEigen out;
  out.eigenvalues.resize(n);
  out.vectors.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    out.eigenvalues[i] = d[order[i]];
    for (int k = 0; k < n; ++k) out.vectors[i][k] = z[k][order[i]];
  }
  return out;
}

}  // namespace momentkit
