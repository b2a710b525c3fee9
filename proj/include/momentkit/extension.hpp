#pragma once

// The one-step positive extension: the closed interval of values t for
// which (m_0, ..., m_N, t) stays feasible on S0. Positive definite blocks
// give Schur-complement bounds in closed form; a singular (flat) block pins
// the measure, and with it the next moment, to a single value.

#include <cmath>
#include <stdexcept>

#include "momentkit/moment_analysis.hpp"
#include "momentkit/reconstruction.hpp"

namespace momentkit {

struct ExtensionInterval {
  double c1 = -detail::kInf;
  double c2 = detail::kInf;
  bool degenerate = false;

  bool bounded_below() const { return std::isfinite(c1); }
  bool bounded_above() const { return std::isfinite(c2); }
  bool contains(double t, double tol = 0.0) const { return t >= c1 - tol && t <= c2 + tol; }
  double width() const { return c2 - c1; }
};

inline constexpr double kDegenerateWidth = 1e-10;

namespace detail {

/// v^T A^{-1} v for a positive definite A.
inline double schur_corner(const Eigen::MatrixXd& A, const Eigen::VectorXd& v) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("extension_interval: Cholesky failed on a leading block");
  return v.dot(llt.solve(v));
}

}  // namespace detail

inline ExtensionInterval extension_interval(const MomentSequence& seq, const SupportSet& s0) {
  const int N = seq.max_order();
  const int next = N + 1;

  // Feasibility gate. Short prefixes (N < 2) get the same block test at the
  // sizes that exist.
  const std::vector<FeasibilityBlock> blocks = detail::feasibility_blocks(seq, s0);
  double min_scaled = detail::kInf;
  for (const auto& blk : blocks) min_scaled = std::min(min_scaled, blk.scaled_min());
  if (min_scaled < -kFeasibilityTol)
    throw std::domain_error("extension_interval: sequence is infeasible on " + s0.describe());

  // Flat route: a singular block means the truncated problem pins the
  // measure; the unique extension is the next moment of its quadrature
  // measure (pseudo-inverse Schur complement in matrix terms).
  if (min_scaled <= kFeasibilityTol) {
    const JacobiMatrix J = jacobi_from_moments(seq);
    const Quadrature q = gauss_quadrature(J, std::min(std::max(1, (N + 1) / 2), J.rows()));
    const double bscale =
        std::max({1.0, std::fabs(s0.a), s0.kind == SupportSet::Kind::segment ? std::fabs(s0.b) : 0.0});
    for (double node : q.nodes)
      if (s0.distance(node) > kNodeClampTol * bscale)
        throw std::domain_error("extension_interval: flat sequence has support outside " +
                                s0.describe());
    for (int j = 0; j <= N; ++j)
      if (std::fabs(q.integrate_power(j) - seq[j]) > 1e-7 * std::max(1.0, std::fabs(seq[j])))
        throw std::domain_error(
            "extension_interval: flat block does not reproduce the sequence");
    const double t = q.integrate_power(next);
    return ExtensionInterval{t, t, true};
  }

  ExtensionInterval out;
  if (next % 2 == 0) {
    // H0 acquires the corner m_{2k}: t >= v^T A^{-1} v
    const int k = next / 2;
    Eigen::MatrixXd A(k, k);
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) {
      v(i) = seq[i + k];
      for (int j = 0; j < k; ++j) A(i, j) = seq[i + j];
    }
    out.c1 = detail::schur_corner(A, v);

    if (s0.kind == SupportSet::Kind::segment) {
      // localizer corner (a+b) m_{2k-1} - ab m_{2k-2} - t stays above its
      // Schur complement: upper bound on t
      const int sl = k;  // localizer size at the extended order
      if (sl >= 2) {
        Eigen::MatrixXd L(sl - 1, sl - 1);
        Eigen::VectorXd w(sl - 1);
        auto loc = [&](int i, int j) {
          return (s0.a + s0.b) * seq[i + j + 1] - s0.a * s0.b * seq[i + j] - seq[i + j + 2];
        };
        for (int i = 0; i < sl - 1; ++i) {
          w(i) = loc(i, sl - 1);
          for (int j = 0; j < sl - 1; ++j) L(i, j) = loc(i, j);
        }
        const double corner_const =
            (s0.a + s0.b) * seq[2 * k - 1] - s0.a * s0.b * seq[2 * k - 2];
        out.c2 = corner_const - detail::schur_corner(L, w);
      } else {
        // 1x1 localizer: (a+b) m_1 - ab m_0 - t >= 0
        out.c2 = (s0.a + s0.b) * seq[1] - s0.a * s0.b * seq[0];
      }
    }
  } else if (s0.kind == SupportSet::Kind::half_line) {
    // the once-shifted block of the translated sequence acquires the corner
    // m'_{2k+1} = t + g with g collecting the lower translated terms
    const int k = (next - 1) / 2;
    auto tm = translated_moments(seq, s0.a);
    double g = 0.0;
    for (int i = 0; i <= N; ++i)
      g += detail::binom(next, i) * detail::powi(-s0.a, next - i) * seq[i];
    if (k >= 1) {
      Eigen::MatrixXd A(k, k);
      Eigen::VectorXd v(k);
      for (int i = 0; i < k; ++i) {
        v(i) = tm[i + k + 1];
        for (int j = 0; j < k; ++j) A(i, j) = tm[i + j + 1];
      }
      out.c1 = detail::schur_corner(A, v) - g;
    } else {
      out.c1 = -g;  // 1x1 block: m'_1 = t + g >= 0
    }
  }
  // whole-line odd steps and segment odd steps put the new moment in no
  // block at the admissible sizes: unconstrained

  if (std::isfinite(out.c1) && std::isfinite(out.c2)) {
    if (out.c2 < out.c1) {  // numerically crossed near the flat boundary
      const double mid = 0.5 * (out.c1 + out.c2);
      out.c1 = out.c2 = mid;
    }
    out.degenerate = out.width() <= kDegenerateWidth;
  }
  return out;
}

}  // namespace momentkit
