#pragma once

// Numerical companion to the method of moments: characteristic-function
// samples with their Taylor remainder bound, tightness via the Markov
// inequality, moment-gap tables for a family against its limit, and CDF
// convergence at continuity points of the limit.

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "momentkit/measure.hpp"
#include "momentkit/moment_analysis.hpp"
#include "momentkit/sequences.hpp"

namespace momentkit {

inline constexpr double kUnitMassTol = 1e-9;

namespace detail {
inline std::vector<std::pair<double, double>> require_atomic_1d(const MeasureRep& m,
                                                                const char* who) {
  if (m.dim() != 1) throw std::invalid_argument(std::string(who) + ": one-dimensional measures only");
  if (!is_purely_atomic(m))
    throw std::invalid_argument(std::string(who) +
                                ": measure has a density part; discretize it first");
  return flatten_atoms_1d(m);
}
}  // namespace detail

/// psi(t) with derivatives psi^(j)(t) = sum w (ix)^j e^{itx} and the
/// absolute moments mu_j (to order max_deriv + 1) of an atomic measure.
struct CharFnSample {
  double t = 0.0;
  std::complex<double> value;
  std::vector<std::complex<double>> derivatives;  // j = 0 .. max_deriv
  std::vector<double> absolute_moments;           // j = 0 .. max_deriv + 1
};

inline CharFnSample char_fn(const MeasureRep& m, double t, int max_deriv) {
  if (max_deriv < 0) throw std::invalid_argument("char_fn: negative derivative order");
  const auto atoms = detail::require_atomic_1d(m, "char_fn");

  CharFnSample s;
  s.t = t;
  s.derivatives.assign(max_deriv + 1, {0.0, 0.0});
  s.absolute_moments.assign(max_deriv + 2, 0.0);
  for (const auto& [x, w] : atoms) {
    const std::complex<double> phase = std::polar(1.0, t * x);
    std::complex<double> ix_pow = 1.0;
    const std::complex<double> ix(0.0, x);
    for (int j = 0; j <= max_deriv; ++j) {
      s.derivatives[j] += w * ix_pow * phase;
      ix_pow *= ix;
    }
    double ax_pow = 1.0;
    const double ax = std::fabs(x);
    for (int j = 0; j <= max_deriv + 1; ++j) {
      s.absolute_moments[j] += w * ax_pow;
      ax_pow *= ax;
    }
  }
  s.value = s.derivatives[0];
  return s;
}

/// |psi(t+h) - sum_{j<=n} h^j/j! psi^(j)(t)| <= |h|^{n+1}/(n+1)! mu_{n+1},
/// with 1e-12 slack on the right side.
struct TaylorCheck {
  bool holds = false;
  double remainder = 0.0;
  double bound = 0.0;
  double slack = 0.0;  // bound + 1e-12 - remainder
};

inline TaylorCheck taylor_remainder_check(const MeasureRep& m, double t, double h, int n) {
  if (n < 0) throw std::invalid_argument("taylor_remainder_check: negative order");
  if (std::fabs(m.mass() - 1.0) > kUnitMassTol)
    throw std::invalid_argument("taylor_remainder_check: measure must have unit mass");
  const CharFnSample at_t = char_fn(m, t, n);
  const CharFnSample at_th = char_fn(m, t + h, 0);

  std::complex<double> taylor = 0.0;
  double h_pow = 1.0;
  double fact = 1.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) {
      h_pow *= h;
      fact *= j;
    }
    taylor += h_pow / fact * at_t.derivatives[j];
  }
  TaylorCheck chk;
  chk.remainder = std::abs(at_th.value - taylor);
  chk.bound = std::pow(std::fabs(h), n + 1) / std::tgamma(n + 2.0) * at_t.absolute_moments[n + 1];
  chk.slack = chk.bound + 1e-12 - chk.remainder;
  chk.holds = chk.slack >= 0.0;
  return chk;
}

/// Markov: P(|X| >= k) <= m_2 / k^2.
struct TightnessResult {
  double probability = 0.0;
  double bound = 0.0;
};

inline TightnessResult tightness_bound(const MeasureRep& m, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("tightness_bound: k must be positive");
  if (m.dim() != 1) throw std::invalid_argument("tightness_bound: one-dimensional measures only");
  if (std::fabs(m.mass() - 1.0) > kUnitMassTol)
    throw std::invalid_argument("tightness_bound: measure must have unit mass");
  TightnessResult r;
  r.probability = prob_abs_ge(m, k);
  const double m2 = moment(m, 2);
  if (!std::isfinite(m2)) throw std::invalid_argument("tightness_bound: second moment not finite");
  r.bound = m2 / (k * k);
  if (r.probability > r.bound + 1e-12)
    throw std::logic_error("tightness_bound: Markov inequality violated");
  return r;
}

/// A family of unit-mass measures indexed by k with its limit.
struct MeasureFamily {
  std::function<MeasureRep(int)> generator;
  MeasureRep limit;
};

namespace detail {
inline MeasureRep checked_member(const MeasureFamily& fam, int k) {
  MeasureRep m = fam.generator(k);
  if (std::fabs(m.mass() - 1.0) > kUnitMassTol) {
    std::ostringstream msg;
    msg << "MeasureFamily: member at k=" << k << " has mass " << m.mass();
    throw std::invalid_argument(msg.str());
  }
  return m;
}
}  // namespace detail

/// Gap table |m_n^{(k)} - m_n^{(inf)}| for n = 1..orders over the given
/// indices. Trends are reported, never asserted.
struct MomentGapTable {
  std::vector<int> ks;
  int orders = 0;
  std::vector<double> limit_moments;       // m_1 .. m_orders of the limit
  std::vector<std::vector<double>> gaps;   // gaps[i][n-1] for ks[i]
};

inline MomentGapTable moment_convergence(const MeasureFamily& fam, int orders,
                                         const std::vector<int>& ks) {
  if (orders < 1) throw std::invalid_argument("moment_convergence: orders must be positive");
  if (std::fabs(fam.limit.mass() - 1.0) > kUnitMassTol)
    throw std::invalid_argument("moment_convergence: limit must have unit mass");
  MomentGapTable tab;
  tab.ks = ks;
  tab.orders = orders;
  tab.limit_moments.resize(orders);
  for (int n = 1; n <= orders; ++n) tab.limit_moments[n - 1] = moment(fam.limit, n);
  for (int k : ks) {
    const MeasureRep mk = detail::checked_member(fam, k);
    std::vector<double> row(orders);
    for (int n = 1; n <= orders; ++n) row[n - 1] = std::fabs(moment(mk, n) - tab.limit_moments[n - 1]);
    tab.gaps.push_back(std::move(row));
  }
  return tab;
}

/// CDF sup-distance on a continuity grid per family index, the moment gap
/// table, and the determinacy verdict of the limit.
struct ConvergenceReport {
  std::vector<int> ks;
  std::vector<double> sup_cdf_distance;  // per k
  MomentGapTable gaps;
  std::vector<double> grid;
  bool limit_determinacy_available = false;
  DeterminacyReport limit_determinacy;
};

inline ConvergenceReport weak_convergence_check(const MeasureFamily& fam,
                                                const std::vector<double>& grid,
                                                const std::vector<int>& ks, int orders = 6,
                                                int determinacy_order = 20,
                                                int determinacy_window = 5) {
  if (grid.empty()) throw std::invalid_argument("weak_convergence_check: empty grid");
  if (ks.empty()) throw std::invalid_argument("weak_convergence_check: no family indices");

  // the grid must avoid atoms of the limit (convergence holds only at
  // continuity points)
  const SpectrumReport spec = spectrum_report(fam.limit);
  std::vector<double> offending;
  for (double g : grid)
    if (spec.has_atom_near(g, 1e-9)) offending.push_back(g);
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "weak_convergence_check: grid touches atoms of the limit at";
    for (double g : offending) msg << ' ' << g;
    throw std::invalid_argument(msg.str());
  }

  ConvergenceReport rep{ks, {}, moment_convergence(fam, orders, ks), grid, false, {}};
  for (int k : ks) {
    const MeasureRep mk = detail::checked_member(fam, k);
    double sup = 0.0;
    for (double g : grid) sup = std::max(sup, std::fabs(cdf(mk, g) - cdf(fam.limit, g)));
    rep.sup_cdf_distance.push_back(sup);
  }
  try {
    rep.limit_determinacy = determinacy_radius(moments_of(fam.limit, determinacy_order),
                                               determinacy_window);
    rep.limit_determinacy_available = true;
  } catch (const std::invalid_argument&) {
    // degenerate limits (all higher moments zero) have no ratio table
    rep.limit_determinacy_available = false;
  }
  return rep;
}

}  // namespace momentkit
