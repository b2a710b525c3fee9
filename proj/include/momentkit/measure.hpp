#pragma once

// Finite measures on R^d given as atoms, 1-d densities, mixtures, and
// products of independent 1-d factors, together with the distribution
// function machinery: box volumes (inclusion-exclusion over the 2^d
// corners of ]a,b]), df validation, spectra, F-continuity of intervals,
// and multi-index moments.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "momentkit/detail/numeric.hpp"

namespace momentkit {

using detail::kInf;

// ---------------------------------------------------------------------------
// Basic geometry

/// Multi-index alpha in N^d; |alpha| is the component sum.
struct MultiIndex {
  std::vector<int> components;

  MultiIndex() = default;
  MultiIndex(std::initializer_list<int> c) : components(c) { validate(); }
  explicit MultiIndex(std::vector<int> c) : components(std::move(c)) { validate(); }

  int dim() const { return static_cast<int>(components.size()); }
  int level() const {
    int s = 0;
    for (int a : components) s += a;
    return s;
  }

 private:
  void validate() const {
    for (int a : components)
      if (a < 0) throw std::invalid_argument("MultiIndex: components must be nonnegative");
  }
};

/// Half-open box ]a,b] with a <= b componentwise.
struct Box {
  std::vector<double> a;
  std::vector<double> b;

  Box(std::vector<double> lo, std::vector<double> hi) : a(std::move(lo)), b(std::move(hi)) {
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("Box: dimension mismatch");
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!(a[i] <= b[i])) throw std::invalid_argument("Box: requires a <= b componentwise");
  }
  Box(double lo, double hi) : Box(std::vector<double>{lo}, std::vector<double>{hi}) {}

  int dim() const { return static_cast<int>(a.size()); }
  bool bounded() const {
    for (std::size_t i = 0; i < a.size(); ++i)
      if (!std::isfinite(a[i]) || !std::isfinite(b[i])) return false;
    return true;
  }
  /// Corner b + eps*(a-b) for the bitmask eps (bit i set -> coordinate a_i).
  std::vector<double> corner(unsigned mask) const {
    std::vector<double> c(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) c[i] = (mask >> i) & 1u ? a[i] : b[i];
    return c;
  }
};

/// An evaluable F : R^d -> R.
struct DistributionFunction {
  int dim = 1;
  std::function<double(const std::vector<double>&)> eval;

  double operator()(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument("DistributionFunction: point dimension mismatch");
    return eval(x);
  }
};

// ---------------------------------------------------------------------------
// MeasureRep

class MeasureRep {
 public:
  struct Atom {
    std::vector<double> position;
    double weight = 0.0;
  };

  struct Atomic {
    std::vector<Atom> atoms;
    int dim = 1;
  };

  /// 1-d absolutely continuous part on [lo, hi] (endpoints may be infinite).
  /// core_[lo,hi] is the finite window seeding tail integration; cdf_fn, if
  /// set, is an exact closed form used instead of quadrature.
  struct Density {
    double lo = 0.0, hi = 0.0;
    std::function<double(double)> pdf;
    int order = 32;
    std::function<double(double)> cdf_fn;
    double core_lo = 0.0, core_hi = 0.0;
    double mass = 0.0;
  };

  struct Mixture {
    std::vector<std::pair<double, std::shared_ptr<const MeasureRep>>> parts;
  };

  /// Product of independent 1-d factors; dimension = number of factors.
  struct Product {
    std::vector<std::shared_ptr<const MeasureRep>> factors;
  };

  using Repr = std::variant<Atomic, Density, Mixture, Product>;

  static MeasureRep atomic(std::vector<Atom> atoms) {
    if (atoms.empty()) throw std::invalid_argument("atomic: no atoms");
    const int d = static_cast<int>(atoms.front().position.size());
    for (const Atom& at : atoms) {
      if (static_cast<int>(at.position.size()) != d)
        throw std::invalid_argument("atomic: inconsistent atom dimensions");
      if (!(at.weight > 0.0) || !std::isfinite(at.weight))
        throw std::invalid_argument("atomic: weights must be positive and finite");
      for (double c : at.position)
        if (!std::isfinite(c)) throw std::invalid_argument("atomic: non-finite position");
    }
    for (std::size_t i = 0; i < atoms.size(); ++i)
      for (std::size_t j = i + 1; j < atoms.size(); ++j)
        if (atoms[i].position == atoms[j].position)
          throw std::invalid_argument("atomic: positions must be pairwise distinct");
    double mass = 0.0;
    for (const Atom& at : atoms) mass += at.weight;
    return MeasureRep(Atomic{std::move(atoms), d}, d, mass);
  }

  /// 1-d atoms from parallel vectors.
  static MeasureRep atomic1d(const std::vector<double>& xs, const std::vector<double>& ws) {
    if (xs.size() != ws.size()) throw std::invalid_argument("atomic1d: length mismatch");
    std::vector<Atom> atoms(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) atoms[i] = Atom{{xs[i]}, ws[i]};
    return atomic(std::move(atoms));
  }

  static MeasureRep density(double lo, double hi, std::function<double(double)> pdf, int order = 32,
                            std::function<double(double)> cdf_fn = {},
                            std::optional<double> analytic_mass = std::nullopt,
                            std::optional<std::pair<double, double>> core = std::nullopt) {
    if (!(lo < hi)) throw std::invalid_argument("density: requires lo < hi");
    if (order < 2 || order > 256) throw std::invalid_argument("density: quadrature order out of range");
    Density d;
    d.lo = lo;
    d.hi = hi;
    d.pdf = std::move(pdf);
    d.order = order;
    d.cdf_fn = std::move(cdf_fn);
    if (core) {
      d.core_lo = core->first;
      d.core_hi = core->second;
    } else {
      d.core_lo = std::isfinite(lo) ? lo : std::min(-1.0, std::isfinite(hi) ? hi - 1.0 : -1.0);
      d.core_hi = std::isfinite(hi) ? hi : std::max(1.0, std::isfinite(lo) ? lo + 1.0 : 1.0);
    }
    if (!(d.core_lo < d.core_hi) || !std::isfinite(d.core_lo) || !std::isfinite(d.core_hi))
      throw std::invalid_argument("density: core window must be finite and ordered");
    const double mass = analytic_mass ? *analytic_mass : integrate(d, d.pdf, -kInf, kInf, 0);
    if (!std::isfinite(mass) || !(mass > 0.0))
      throw std::invalid_argument("density: total mass must be positive and finite");
    d.mass = mass;
    return MeasureRep(std::move(d), 1, mass);
  }

  static MeasureRep mixture(std::vector<std::pair<double, MeasureRep>> comps) {
    if (comps.empty()) throw std::invalid_argument("mixture: no components");
    Mixture mix;
    const int d = comps.front().second.dim();
    double mass = 0.0;
    for (auto& [coef, m] : comps) {
      if (!(coef > 0.0) || !std::isfinite(coef))
        throw std::invalid_argument("mixture: coefficients must be positive and finite");
      if (m.dim() != d) throw std::invalid_argument("mixture: inconsistent component dimensions");
      mass += coef * m.mass();
      mix.parts.emplace_back(coef, std::make_shared<const MeasureRep>(std::move(m)));
    }
    return MeasureRep(std::move(mix), d, mass);
  }

  static MeasureRep product(std::vector<MeasureRep> factors) {
    if (factors.empty()) throw std::invalid_argument("product: no factors");
    Product p;
    double mass = 1.0;
    for (auto& f : factors) {
      if (f.dim() != 1) throw std::invalid_argument("product: factors must be one-dimensional");
      mass *= f.mass();
      p.factors.push_back(std::make_shared<const MeasureRep>(std::move(f)));
    }
    return MeasureRep(std::move(p), static_cast<int>(p.factors.size()), mass);
  }

  int dim() const { return dim_; }
  double mass() const { return mass_; }
  const Repr& repr() const { return repr_; }

  bool is_atomic_variant() const { return std::holds_alternative<Atomic>(repr_); }

  /// Integrate `f` against a density over [A,B] (intersected with the
  /// support). Infinite ends are covered by doubling windows extending to
  /// at least the tail cutoff 1/eps with eps = 1e-12, and further while the
  /// windows still contribute.
  static double integrate(const Density& d, const std::function<double(double)>& f, double A,
                          double B, int monomial_deg) {
    constexpr double kTailMin = 1e12;   // 1/K <= eps with eps = 1e-12
    constexpr double kTailCap = 1e24;
    const double lo = std::max(A, d.lo);
    const double hi = std::min(B, d.hi);
    if (!(lo < hi)) return 0.0;

    double acc = 0.0;
    const double cl = std::min(std::max(lo, d.core_lo), hi);
    const double ch = std::max(std::min(hi, d.core_hi), lo);
    // finite segment: calibrated uniform split, each piece refined adaptively
    auto finite_piece = [&](double a, double b) {
      if (!(a < b)) return 0.0;
      const int n_sub = detail::calibrate_subdivision(d.order, a, b, monomial_deg, 8);
      const double h = (b - a) / n_sub;
      double s = 0.0;
      for (int i = 0; i < n_sub; ++i)
        s += detail::integrate_adaptive(f, a + i * h, a + (i + 1) * h, d.order);
      return s;
    };
    if (cl < ch) acc += finite_piece(cl, ch);
    // right of the core
    if (hi > ch) {
      if (std::isfinite(hi)) {
        acc += finite_piece(ch, hi);
      } else {
        double s = ch, w = std::max(1.0, std::fabs(ch));
        int negligible = 0;
        while (s < kTailCap) {
          double e = s + w;
          double part = detail::integrate_adaptive(f, s, e, d.order);
          acc += part;
          if (s >= kTailMin && std::fabs(part) <= 1e-16 * (std::fabs(acc) + 1e-300)) {
            if (++negligible >= 3) break;
          } else {
            negligible = 0;
          }
          s = e;
          w *= 2.0;
        }
      }
    }
    // left of the core
    if (lo < cl) {
      if (std::isfinite(lo)) {
        acc += finite_piece(lo, cl);
      } else {
        double s = cl, w = std::max(1.0, std::fabs(cl));
        int negligible = 0;
        while (s > -kTailCap) {
          double e = s - w;
          double part = detail::integrate_adaptive(f, e, s, d.order);
          acc += part;
          if (-s >= kTailMin && std::fabs(part) <= 1e-16 * (std::fabs(acc) + 1e-300)) {
            if (++negligible >= 3) break;
          } else {
            negligible = 0;
          }
          s = e;
          w *= 2.0;
        }
      }
    }
    if (!std::isfinite(acc)) throw std::runtime_error("density integral is not finite");
    return acc;
  }

 private:
  MeasureRep(Repr r, int d, double mass) : repr_(std::move(r)), dim_(d), mass_(mass) {
    if (!std::isfinite(mass_)) throw std::invalid_argument("MeasureRep: non-finite total mass");
  }

  Repr repr_;
  int dim_ = 1;
  double mass_ = 0.0;
};

namespace detail {
template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;
}  // namespace detail

// ---------------------------------------------------------------------------
// cdf and orthant masses

/// F_m(x) = m(]-inf, x]); right-continuous and monotone in each coordinate.
inline double cdf(const MeasureRep& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.dim())
    throw std::invalid_argument("cdf: point dimension mismatch");
  for (double c : x)
    if (std::isnan(c)) throw std::invalid_argument("cdf: NaN coordinate");
  return std::visit(
      detail::overloaded{
          [&](const MeasureRep::Atomic& a) {
            double s = 0.0;
            for (const auto& at : a.atoms) {
              bool inside = true;
              for (std::size_t i = 0; i < x.size(); ++i)
                if (!(at.position[i] <= x[i])) {
                  inside = false;
                  break;
                }
              if (inside) s += at.weight;
            }
            return s;
          },
          [&](const MeasureRep::Density& d) {
            const double t = x[0];
            if (t <= d.lo) return 0.0;
            if (t >= d.hi) return d.mass;
            if (d.cdf_fn) return d.cdf_fn(t);
            return MeasureRep::integrate(d, d.pdf, -kInf, t, 0);
          },
          [&](const MeasureRep::Mixture& mix) {
            double s = 0.0;
            for (const auto& [c, p] : mix.parts) s += c * cdf(*p, x);
            return s;
          },
          [&](const MeasureRep::Product& pr) {
            double s = 1.0;
            for (std::size_t i = 0; i < pr.factors.size(); ++i)
              s *= cdf(*pr.factors[i], {x[i]});
            return s;
          }},
      m.repr());
}

inline double cdf(const MeasureRep& m, double x) { return cdf(m, std::vector<double>{x}); }

/// Mass of the open lower orthant ]-inf, x[ (strict in every coordinate).
inline double open_orthant_mass(const MeasureRep& m, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != m.dim())
    throw std::invalid_argument("open_orthant_mass: point dimension mismatch");
  return std::visit(
      detail::overloaded{
          [&](const MeasureRep::Atomic& a) {
            double s = 0.0;
            for (const auto& at : a.atoms) {
              bool inside = true;
              for (std::size_t i = 0; i < x.size(); ++i)
                if (!(at.position[i] < x[i])) {
                  inside = false;
                  break;
                }
              if (inside) s += at.weight;
            }
            return s;
          },
          [&](const MeasureRep::Density&) { return cdf(m, x); },
          [&](const MeasureRep::Mixture& mix) {
            double s = 0.0;
            for (const auto& [c, p] : mix.parts) s += c * open_orthant_mass(*p, x);
            return s;
          },
          [&](const MeasureRep::Product& pr) {
            double s = 1.0;
            for (std::size_t i = 0; i < pr.factors.size(); ++i)
              s *= open_orthant_mass(*pr.factors[i], {x[i]});
            return s;
          }},
      m.repr());
}

/// lambda_F(boundary of ]-inf, x]); zero exactly when x is a continuity point.
inline double orthant_boundary_mass(const MeasureRep& m, const std::vector<double>& x) {
  return cdf(m, x) - open_orthant_mass(m, x);
}

/// True when the measure has no density part anywhere.
inline bool is_purely_atomic(const MeasureRep& m) {
  return std::visit(detail::overloaded{[](const MeasureRep::Atomic&) { return true; },
                                       [](const MeasureRep::Density&) { return false; },
                                       [](const MeasureRep::Mixture& mix) {
                                         for (const auto& [c, p] : mix.parts)
                                           if (!is_purely_atomic(*p)) return false;
                                         return true;
                                       },
                                       [](const MeasureRep::Product& pr) {
                                         for (const auto& p : pr.factors)
                                           if (!is_purely_atomic(*p)) return false;
                                         return true;
                                       }},
                    m.repr());
}

/// Flatten a purely atomic 1-d measure to (position, weight) pairs,
/// merging coincident positions.
inline std::vector<std::pair<double, double>> flatten_atoms_1d(const MeasureRep& m,
                                                               double scale = 1.0) {
  if (m.dim() != 1) throw std::invalid_argument("flatten_atoms_1d: one-dimensional measures only");
  std::vector<std::pair<double, double>> out;
  std::visit(detail::overloaded{[&](const MeasureRep::Atomic& a) {
                                  for (const auto& at : a.atoms)
                                    out.emplace_back(at.position[0], scale * at.weight);
                                },
                                [&](const MeasureRep::Density&) {
                                  throw std::invalid_argument(
                                      "flatten_atoms_1d: measure has a density part; discretize first");
                                },
                                [&](const MeasureRep::Mixture& mix) {
                                  for (const auto& [c, p] : mix.parts) {
                                    auto sub = flatten_atoms_1d(*p, scale * c);
                                    out.insert(out.end(), sub.begin(), sub.end());
                                  }
                                },
                                [&](const MeasureRep::Product& pr) {
                                  auto sub = flatten_atoms_1d(*pr.factors[0], scale);
                                  out.insert(out.end(), sub.begin(), sub.end());
                                }},
             m.repr());
  std::sort(out.begin(), out.end());
  std::vector<std::pair<double, double>> merged;
  for (const auto& pw : out) {
    if (!merged.empty() && merged.back().first == pw.first)
      merged.back().second += pw.second;
    else
      merged.push_back(pw);
  }
  return merged;
}

// ---------------------------------------------------------------------------
// Moments

/// mu_alpha = int u^alpha dlambda_F(u). Exact sums for atoms; composite
/// Gauss quadrature for density parts with tail truncation per the
/// |u|^n <= eps u^{2r} device (eps = 1e-12).
inline double moment(const MeasureRep& m, const MultiIndex& alpha) {
  if (alpha.dim() != m.dim()) throw std::invalid_argument("moment: multi-index dimension mismatch");
  return std::visit(
      detail::overloaded{
          [&](const MeasureRep::Atomic& a) {
            double s = 0.0;
            for (const auto& at : a.atoms) {
              double term = at.weight;
              for (std::size_t i = 0; i < at.position.size(); ++i)
                term *= detail::powi(at.position[i], alpha.components[i]);
              s += term;
            }
            if (!std::isfinite(s)) throw std::runtime_error("moment: atomic sum overflowed");
            return s;
          },
          [&](const MeasureRep::Density& d) {
            const int n = alpha.components[0];
            auto f = [&d, n](double u) {
              const double p = d.pdf(u);
              if (!(p > 0.0)) return 0.0;
              const double au = std::fabs(u);
              if (n == 0) return p;
              if (n * std::log(std::max(au, 1.0)) <= 640.0) return detail::powi(u, n) * p;
              const double v = std::exp(n * std::log(au) + std::log(p));
              return ((u < 0.0) && (n & 1)) ? -v : v;
            };
            double r = MeasureRep::integrate(d, f, -kInf, kInf, n);
            if (!std::isfinite(r)) throw std::runtime_error("moment: density integral not finite");
            return r;
          },
          [&](const MeasureRep::Mixture& mix) {
            double s = 0.0;
            for (const auto& [c, p] : mix.parts) s += c * moment(*p, alpha);
            return s;
          },
          [&](const MeasureRep::Product& pr) {
            double s = 1.0;
            for (std::size_t i = 0; i < pr.factors.size(); ++i)
              s *= moment(*pr.factors[i], MultiIndex{alpha.components[i]});
            return s;
          }},
      m.repr());
}

inline double moment(const MeasureRep& m, int order) { return moment(m, MultiIndex{order}); }

/// int |u|^j dm for a 1-d measure.
inline double absolute_moment(const MeasureRep& m, int j) {
  if (m.dim() != 1) throw std::invalid_argument("absolute_moment: one-dimensional measures only");
  return std::visit(
      detail::overloaded{
          [&](const MeasureRep::Atomic& a) {
            double s = 0.0;
            for (const auto& at : a.atoms) s += at.weight * detail::powi(std::fabs(at.position[0]), j);
            return s;
          },
          [&](const MeasureRep::Density& d) {
            auto f = [&d, j](double u) {
              const double p = d.pdf(u);
              if (!(p > 0.0)) return 0.0;
              const double au = std::fabs(u);
              if (j == 0) return p;
              if (j * std::log(std::max(au, 1.0)) <= 640.0) return detail::powi(au, j) * p;
              return std::exp(j * std::log(au) + std::log(p));
            };
            return MeasureRep::integrate(d, f, -kInf, kInf, j);
          },
          [&](const MeasureRep::Mixture& mix) {
            double s = 0.0;
            for (const auto& [c, p] : mix.parts) s += c * absolute_moment(*p, j);
            return s;
          },
          [&](const MeasureRep::Product& pr) { return absolute_moment(*pr.factors[0], j); }},
      m.repr());
}

/// P(|X| >= k) for a 1-d measure.
inline double prob_abs_ge(const MeasureRep& m, double k) {
  if (m.dim() != 1) throw std::invalid_argument("prob_abs_ge: one-dimensional measures only");
  return std::visit(detail::overloaded{[&](const MeasureRep::Atomic& a) {
                                         double s = 0.0;
                                         for (const auto& at : a.atoms)
                                           if (std::fabs(at.position[0]) >= k) s += at.weight;
                                         return s;
                                       },
                                       [&](const MeasureRep::Density& d) {
                                         // continuous: boundary points carry no mass
                                         return cdf(m, -k) + (d.mass - cdf(m, k));
                                       },
                                       [&](const MeasureRep::Mixture& mix) {
                                         double s = 0.0;
                                         for (const auto& [c, p] : mix.parts)
                                           s += c * prob_abs_ge(*p, k);
                                         return s;
                                       },
                                       [&](const MeasureRep::Product& pr) {
                                         return prob_abs_ge(*pr.factors[0], k);
                                       }},
                    m.repr());
}

// ---------------------------------------------------------------------------
// F-volume and df validation

/// Delta F(a,b) = sum over eps in {0,1}^d of (-1)^{s(eps)} F(b + eps*(a-b)).
inline double f_volume(const DistributionFunction& F, const Box& box) {
  if (box.dim() != F.dim) throw std::invalid_argument("f_volume: box dimension mismatch");
  if (box.dim() > 20) throw std::invalid_argument("f_volume: dimension too large");
  if (!box.bounded()) throw std::invalid_argument("f_volume: corners must be finite");
  double s = 0.0;
  const unsigned corners = 1u << box.dim();
  for (unsigned mask = 0; mask < corners; ++mask) {
    const double v = F(box.corner(mask));
    if (!std::isfinite(v)) throw std::runtime_error("f_volume: non-finite corner evaluation");
    s += (__builtin_popcount(mask) & 1) ? -v : v;
  }
  return s;
}

/// The df induced by a measure: x -> m(]-inf, x]).
inline DistributionFunction df_from_measure(const MeasureRep& m) {
  auto mp = std::make_shared<const MeasureRep>(m);
  return DistributionFunction{mp->dim(),
                              [mp](const std::vector<double>& x) { return cdf(*mp, x); }};
}

/// Finite lattice of test points, one sorted axis per dimension.
struct GridSpec {
  std::vector<std::vector<double>> axes;

  int dim() const { return static_cast<int>(axes.size()); }
  void validate() const {
    if (axes.empty()) throw std::invalid_argument("GridSpec: empty grid");
    for (const auto& ax : axes) {
      if (ax.empty()) throw std::invalid_argument("GridSpec: empty axis");
      if (!std::is_sorted(ax.begin(), ax.end()))
        throw std::invalid_argument("GridSpec: axes must be sorted");
    }
  }
};

struct DfCheckReport {
  bool box_positivity_pass = true;
  double min_box_volume = 0.0;
  std::optional<Box> witness_box;

  struct RcEntry {
    double h;
    double max_defect;
  };
  std::vector<RcEntry> right_continuity;
  bool right_continuity_pass = true;

  bool limits_checked = false;
  double lower_limit_defect = 0.0;  // max |F| with some coordinate at its grid minimum
  double upper_limit_defect = 0.0;  // |F - m0| at the all-maximum corner
  bool limits_pass = true;

  bool pass = true;
};

namespace detail {
// Iterate multi-indices idx with idx[i] < extents[i].
inline bool advance_odometer(std::vector<std::size_t>& idx, const std::vector<std::size_t>& extents) {
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (++idx[i] < extents[i]) return true;
    idx[i] = 0;
  }
  return false;
}
}  // namespace detail

/// Validate df axioms on a grid: nonnegative volumes on all adjacent grid
/// boxes, a shrinking-h right-continuity ladder, and (when expected_mass is
/// given) the probability limits at the grid extremes. Failures are
/// reported, never thrown.
inline DfCheckReport is_df(const DistributionFunction& F, const GridSpec& grid, double tol,
                           std::optional<double> expected_mass = std::nullopt) {
  grid.validate();
  if (grid.dim() != F.dim) throw std::invalid_argument("is_df: grid dimension mismatch");
  DfCheckReport rep;
  const int d = F.dim;

  // (a) box volumes over adjacent cells
  rep.min_box_volume = kInf;
  std::vector<std::size_t> extents(d), idx(d, 0);
  bool any_cell = true;
  for (int i = 0; i < d; ++i) {
    if (grid.axes[i].size() < 2) any_cell = false;
    extents[i] = grid.axes[i].size() >= 2 ? grid.axes[i].size() - 1 : 1;
  }
  if (any_cell) {
    do {
      std::vector<double> lo(d), hi(d);
      for (int i = 0; i < d; ++i) {
        lo[i] = grid.axes[i][idx[i]];
        hi[i] = grid.axes[i][idx[i] + 1];
      }
      Box cell(lo, hi);
      const double v = f_volume(F, cell);
      if (v < rep.min_box_volume) {
        rep.min_box_volume = v;
        rep.witness_box = cell;
      }
    } while (detail::advance_odometer(idx, extents));
    rep.box_positivity_pass = rep.min_box_volume >= -tol;
  } else {
    rep.min_box_volume = 0.0;
  }

  // (b) right-continuity ladder
  for (double h = 1e-3; h >= 0.5e-9; h /= 10.0) {
    double worst = 0.0;
    std::vector<std::size_t> pextents(d), pidx(d, 0);
    for (int i = 0; i < d; ++i) pextents[i] = grid.axes[i].size();
    do {
      std::vector<double> x(d), xh(d);
      for (int i = 0; i < d; ++i) {
        x[i] = grid.axes[i][pidx[i]];
        xh[i] = x[i] + h;
      }
      worst = std::max(worst, std::fabs(F(xh) - F(x)));
    } while (detail::advance_odometer(pidx, pextents));
    rep.right_continuity.push_back({h, worst});
  }
  rep.right_continuity_pass =
      rep.right_continuity.back().max_defect <= std::max(tol, 1e-8);

  // (c) optional probability limits via the grid extremes
  if (expected_mass) {
    rep.limits_checked = true;
    std::vector<double> top(d);
    for (int i = 0; i < d; ++i) top[i] = grid.axes[i].back();
    rep.upper_limit_defect = std::fabs(F(top) - *expected_mass);
    rep.lower_limit_defect = 0.0;
    for (int i = 0; i < d; ++i) {
      std::vector<double> x = top;
      x[i] = grid.axes[i].front();
      rep.lower_limit_defect = std::max(rep.lower_limit_defect, std::fabs(F(x)));
    }
    rep.limits_pass = rep.upper_limit_defect <= tol && rep.lower_limit_defect <= tol;
  }

  rep.pass = rep.box_positivity_pass && rep.right_continuity_pass &&
             (!rep.limits_checked || rep.limits_pass);
  return rep;
}

// ---------------------------------------------------------------------------
// Spectrum (1-d)

/// Point spectrum (atoms), spectrum, and support of a 1-d measure. Density
/// parts contribute the closure of their declared support, not a numerical
/// zero-set search.
struct SpectrumReport {
  std::vector<std::pair<double, double>> point_spectrum;  // (position, mass), ascending
  std::vector<std::pair<double, double>> intervals;       // merged closed intervals
  std::vector<double> isolated_points;                    // atoms outside every interval

  bool covers(double x) const {
    for (const auto& [lo, hi] : intervals)
      if (lo <= x && x <= hi) return true;
    return false;
  }
  bool has_atom_near(double x, double tol) const {
    for (const auto& [p, w] : point_spectrum)
      if (std::fabs(p - x) <= tol) return true;
    return false;
  }
};

namespace detail {
inline void collect_spectrum(const MeasureRep& m, double scale,
                             std::vector<std::pair<double, double>>& atoms,
                             std::vector<std::pair<double, double>>& intervals) {
  std::visit(overloaded{[&](const MeasureRep::Atomic& a) {
                          for (const auto& at : a.atoms) atoms.emplace_back(at.position[0], scale * at.weight);
                        },
                        [&](const MeasureRep::Density& d) { intervals.emplace_back(d.lo, d.hi); },
                        [&](const MeasureRep::Mixture& mix) {
                          for (const auto& [c, p] : mix.parts)
                            collect_spectrum(*p, scale * c, atoms, intervals);
                        },
                        [&](const MeasureRep::Product& pr) {
                          collect_spectrum(*pr.factors[0], scale, atoms, intervals);
                        }},
             m.repr());
}
}  // namespace detail

inline SpectrumReport spectrum_report(const MeasureRep& m) {
  if (m.dim() != 1) throw std::invalid_argument("spectrum_report: one-dimensional measures only");
  SpectrumReport rep;
  std::vector<std::pair<double, double>> atoms, intervals;
  detail::collect_spectrum(m, 1.0, atoms, intervals);

  std::sort(atoms.begin(), atoms.end());
  for (const auto& pw : atoms) {
    if (!rep.point_spectrum.empty() && rep.point_spectrum.back().first == pw.first)
      rep.point_spectrum.back().second += pw.second;
    else
      rep.point_spectrum.push_back(pw);
  }

  std::sort(intervals.begin(), intervals.end());
  for (const auto& iv : intervals) {
    if (!rep.intervals.empty() && iv.first <= rep.intervals.back().second)
      rep.intervals.back().second = std::max(rep.intervals.back().second, iv.second);
    else
      rep.intervals.push_back(iv);
  }

  for (const auto& [p, w] : rep.point_spectrum)
    if (!rep.covers(p)) rep.isolated_points.push_back(p);
  return rep;
}

/// True iff every corner of the box is a continuity point of F_m up to tol;
/// exact (tol ignored) for purely atomic measures.
inline bool is_f_continuous_interval(const MeasureRep& m, const Box& box, double tol) {
  if (box.dim() != m.dim()) throw std::invalid_argument("is_f_continuous_interval: dimension mismatch");
  if (!box.bounded()) throw std::invalid_argument("is_f_continuous_interval: box must be bounded");
  const bool exact = is_purely_atomic(m);
  const unsigned corners = 1u << box.dim();
  for (unsigned mask = 0; mask < corners; ++mask) {
    const double jump = orthant_boundary_mass(m, box.corner(mask));
    if (exact ? (jump > 0.0) : (jump > tol)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Discretization

/// Replace density parts by the atoms of their own quadrature rule;
/// atomic parts are kept. The result mass matches the input mass.
inline MeasureRep discretize(const MeasureRep& m, int target_atoms = 128) {
  if (m.dim() != 1) throw std::invalid_argument("discretize: one-dimensional measures only");
  if (target_atoms < 1) throw std::invalid_argument("discretize: target_atoms must be positive");
  if (is_purely_atomic(m)) return m;
  return std::visit(
      detail::overloaded{
          [&](const MeasureRep::Atomic&) { return m; },
          [&](const MeasureRep::Density& d) {
            std::vector<double> xs, ws;
            auto add_rule = [&](double a, double b, int order) {
              if (!(a < b)) return;
              const auto& rule = detail::gauss_legendre(order);
              const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
              for (int i = 0; i < order; ++i) {
                const double u = mid + half * rule.nodes[i];
                const double p = d.pdf(u);
                if (p > 0.0) {
                  xs.push_back(u);
                  ws.push_back(half * rule.weights[i] * p);
                }
              }
            };
            if (std::isfinite(d.lo) && std::isfinite(d.hi)) {
              add_rule(d.lo, d.hi, std::min(target_atoms, 200));
            } else {
              const int order = std::min(std::max(8, target_atoms / 8), 64);
              add_rule(std::max(d.lo, d.core_lo), std::min(d.hi, d.core_hi), order);
              for (int side = 0; side < 2; ++side) {
                bool right = side == 0;
                if (right ? !std::isfinite(d.hi) : !std::isfinite(d.lo)) {
                  double s = right ? d.core_hi : d.core_lo;
                  double w = std::max(1.0, std::fabs(s));
                  for (int j = 0; j < 48; ++j) {
                    double e = right ? s + w : s - w;
                    add_rule(std::min(s, e), std::max(s, e), order);
                    s = e;
                    w *= 2.0;
                  }
                }
              }
            }
            if (xs.empty()) throw std::runtime_error("discretize: density produced no atoms");
            double total = 0.0;
            for (double w : ws) total += w;
            for (double& w : ws) w *= d.mass / total;
            return MeasureRep::atomic1d(xs, ws);
          },
          [&](const MeasureRep::Mixture& mix) {
            std::vector<std::pair<double, MeasureRep>> comps;
            for (const auto& [c, p] : mix.parts) comps.emplace_back(c, discretize(*p, target_atoms));
            return MeasureRep::mixture(std::move(comps));
          },
          [&](const MeasureRep::Product& pr) { return discretize(*pr.factors[0], target_atoms); }},
      m.repr());
}

// ---------------------------------------------------------------------------
// Built-in measures

inline MeasureRep dirac(double c) { return MeasureRep::atomic1d({c}, {1.0}); }

inline MeasureRep uniform(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("uniform: requires a < b");
  const double inv = 1.0 / (b - a);
  auto pdf = [a, b, inv](double u) { return (u >= a && u <= b) ? inv : 0.0; };
  auto cdf_fn = [a, b, inv](double x) { return std::clamp((x - a) * inv, 0.0, 1.0); };
  return MeasureRep::density(a, b, pdf, 32, cdf_fn, 1.0);
}

inline MeasureRep normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("normal: requires sigma > 0");
  const double inv = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  auto pdf = [mu, sigma, inv](double u) {
    const double z = (u - mu) / sigma;
    return inv * std::exp(-0.5 * z * z);
  };
  auto cdf_fn = [mu, sigma](double x) { return 0.5 * std::erfc(-(x - mu) / (sigma * std::sqrt(2.0))); };
  return MeasureRep::density(-kInf, kInf, pdf, 32, cdf_fn, 1.0,
                             std::make_pair(mu - 12.0 * sigma, mu + 12.0 * sigma));
}

inline MeasureRep lognormal(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("lognormal: requires sigma > 0");
  const double inv = 1.0 / (sigma * std::sqrt(2.0 * M_PI));
  auto pdf = [sigma, inv](double u) {
    if (!(u > 0.0)) return 0.0;
    const double z = std::log(u) / sigma;
    return inv / u * std::exp(-0.5 * z * z);
  };
  auto cdf_fn = [sigma](double x) {
    if (!(x > 0.0)) return 0.0;
    return 0.5 * std::erfc(-std::log(x) / (sigma * std::sqrt(2.0)));
  };
  return MeasureRep::density(0.0, kInf, pdf, 32, cdf_fn, 1.0,
                             std::make_pair(0.0, std::exp(6.0 * sigma)));
}

/// Binomial(k, p) as k+1 atoms; weights via log-gamma for stability.
inline MeasureRep binomial(int k, double p) {
  if (k < 1) throw std::invalid_argument("binomial: requires k >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("binomial: requires p in [0,1]");
  std::vector<double> xs(k + 1), ws(k + 1);
  for (int j = 0; j <= k; ++j) {
    xs[j] = j;
    double lw = std::lgamma(k + 1.0) - std::lgamma(j + 1.0) - std::lgamma(k - j + 1.0);
    if (p > 0.0) lw += j * std::log(p);
    if (p < 1.0) lw += (k - j) * std::log1p(-p);
    if ((j > 0 && p == 0.0) || (j < k && p == 1.0))
      lw = -kInf;
    ws[j] = std::exp(lw);
  }
  std::vector<double> fx, fw;
  for (int j = 0; j <= k; ++j)
    if (ws[j] > 0.0) {
      fx.push_back(xs[j]);
      fw.push_back(ws[j]);
    }
  return MeasureRep::atomic1d(fx, fw);
}

/// Poisson(lambda) truncated at N; tail mass (< 1e-12 for the default,
/// adaptive N) is folded into the last atom. Pass N <= 0 for adaptive.
inline MeasureRep poisson(double lambda, int truncation = -1) {
  if (!(lambda > 0.0)) throw std::invalid_argument("poisson: requires lambda > 0");
  int N = truncation;
  std::vector<double> ws;
  double cum = 0.0;
  double w = std::exp(-lambda);
  for (int j = 0;; ++j) {
    ws.push_back(w);
    cum += w;
    if (N > 0 && j >= N) break;
    if (N <= 0 && j >= 1 && 1.0 - cum < 1e-12 && j >= lambda) break;
    if (j > 100000) break;
    w *= lambda / (j + 1);
  }
  ws.back() += std::max(0.0, 1.0 - cum);  // fold the tail into the last atom
  std::vector<double> xs(ws.size());
  for (std::size_t j = 0; j < ws.size(); ++j) xs[j] = static_cast<double>(j);
  return MeasureRep::atomic1d(xs, ws);
}

}  // namespace momentkit
