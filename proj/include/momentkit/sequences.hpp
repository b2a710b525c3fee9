#pragma once

// Moment sequences, support sets, polynomials, the moment functional
// mu(P) = sum x_n m_n, and Hankel arrangements of a sequence.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "momentkit/measure.hpp"

namespace momentkit {

/// Finite prefix (m_0, ..., m_N) of a real moment sequence.
struct MomentSequence {
  std::vector<double> values;

  MomentSequence() = default;
  explicit MomentSequence(std::vector<double> v) : values(std::move(v)) {
    if (values.empty()) throw std::invalid_argument("MomentSequence: empty");
    if (!(values[0] > 0.0)) throw std::invalid_argument("MomentSequence: m0 must be positive");
    for (double m : values)
      if (!std::isfinite(m)) throw std::invalid_argument("MomentSequence: non-finite entry");
  }

  int max_order() const { return static_cast<int>(values.size()) - 1; }
  double operator[](int n) const { return values.at(static_cast<std::size_t>(n)); }

  MomentSequence extended(double next) const {
    std::vector<double> v = values;
    v.push_back(next);
    return MomentSequence(std::move(v));
  }
};

/// Moments m_0..m_N of a measure (1-d).
inline MomentSequence moments_of(const MeasureRep& m, int N) {
  if (m.dim() != 1) throw std::invalid_argument("moments_of: one-dimensional measures only");
  if (N < 0) throw std::invalid_argument("moments_of: negative order");
  std::vector<double> v(N + 1);
  for (int n = 0; n <= N; ++n) v[n] = moment(m, n);
  return MomentSequence(std::move(v));
}

/// The support constraint S0: whole line, half-line [c, inf), or segment [a, b].
struct SupportSet {
  enum class Kind { whole_line, half_line, segment };
  Kind kind = Kind::whole_line;
  double a = 0.0;  // half-line left end, or segment left end
  double b = 0.0;  // segment right end

  static SupportSet line() { return SupportSet{Kind::whole_line, 0.0, 0.0}; }
  static SupportSet halfline(double c) {
    if (!std::isfinite(c)) throw std::invalid_argument("SupportSet: half-line endpoint not finite");
    return SupportSet{Kind::half_line, c, 0.0};
  }
  static SupportSet segment(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
      throw std::invalid_argument("SupportSet: segment requires finite a < b");
    return SupportSet{Kind::segment, lo, hi};
  }

  bool contains(double x, double tol = 0.0) const {
    switch (kind) {
      case Kind::whole_line: return true;
      case Kind::half_line: return x >= a - tol;
      case Kind::segment: return x >= a - tol && x <= b + tol;
    }
    return false;
  }
  /// Distance from x to the set (0 inside).
  double distance(double x) const {
    switch (kind) {
      case Kind::whole_line: return 0.0;
      case Kind::half_line: return std::max(0.0, a - x);
      case Kind::segment: return std::max({0.0, a - x, x - b});
    }
    return 0.0;
  }
  double clamp(double x) const {
    switch (kind) {
      case Kind::whole_line: return x;
      case Kind::half_line: return std::max(x, a);
      case Kind::segment: return std::min(std::max(x, a), b);
    }
    return x;
  }
  std::string describe() const {
    switch (kind) {
      case Kind::whole_line: return "line";
      case Kind::half_line: return "halfline:" + std::to_string(a);
      case Kind::segment: return "segment:" + std::to_string(a) + "," + std::to_string(b);
    }
    return "";
  }
};

/// Real polynomial in the monomial basis; trailing coefficient nonzero
/// except for the zero polynomial (empty coefficient list).
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { normalize(); }

  static Polynomial monomial(int k, double coeff = 1.0) {
    std::vector<double> c(k + 1, 0.0);
    c[k] = coeff;
    return Polynomial(std::move(c));
  }
  static Polynomial constant(double v) { return Polynomial({v}); }

  bool is_zero() const { return c_.empty(); }
  int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for the zero polynomial
  double coeff(int k) const {
    return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : 0.0;
  }
  const std::vector<double>& coeffs() const { return c_; }

  double operator()(double u) const {
    double r = 0.0;
    for (std::size_t i = c_.size(); i-- > 0;) r = r * u + c_[i];
    return r;
  }

  Polynomial operator+(const Polynomial& o) const {
    std::vector<double> c(std::max(c_.size(), o.c_.size()), 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) c[i] += c_[i];
    for (std::size_t i = 0; i < o.c_.size(); ++i) c[i] += o.c_[i];
    return Polynomial(std::move(c));
  }
  Polynomial operator*(const Polynomial& o) const {
    if (is_zero() || o.is_zero()) return Polynomial();
    std::vector<double> c(c_.size() + o.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i)
      for (std::size_t j = 0; j < o.c_.size(); ++j) c[i + j] += c_[i] * o.c_[j];
    return Polynomial(std::move(c));
  }
  Polynomial operator*(double s) const {
    std::vector<double> c = c_;
    for (double& x : c) x *= s;
    return Polynomial(std::move(c));
  }
  Polynomial squared() const { return (*this) * (*this); }

  /// The polynomial sum_i q_i (u - c)^i expanded in the monomial basis.
  static Polynomial in_shifted_basis(const std::vector<double>& q, double c) {
    Polynomial acc;
    Polynomial shift({-c, 1.0});
    Polynomial power = Polynomial::constant(1.0);
    for (std::size_t i = 0; i < q.size(); ++i) {
      acc = acc + power * q[i];
      power = power * shift;
    }
    return acc;
  }

 private:
  void normalize() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
    for (double x : c_)
      if (!std::isfinite(x)) throw std::invalid_argument("Polynomial: non-finite coefficient");
  }
  std::vector<double> c_;
};

/// mu(P) = sum_n x_n m_n; requires deg(P) <= N.
inline double moment_functional(const MomentSequence& seq, const Polynomial& P) {
  if (P.degree() > seq.max_order())
    throw std::invalid_argument("moment_functional: polynomial degree exceeds available moments");
  double s = 0.0;
  for (int n = 0; n <= P.degree(); ++n) s += P.coeff(n) * seq[n];
  return s;
}

/// Symmetric Hankel arrangement with entry (i,j) = m_{i+j+shift}.
struct HankelMatrix {
  int shift = 0;
  Eigen::MatrixXd entries;

  int size() const { return static_cast<int>(entries.rows()); }
};

inline HankelMatrix hankel(const MomentSequence& seq, int shift, int size) {
  if (shift < 0) throw std::invalid_argument("hankel: negative shift");
  if (size < 1) throw std::invalid_argument("hankel: size must be positive");
  if (2 * (size - 1) + shift > seq.max_order())
    throw std::invalid_argument("hankel: insufficient moments for requested block");
  HankelMatrix H;
  H.shift = shift;
  H.entries.resize(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) H.entries(i, j) = seq[i + j + shift];
  return H;
}

/// Moments of the measure translated by c: m'_j = E[(u-c)^j].
inline std::vector<double> translated_moments(const MomentSequence& seq, double c) {
  const int N = seq.max_order();
  std::vector<double> out(N + 1, 0.0);
  for (int j = 0; j <= N; ++j) {
    double s = 0.0;
    for (int i = 0; i <= j; ++i)
      s += detail::binom(j, i) * detail::powi(-c, j - i) * seq[i];
    out[j] = s;
  }
  return out;
}

}  // namespace momentkit
