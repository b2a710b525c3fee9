#pragma once

// Constructive route from a feasible moment sequence to an atomic
// representing measure: three-term recurrence coefficients from raw moments
// (Chebyshev's algorithm), Gauss quadrature through the Jacobi matrix
// (Golub & Welsch), and a verified atomic reconstruction.

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "momentkit/moment_analysis.hpp"
#include "momentkit/sequences.hpp"
#include "momentkit/tridiagonal_ql.hpp"

namespace momentkit {

/// Recurrence coefficients of the orthogonal polynomials of a sequence:
/// p_{k+1}(u) = (u - alpha_k) p_k(u) - beta_k p_{k-1}(u). `offdiag` holds
/// beta_1..beta_{n-1}; the tridiagonal Jacobi matrix uses sqrt(beta_k).
struct JacobiMatrix {
  std::vector<double> diag;     // alpha_0 .. alpha_{n-1}
  std::vector<double> offdiag;  // beta_1 .. beta_{n-1}, strictly positive
  double mass = 1.0;            // m_0
  bool truncated = false;       // flat sequence: fewer rows than requested
  bool conditioning_warning = false;

  int rows() const { return static_cast<int>(diag.size()); }
};

/// Recurrence coefficients from raw moments. The Hankel block H0 must be
/// positive semidefinite; positive definite sequences get floor((N+1)/2)
/// rows, flat (singular) sequences are truncated at the numerical rank.
inline JacobiMatrix jacobi_from_moments(const MomentSequence& seq) {
  const int N = seq.max_order();
  if (N < 1) throw std::invalid_argument("jacobi_from_moments: needs moments at least to order 1");

  // PSD gate on the largest admissible H0
  const int h_size = N / 2 + 1;
  const HankelMatrix H = hankel(seq, 0, h_size);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.entries);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("jacobi_from_moments: eigen decomposition failed");
  const double lmax = es.eigenvalues()(h_size - 1);
  const double lmin = es.eigenvalues()(0);
  const double scale = std::max(1.0, std::fabs(lmax));
  if (lmin < -kFeasibilityTol * scale) {
    std::ostringstream msg;
    msg << "jacobi_from_moments: indefinite Hankel block H0[" << h_size
        << "], min eigenvalue " << lmin;
    throw std::domain_error(msg.str());
  }
  int rank = 0;
  for (int i = 0; i < h_size; ++i)
    if (es.eigenvalues()(i) > kFeasibilityTol * scale) ++rank;
  if (rank == 0) throw std::domain_error("jacobi_from_moments: zero Hankel block");

  const int n_target = (N + 1) / 2;
  int n = std::min(n_target, rank);

  JacobiMatrix J;
  J.mass = seq[0];
  J.conditioning_warning = N > kConditioningOrderLimit;

  // Chebyshev's algorithm on raw moments (Golub & Meurant form); sigma[k][l]
  // are the mixed inner products <p_k, u^l>.
  std::vector<double> a(n, 0.0), b(std::max(0, n - 1), 0.0);
  std::vector<std::vector<double>> sigma(n + 1, std::vector<double>(2 * n, 0.0));
  for (int l = 0; l < 2 * n && l <= N; ++l) sigma[0][l] = seq[l];
  a[0] = seq[1] / seq[0];
  int built = 1;
  for (int k = 1; k < n; ++k) {
    for (int l = k; l <= 2 * n - k - 1; ++l) {
      double s = sigma[k - 1][l + 1] - a[k - 1] * sigma[k - 1][l];
      if (k > 1) s -= b[k - 2] * sigma[k - 2][l];
      sigma[k][l] = s;
    }
    const double beta = sigma[k][k] / sigma[k - 1][k - 1];
    if (!(beta > 0.0) || !std::isfinite(beta)) {
      J.truncated = true;  // flat: orthogonal polynomial of degree k vanishes in L2
      break;
    }
    b[k - 1] = beta;
    a[k] = sigma[k][k + 1] / sigma[k][k] - sigma[k - 1][k] / sigma[k - 1][k - 1];
    if (!std::isfinite(a[k])) {
      J.truncated = true;
      break;
    }
    built = k + 1;
  }
  if (built < n_target) J.truncated = true;
  a.resize(built);
  b.resize(built - 1);
  J.diag = std::move(a);
  J.offdiag = std::move(b);
  return J;
}

/// Quadrature rule: nodes strictly ascending, weights positive, total
/// weight equal to the represented mass.
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  int size() const { return static_cast<int>(nodes.size()); }
  double mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
  double integrate_power(int order) const {
    double s = 0.0;
    for (int i = 0; i < size(); ++i) s += weights[i] * detail::powi(nodes[i], order);
    return s;
  }
  MeasureRep measure() const { return MeasureRep::atomic1d(nodes, weights); }
};

/// Golub-Welsch: nodes are the eigenvalues of the leading n x n tridiagonal
/// section, weight_i = m0 * (first component of the i-th normalized
/// eigenvector)^2. The eigen-solve residual must satisfy
/// ||J q - lambda q|| <= 1e-12 ||J||.
inline Quadrature gauss_quadrature(const JacobiMatrix& J, int n) {
  if (n < 1 || n > J.rows()) throw std::invalid_argument("gauss_quadrature: invalid point count");
  std::vector<double> d(J.diag.begin(), J.diag.begin() + n);
  std::vector<double> e(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    if (!(J.offdiag[i] > 0.0)) throw std::invalid_argument("gauss_quadrature: nonpositive beta");
    e[i] = std::sqrt(J.offdiag[i]);
  }

  TridiagonalEigen eig = tridiagonal_ql(d, e);

  double jnorm = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = std::fabs(J.diag[i]);
    if (i > 0) row += std::fabs(e[i - 1]);
    if (i < n - 1) row += std::fabs(e[i]);
    jnorm = std::max(jnorm, row);
  }
  jnorm = std::max(jnorm, 1e-300);

  // residual check per eigenpair
  for (int i = 0; i < n; ++i) {
    const auto& v = eig.vectors[i];
    const double lambda = eig.eigenvalues[i];
    double worst = 0.0;
    for (int r = 0; r < n; ++r) {
      double mv = J.diag[r] * v[r];
      if (r > 0) mv += e[r - 1] * v[r - 1];
      if (r < n - 1) mv += e[r] * v[r + 1];
      worst = std::max(worst, std::fabs(mv - lambda * v[r]));
    }
    if (worst > 1e-12 * jnorm)
      throw std::runtime_error("gauss_quadrature: eigen residual exceeds 1e-12 * ||J||");
  }

  Quadrature q;
  q.nodes.resize(n);
  q.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    q.nodes[i] = eig.eigenvalues[i];
    double norm2 = 0.0;
    for (double c : eig.vectors[i]) norm2 += c * c;
    q.weights[i] = J.mass * eig.vectors[i][0] * eig.vectors[i][0] / norm2;
  }
  for (int i = 0; i + 1 < n; ++i)
    if (!(q.nodes[i] < q.nodes[i + 1]))
      throw std::runtime_error("gauss_quadrature: nodes are not strictly increasing");
  return q;
}

struct ReconstructionResult {
  MeasureRep measure;
  Quadrature quadrature;
  std::vector<int> clamped_nodes;  // indices clamped onto the boundary of S0
  double max_rel_error = 0.0;
  int worst_order = 0;
  struct VerificationRow {
    int order;
    double target;
    double achieved;
    double rel_error;
  };
  std::vector<VerificationRow> verification;
  bool conditioning_warning = false;
};

inline constexpr double kNodeClampTol = 1e-8;

/// Build the atomic representing measure of a feasible sequence: the Gauss
/// quadrature of its orthogonal polynomials, with floor((N+1)/2) atoms (or
/// fewer for flat sequences). Nodes within 1e-8 of the boundary of S0 are
/// clamped onto it; farther outside is an error. The moments of the result
/// are recomputed and checked against the input.
inline ReconstructionResult representing_measure(const MomentSequence& seq, const SupportSet& s0,
                                                 double tol = 1e-9) {
  const FeasibilityVerdict verdict = check_s0_nonneg(seq, s0);
  if (verdict.infeasible()) {
    std::ostringstream msg;
    msg << "representing_measure: sequence infeasible on " << s0.describe()
        << " (min scaled eigenvalue " << verdict.min_scaled_eigen << ")";
    throw std::domain_error(msg.str());
  }

  const JacobiMatrix J = jacobi_from_moments(seq);
  const int N = seq.max_order();
  const int n = std::min((N + 1) / 2, J.rows());
  Quadrature q = gauss_quadrature(J, n);

  ReconstructionResult res{MeasureRep::atomic1d(q.nodes, q.weights), q, {}, 0.0, 0, {}, J.conditioning_warning};

  // clamp nodes onto S0 where floating drift pushed them out
  const double bound_scale =
      std::max({1.0, std::fabs(s0.a), s0.kind == SupportSet::Kind::segment ? std::fabs(s0.b) : 0.0});
  bool clamped_any = false;
  for (int i = 0; i < q.size(); ++i) {
    const double dist = s0.distance(q.nodes[i]);
    if (dist == 0.0) continue;
    if (dist <= kNodeClampTol * bound_scale) {
      q.nodes[i] = s0.clamp(q.nodes[i]);
      res.clamped_nodes.push_back(i);
      clamped_any = true;
    } else {
      std::ostringstream msg;
      msg << "representing_measure: node " << q.nodes[i] << " lies outside " << s0.describe();
      throw std::domain_error(msg.str());
    }
  }
  if (clamped_any) {
    res.quadrature = q;
    res.measure = MeasureRep::atomic1d(q.nodes, q.weights);
  }

  // verify moments through order min(N, 2n-1); relative error with unit floor
  const int top = std::min(N, 2 * n - 1);
  for (int j = 0; j <= top; ++j) {
    const double achieved = q.integrate_power(j);
    const double rel = std::fabs(achieved - seq[j]) / std::max(1.0, std::fabs(seq[j]));
    res.verification.push_back({j, seq[j], achieved, rel});
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_order = j;
    }
  }
  if (res.max_rel_error > tol) {
    std::ostringstream msg;
    msg << "representing_measure: moment mismatch " << res.max_rel_error << " at order "
        << res.worst_order << " exceeds tolerance " << tol;
    throw std::domain_error(msg.str());
  }
  return res;
}

}  // namespace momentkit
