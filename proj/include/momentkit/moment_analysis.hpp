#pragma once

// Feasibility of a moment sequence on a support set through positivity of
// Hankel blocks, a randomized sum-of-squares oracle cross-checking the same
// condition, and the determinacy radius criterion on |n!/m_n|^{1/n}.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "momentkit/sequences.hpp"

namespace momentkit {

inline constexpr double kFeasibilityTol = 1e-10;
inline constexpr int kConditioningOrderLimit = 30;

/// One positivity block of the feasibility check. `shift_code` identifies
/// the block in reports: 0 = plain Hankel H0, 1 = once-shifted block of the
/// translated sequence (half-line), 2 = segment localizer.
struct FeasibilityBlock {
  int shift_code = 0;
  int size = 0;
  double min_eigen = 0.0;
  double norm = 0.0;  // spectral norm
  Eigen::VectorXd min_vector;
  Eigen::MatrixXd matrix;

  double scaled_min() const { return min_eigen / std::max(1.0, norm); }
};

struct FeasibilityVerdict {
  enum class Status { feasible, marginal, infeasible };
  /// How the witness certifies: mu(Q^2) < 0, mu((u-c) Q^2) < 0, or
  /// mu((u-a)(b-u) Q^2) < 0.
  enum class WitnessForm { square, shifted_square, segment_square };

  Status status = Status::feasible;
  std::optional<Polynomial> witness;  // the inner factor Q, monomial basis
  WitnessForm witness_form = WitnessForm::square;
  double witness_mu = 0.0;  // mu of the induced nonnegative-on-S0 polynomial
  std::vector<FeasibilityBlock> blocks;
  double min_scaled_eigen = 0.0;
  bool conditioning_warning = false;
  SupportSet support;

  bool infeasible() const { return status == Status::infeasible; }
};

/// The polynomial that is nonnegative on S0 by construction: Q^2 times the
/// localizing factor of the witness form.
inline Polynomial induced_nonneg_polynomial(const Polynomial& Q, FeasibilityVerdict::WitnessForm form,
                                            const SupportSet& s0) {
  Polynomial P = Q.squared();
  switch (form) {
    case FeasibilityVerdict::WitnessForm::square:
      return P;
    case FeasibilityVerdict::WitnessForm::shifted_square:
      return Polynomial({-s0.a, 1.0}) * P;  // (u - c) Q^2
    case FeasibilityVerdict::WitnessForm::segment_square:
      return Polynomial({-s0.a, 1.0}) * Polynomial({s0.b, -1.0}) * P;  // (u-a)(b-u) Q^2
  }
  return P;
}

namespace detail {

inline FeasibilityBlock analyze_block(const Eigen::MatrixXd& M, int shift_code) {
  FeasibilityBlock blk;
  blk.shift_code = shift_code;
  blk.size = static_cast<int>(M.rows());
  blk.matrix = M;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("feasibility: eigen decomposition failed");
  blk.min_eigen = es.eigenvalues()(0);
  blk.norm = std::max(std::fabs(es.eigenvalues()(0)),
                      std::fabs(es.eigenvalues()(blk.size - 1)));
  blk.min_vector = es.eigenvectors().col(0);
  return blk;
}

/// All positivity blocks for the support set, at their largest admissible
/// sizes: whole line H0; half-line adds the once-shifted block of the
/// sequence translated by c; segment adds the localizer with entries
/// (a+b) m_{i+j+1} - ab m_{i+j} - m_{i+j+2}.
inline std::vector<FeasibilityBlock> feasibility_blocks(const MomentSequence& seq,
                                                        const SupportSet& s0) {
  const int N = seq.max_order();
  std::vector<FeasibilityBlock> blocks;
  blocks.push_back(analyze_block(hankel(seq, 0, N / 2 + 1).entries, 0));

  if (s0.kind == SupportSet::Kind::half_line && N >= 1) {
    const auto tm = translated_moments(seq, s0.a);
    const int size = (N - 1) / 2 + 1;
    Eigen::MatrixXd B(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) B(i, j) = tm[i + j + 1];
    blocks.push_back(analyze_block(B, 1));
  } else if (s0.kind == SupportSet::Kind::segment && N >= 2) {
    const int size = (N - 2) / 2 + 1;
    Eigen::MatrixXd L(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        L(i, j) = (s0.a + s0.b) * seq[i + j + 1] - s0.a * s0.b * seq[i + j] - seq[i + j + 2];
    blocks.push_back(analyze_block(L, 2));
  }
  return blocks;
}

}  // namespace detail

/// Decide whether the functional mu of the sequence is S0-non-negative on
/// polynomials of degree <= N. Feasible when every block clears
/// -tol * max(1, ||block||); a minimum within +-tol of zero is reported as
/// marginal (boundary of the positive cone); below -tol is infeasible with
/// an eigenvector witness Q whose induced polynomial has mu < 0.
inline FeasibilityVerdict check_s0_nonneg(const MomentSequence& seq, const SupportSet& s0,
                                          double tol = kFeasibilityTol) {
  const int N = seq.max_order();
  if (N < 2) throw std::invalid_argument("check_s0_nonneg: needs moments at least to order 2");
  if (!(tol >= 0.0)) throw std::invalid_argument("check_s0_nonneg: negative tolerance");

  FeasibilityVerdict v;
  v.support = s0;
  v.conditioning_warning = N > kConditioningOrderLimit;
  v.blocks = detail::feasibility_blocks(seq, s0);

  int worst = 0;
  v.min_scaled_eigen = v.blocks[0].scaled_min();
  for (std::size_t i = 1; i < v.blocks.size(); ++i)
    if (v.blocks[i].scaled_min() < v.min_scaled_eigen) {
      v.min_scaled_eigen = v.blocks[i].scaled_min();
      worst = static_cast<int>(i);
    }

  if (v.min_scaled_eigen < -tol) {
    v.status = FeasibilityVerdict::Status::infeasible;
    const FeasibilityBlock& blk = v.blocks[worst];
    std::vector<double> q(blk.min_vector.data(), blk.min_vector.data() + blk.size);
    if (blk.shift_code == 1) {
      // block entries are moments of (u-c); the eigenvector coefficients
      // live in the shifted basis
      v.witness = Polynomial::in_shifted_basis(q, s0.a);
      v.witness_form = FeasibilityVerdict::WitnessForm::shifted_square;
    } else {
      v.witness = Polynomial(q);
      v.witness_form = blk.shift_code == 2 ? FeasibilityVerdict::WitnessForm::segment_square
                                           : FeasibilityVerdict::WitnessForm::square;
    }
    v.witness_mu = moment_functional(seq, induced_nonneg_polynomial(*v.witness, v.witness_form, s0));
  } else if (v.min_scaled_eigen <= tol) {
    v.status = FeasibilityVerdict::Status::marginal;
  } else {
    v.status = FeasibilityVerdict::Status::feasible;
  }
  return v;
}

// ---------------------------------------------------------------------------
// Randomized nonnegativity oracle

struct OracleOutcome {
  bool pass = true;
  int trials_run = 0;
  int violation_trial = -1;
  Polynomial violating;  // induced nonnegative-on-S0 polynomial
  double mu_value = 0.0;
};

/// Sample polynomials nonnegative on S0 by construction (Q^2, and the
/// localized forms (u-c) Q^2 or (u-a)(b-u) Q^2) with random coefficients and
/// check mu >= -tol on each. Independent of the eigenvalue path.
inline OracleOutcome brute_force_nonneg_oracle(const MomentSequence& seq, const SupportSet& s0,
                                               int max_degree, int trials, double tol,
                                               std::uint64_t seed = 0) {
  const int N = seq.max_order();
  if (max_degree > N) throw std::invalid_argument("brute_force_nonneg_oracle: degree exceeds moments");
  if (max_degree < 2) throw std::invalid_argument("brute_force_nonneg_oracle: max_degree too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);

  OracleOutcome out;
  const bool localized = s0.kind != SupportSet::Kind::whole_line;
  for (int t = 0; t < trials; ++t) {
    const bool use_localizer = localized && (t % 2 == 1);
    const int loc_deg = !use_localizer ? 0 : (s0.kind == SupportSet::Kind::half_line ? 1 : 2);
    const int qdeg_max = (max_degree - loc_deg) / 2;
    std::uniform_int_distribution<int> degree(0, qdeg_max);
    const int qdeg = degree(rng);
    std::vector<double> q(qdeg + 1);
    for (double& c : q) c = coef(rng);
    if (q.back() == 0.0) q.back() = 1.0;
    Polynomial Q{q};
    Polynomial P;
    if (!use_localizer)
      P = Q.squared();
    else if (s0.kind == SupportSet::Kind::half_line)
      P = Polynomial({-s0.a, 1.0}) * Q.squared();
    else
      P = Polynomial({-s0.a, 1.0}) * Polynomial({s0.b, -1.0}) * Q.squared();

    const double mu = moment_functional(seq, P);
    ++out.trials_run;
    if (mu < -tol) {
      out.pass = false;
      out.violation_trial = t;
      out.violating = P;
      out.mu_value = mu;
      return out;
    }
  }
  return out;
}

/// Replay a feasibility witness through the functional; the returned value
/// is mu of the induced nonnegative-on-S0 polynomial.
inline double replay_witness(const MomentSequence& seq, const FeasibilityVerdict& verdict) {
  if (!verdict.witness) throw std::invalid_argument("replay_witness: verdict carries no witness");
  return moment_functional(
      seq, induced_nonneg_polynomial(*verdict.witness, verdict.witness_form, verdict.support));
}

// ---------------------------------------------------------------------------
// Determinacy radius

inline constexpr double kDeterminacyThreshold = 1e-3;

/// Ratios r_n = |n!/m_n|^{1/n} and a windowed-minimum verdict for the
/// positive-radius criterion. The criterion is sufficient only: the verdict
/// never claims indeterminacy.
struct DeterminacyReport {
  enum class Verdict { criterion_satisfied, inconclusive };
  struct Entry {
    int n;
    double moment;
    double ratio;
  };
  std::vector<Entry> ratios;  // n with m_n != 0, ascending
  double window_min = 0.0;
  int window = 0;
  Verdict verdict = Verdict::inconclusive;
};

inline DeterminacyReport determinacy_radius(const MomentSequence& seq, int window = 5) {
  const int N = seq.max_order();
  if (N < 4) throw std::invalid_argument("determinacy_radius: needs moments at least to order 4");
  if (window < 1) throw std::invalid_argument("determinacy_radius: window must be positive");

  DeterminacyReport rep;
  rep.window = window;
  for (int n = 1; n <= N; ++n) {
    const double m = seq[n];
    if (m == 0.0) continue;  // zero moments are skipped, not infinite ratios
    const double log_ratio = (std::lgamma(n + 1.0) - std::log(std::fabs(m))) / n;
    rep.ratios.push_back({n, m, std::exp(log_ratio)});
  }
  if (rep.ratios.empty())
    throw std::invalid_argument("determinacy_radius: all moments beyond m0 vanish");

  const int take = std::min<int>(window, static_cast<int>(rep.ratios.size()));
  rep.window_min = detail::kInf;
  for (int i = static_cast<int>(rep.ratios.size()) - take; i < static_cast<int>(rep.ratios.size());
       ++i)
    rep.window_min = std::min(rep.window_min, rep.ratios[static_cast<std::size_t>(i)].ratio);
  rep.verdict = rep.window_min > kDeterminacyThreshold
                    ? DeterminacyReport::Verdict::criterion_satisfied
                    : DeterminacyReport::Verdict::inconclusive;
  return rep;
}

}  // namespace momentkit
