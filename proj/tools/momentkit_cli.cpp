// Batch front door: parse sequence/measure/family specs, dispatch to the
// analysis modules, and emit human-readable reports plus machine-readable
// CSV. Exit status: 0 for feasible/satisfied/pass outcomes, 1 for analytic
// negatives (infeasible, inequality violated, inconclusive), 2 for usage,
// parse, and numerical errors.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "momentkit/convergence.hpp"
#include "momentkit/extension.hpp"
#include "momentkit/measure.hpp"
#include "momentkit/moment_analysis.hpp"
#include "momentkit/parse.hpp"
#include "momentkit/reconstruction.hpp"

namespace mk = momentkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitNegative = 1;
constexpr int kExitError = 2;

void emit_csv(const std::string& csv, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << csv;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw mk::ParseError("cannot write output file: " + out_path);
  out << csv;
}

std::string status_name(mk::FeasibilityVerdict::Status s) {
  switch (s) {
    case mk::FeasibilityVerdict::Status::feasible: return "feasible";
    case mk::FeasibilityVerdict::Status::marginal: return "marginal";
    case mk::FeasibilityVerdict::Status::infeasible: return "infeasible";
  }
  return "?";
}

std::string poly_to_string(const mk::Polynomial& p) {
  std::ostringstream ss;
  ss << "[";
  for (int i = 0; i <= p.degree(); ++i) {
    if (i) ss << ", ";
    ss << mk::fmt(p.coeff(i));
  }
  ss << "]";
  return ss.str();
}

int run_check_feasible(const std::string& seq_path, const std::string& support, double tol,
                       const std::string& out_path) {
  const mk::MomentSequence seq = mk::parse_moment_sequence(seq_path);
  const mk::SupportSet s0 = mk::parse_support_spec(support);
  const mk::FeasibilityVerdict v = mk::check_s0_nonneg(seq, s0, tol);

  std::cout << "feasibility on " << s0.describe() << ": " << status_name(v.status) << "\n";
  std::cout << "min scaled eigenvalue: " << mk::fmt(v.min_scaled_eigen) << "\n";
  if (v.conditioning_warning)
    std::cout << "warning: order exceeds " << mk::kConditioningOrderLimit
              << "; Hankel conditioning degrades rapidly\n";
  if (v.witness) {
    std::cout << "witness Q (monomial coefficients): " << poly_to_string(*v.witness) << "\n";
    std::cout << "mu(induced nonnegative polynomial) = " << mk::fmt(v.witness_mu) << "\n";
  }

  mk::CsvWriter csv;
  csv.row({"shift", "size", "min_eigenvalue"});
  for (const auto& blk : v.blocks)
    csv.row({std::to_string(blk.shift_code), std::to_string(blk.size), mk::fmt(blk.min_eigen)});
  emit_csv(csv.str(), out_path);
  return v.infeasible() ? kExitNegative : kExitOk;
}

int run_extend(const std::string& seq_path, const std::string& support,
               const std::string& out_path) {
  const mk::MomentSequence seq = mk::parse_moment_sequence(seq_path);
  const mk::SupportSet s0 = mk::parse_support_spec(support);
  const mk::ExtensionInterval iv = mk::extension_interval(seq, s0);

  std::cout << "admissible next moment m_" << seq.max_order() + 1 << " on " << s0.describe()
            << ": [" << mk::fmt(iv.c1) << ", " << mk::fmt(iv.c2) << "]"
            << (iv.degenerate ? " (degenerate)" : "") << "\n";
  mk::CsvWriter csv;
  csv.row({"c1", "c2", "degenerate"});
  csv.row({mk::fmt(iv.c1), mk::fmt(iv.c2), iv.degenerate ? "1" : "0"});
  emit_csv(csv.str(), out_path);
  return kExitOk;
}

int run_determinacy(const std::string& seq_path, int window, const std::string& out_path) {
  const mk::MomentSequence seq = mk::parse_moment_sequence(seq_path);
  const mk::DeterminacyReport rep = mk::determinacy_radius(seq, window);
  const bool satisfied = rep.verdict == mk::DeterminacyReport::Verdict::criterion_satisfied;

  std::cout << "determinacy criterion (|n!/m_n|^{1/n} over the last " << rep.window
            << " reported orders): " << (satisfied ? "criterion_satisfied" : "inconclusive")
            << "\n";
  std::cout << "window minimum: " << mk::fmt(rep.window_min) << "\n";
  mk::CsvWriter csv;
  csv.row({"n", "moment", "ratio"});
  for (const auto& e : rep.ratios)
    csv.row({std::to_string(e.n), mk::fmt(e.moment), mk::fmt(e.ratio)});
  emit_csv(csv.str(), out_path);
  return satisfied ? kExitOk : kExitNegative;
}

int run_reconstruct(const std::string& seq_path, const std::string& support, double tol,
                    const std::string& out_path) {
  const mk::MomentSequence seq = mk::parse_moment_sequence(seq_path);
  const mk::SupportSet s0 = mk::parse_support_spec(support);
  const mk::ReconstructionResult res = mk::representing_measure(seq, s0, tol);

  std::cout << "representing measure: " << res.quadrature.size() << " atoms, max relative moment error "
            << mk::fmt(res.max_rel_error) << "\n";
  if (!res.clamped_nodes.empty()) {
    std::cout << "clamped nodes:";
    for (int i : res.clamped_nodes) std::cout << ' ' << i;
    std::cout << "\n";
  }
  if (res.conditioning_warning)
    std::cout << "warning: order exceeds " << mk::kConditioningOrderLimit
              << "; Hankel conditioning degrades rapidly\n";

  mk::CsvWriter csv;
  csv.row({"node", "weight"});
  for (int i = 0; i < res.quadrature.size(); ++i)
    csv.row({mk::fmt(res.quadrature.nodes[i]), mk::fmt(res.quadrature.weights[i])});
  csv.blank();
  csv.row({"order", "target", "achieved", "rel_error"});
  for (const auto& r : res.verification)
    csv.row({std::to_string(r.order), mk::fmt(r.target), mk::fmt(r.achieved), mk::fmt(r.rel_error)});
  emit_csv(csv.str(), out_path);
  return kExitOk;
}

int run_moments(const std::string& measure_path, int order, const std::string& out_path) {
  const mk::MeasureRep m = mk::parse_measure_spec(measure_path);
  const mk::MomentSequence seq = mk::moments_of(m, order);
  std::cout << "moments m_0..m_" << order << " of " << measure_path << "\n";
  mk::CsvWriter csv;
  csv.row({"order", "moment"});
  for (int n = 0; n <= order; ++n) csv.row({std::to_string(n), mk::fmt(seq[n])});
  emit_csv(csv.str(), out_path);
  return kExitOk;
}

int run_fvolume(const std::string& measure_path, const std::string& box_spec,
                const std::string& out_path) {
  const mk::MeasureRep m = mk::parse_measure_spec(measure_path);
  const mk::Box box = mk::parse_box_spec(box_spec);
  const mk::DistributionFunction F = mk::df_from_measure(m);
  const double v = mk::f_volume(F, box);
  std::cout << "F-volume of the box: " << mk::fmt(v) << "\n";
  mk::CsvWriter csv;
  csv.row({"volume"});
  csv.row({mk::fmt(v)});
  emit_csv(csv.str(), out_path);
  return kExitOk;
}

int run_taylor_check(const std::string& measure_path, std::optional<double> t,
                     std::optional<double> h, int order, int trials, std::uint64_t seed,
                     const std::string& out_path) {
  mk::MeasureRep m = mk::parse_measure_spec(measure_path);
  if (!mk::is_purely_atomic(m)) m = mk::discretize(m, 256);

  mk::CsvWriter csv;
  if (t && h) {
    const mk::TaylorCheck chk = mk::taylor_remainder_check(m, *t, *h, order);
    std::cout << "Taylor remainder at t=" << mk::fmt(*t) << " h=" << mk::fmt(*h) << " n=" << order
              << ": " << (chk.holds ? "holds" : "VIOLATED") << " (remainder "
              << mk::fmt(chk.remainder) << ", bound " << mk::fmt(chk.bound) << ")\n";
    csv.row({"t", "h", "n", "remainder", "bound", "slack", "holds"});
    csv.row({mk::fmt(*t), mk::fmt(*h), std::to_string(order), mk::fmt(chk.remainder),
             mk::fmt(chk.bound), mk::fmt(chk.slack), chk.holds ? "1" : "0"});
    emit_csv(csv.str(), out_path);
    return chk.holds ? kExitOk : kExitNegative;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> t_dist(-5.0, 5.0), h_dist(-2.0, 2.0);
  std::uniform_int_distribution<int> n_dist(0, order);
  int violations = 0;
  double worst_slack = mk::detail::kInf;
  for (int i = 0; i < trials; ++i) {
    const mk::TaylorCheck chk = mk::taylor_remainder_check(m, t_dist(rng), h_dist(rng), n_dist(rng));
    worst_slack = std::min(worst_slack, chk.slack);
    if (!chk.holds) ++violations;
  }
  std::cout << "Taylor remainder bound over " << trials << " samples: " << violations
            << " violations, worst slack " << mk::fmt(worst_slack) << "\n";
  csv.row({"trials", "violations", "worst_slack"});
  csv.row({std::to_string(trials), std::to_string(violations), mk::fmt(worst_slack)});
  emit_csv(csv.str(), out_path);
  return violations == 0 ? kExitOk : kExitNegative;
}

int run_converge(const std::string& family_path, const std::string& grid_spec,
                 const std::vector<int>& ks, int orders, const std::string& out_path) {
  const mk::MeasureFamily fam = mk::parse_family_spec(family_path);
  const std::vector<double> grid = mk::parse_grid_spec(grid_spec);
  const mk::ConvergenceReport rep = mk::weak_convergence_check(fam, grid, ks, orders);

  std::cout << "weak convergence check over " << ks.size() << " family indices, grid of "
            << grid.size() << " continuity points\n";
  if (rep.limit_determinacy_available) {
    const bool sat = rep.limit_determinacy.verdict ==
                     mk::DeterminacyReport::Verdict::criterion_satisfied;
    std::cout << "limit determinacy criterion: " << (sat ? "criterion_satisfied" : "inconclusive")
              << "\n";
  } else {
    std::cout << "limit determinacy criterion: unavailable (degenerate limit)\n";
  }
  for (std::size_t i = 0; i < rep.ks.size(); ++i)
    std::cout << "k=" << rep.ks[i] << ": sup |F_k - F| = " << mk::fmt(rep.sup_cdf_distance[i])
              << "\n";

  mk::CsvWriter csv;
  std::vector<std::string> head{"k"};
  for (int n = 1; n <= orders; ++n) head.push_back("gap_order_" + std::to_string(n));
  head.push_back("sup_cdf_distance");
  csv.row(head);
  for (std::size_t i = 0; i < rep.ks.size(); ++i) {
    std::vector<std::string> row{std::to_string(rep.ks[i])};
    for (double g : rep.gaps.gaps[i]) row.push_back(mk::fmt(g));
    row.push_back(mk::fmt(rep.sup_cdf_distance[i]));
    csv.row(row);
  }
  emit_csv(csv.str(), out_path);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moment-problem toolkit: feasibility, extension, determinacy, reconstruction, "
               "and moment-based convergence"};
  app.require_subcommand(1);

  std::string seq_path, measure_path, family_path, support, out_path, grid_spec, box_spec;
  double tol_feas = mk::kFeasibilityTol, tol_rec = 1e-9;
  int order = 8, window = 5, orders = 6, trials = 1000;
  std::uint64_t seed = 0;
  std::vector<int> ks;
  double t_val = 0.0, h_val = 0.0;

  auto* check = app.add_subcommand("check-feasible", "decide feasibility of a sequence on S0");
  check->add_option("--seq", seq_path, "moment sequence file")->required();
  check->add_option("--support", support, "line | halfline:c | segment:a,b")->required();
  check->add_option("--tol", tol_feas, "positivity tolerance");
  check->add_option("--out", out_path, "CSV output path");

  auto* extend = app.add_subcommand("extend", "admissible interval for the next moment");
  extend->add_option("--seq", seq_path)->required();
  extend->add_option("--support", support)->required();
  extend->add_option("--out", out_path);

  auto* determinacy = app.add_subcommand("determinacy", "radius criterion |n!/m_n|^{1/n}");
  determinacy->add_option("--seq", seq_path)->required();
  determinacy->add_option("--window", window, "tail window for the minimum");
  determinacy->add_option("--out", out_path);

  auto* reconstruct = app.add_subcommand("reconstruct", "atomic representing measure");
  reconstruct->add_option("--seq", seq_path)->required();
  reconstruct->add_option("--support", support)->required();
  reconstruct->add_option("--tol", tol_rec, "moment-matching tolerance");
  reconstruct->add_option("--out", out_path);

  auto* moments = app.add_subcommand("moments", "moments of a measure spec");
  moments->add_option("--measure", measure_path)->required();
  moments->add_option("--order", order, "highest order")->required();
  moments->add_option("--out", out_path);

  auto* fvolume = app.add_subcommand("fvolume", "F-volume of a box under a measure's df");
  fvolume->add_option("--measure", measure_path)->required();
  fvolume->add_option("--box", box_spec, "a1,a2,..:b1,b2,..")->required();
  fvolume->add_option("--out", out_path);

  auto* taylor = app.add_subcommand("taylor-check", "characteristic-function Taylor bound");
  taylor->add_option("--measure", measure_path)->required();
  auto* t_opt = taylor->add_option("--t", t_val, "expansion point");
  auto* h_opt = taylor->add_option("--h", h_val, "step");
  taylor->add_option("--order", order, "expansion order (or max order when sampling)");
  taylor->add_option("--trials", trials, "sample count when --t/--h are omitted");
  taylor->add_option("--seed", seed, "RNG seed");
  taylor->add_option("--out", out_path);

  auto* converge = app.add_subcommand("converge", "moment gaps and CDF distance for a family");
  converge->add_option("--family", family_path, "family spec file")->required();
  converge->add_option("--grid", grid_spec, "lo:hi:step or x1,x2,...")->required();
  converge->add_option("--ks", ks, "family indices")->required()->delimiter(',');
  converge->add_option("--orders", orders, "moment orders to compare");
  converge->add_option("--out", out_path);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return run_check_feasible(seq_path, support, tol_feas, out_path);
    if (extend->parsed()) return run_extend(seq_path, support, out_path);
    if (determinacy->parsed()) return run_determinacy(seq_path, window, out_path);
    if (reconstruct->parsed()) return run_reconstruct(seq_path, support, tol_rec, out_path);
    if (moments->parsed()) return run_moments(measure_path, order, out_path);
    if (fvolume->parsed()) return run_fvolume(measure_path, box_spec, out_path);
    if (taylor->parsed()) {
      std::optional<double> t, h;
      if (*t_opt) t = t_val;
      if (*h_opt) h = h_val;
      if (t.has_value() != h.has_value())
        throw mk::ParseError("taylor-check: --t and --h must be given together");
      return run_taylor_check(measure_path, t, h, order, trials, seed, out_path);
    }
    if (converge->parsed()) return run_converge(family_path, grid_spec, ks, orders, out_path);
  } catch (const mk::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::domain_error& e) {
    std::cerr << "analytic negative: " << e.what() << "\n";
    return kExitNegative;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
