#ifndef SKEWSTAB_RUN_HPP
#define SKEWSTAB_RUN_HPP

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "skewstab/config.hpp"
#include "skewstab/csv.hpp"
#include "skewstab/equilibrium.hpp"
#include "skewstab/stability.hpp"
#include "skewstab/transfer.hpp"

namespace skewstab {

inline FiberMapSpec make_fiber(const RunConfig& cfg, std::size_t branches) {
  const std::string& off = cfg.fiber_offset;
  if (off.rfind("const:", 0) == 0) {
    double c = std::stod(off.substr(6));
    return affine_fiber_const(branches, cfg.alpha, c);
  }
  if (off == "linear-x") return affine_fiber_linear(branches, cfg.alpha, 0.5);
  if (off.rfind("linear-x:", 0) == 0) {
    double s = std::stod(off.substr(9));
    return affine_fiber_linear(branches, cfg.alpha, s);
  }
  throw ValidationError("unknown fiber offset in 'system.offset'");
}

inline SkewSystem make_system(const RunConfig& cfg) {
  SkewSystem F;
  F.base = linear_base(cfg.base_k, cfg.base_c, cfg.eps_rho);
  F.fiber = make_fiber(cfg, cfg.base_k);
  F.fiber.zeta = cfg.zeta;
  F.zeta = cfg.zeta;
  F.base_grid = BaseGrid{cfg.n_base};
  F.fiber_grid = FiberGrid{cfg.n_fiber};
  F.lp_cap = cfg.lp_cap;
  return F;
}

inline PerturbationFamily make_family(const RunConfig& cfg, const SkewSystem& F0) {
  PerturbationFamily fam;
  if (cfg.perturb_kind == "fiber-translation")
    fam = fiber_translation_family(F0);
  else if (cfg.perturb_kind == "base-rotation")
    fam = base_rotation_family(F0, cfg.base_k);
  else
    fam = composite_family(F0, cfg.base_k);
  fam.delta_max = cfg.delta_max;
  return fam;
}

namespace detail {

inline void echo_config(std::ofstream& rep, const RunConfig& cfg, const std::string& verb) {
  rep << "verb: " << verb << "\n"
      << "base: " << cfg.base_family << " k=" << cfg.base_k << " c=" << fmt(cfg.base_c)
      << " eps_rho=" << fmt(cfg.eps_rho) << "\n"
      << "fiber: " << cfg.fiber_family << " alpha=" << fmt(cfg.alpha)
      << " offset=" << cfg.fiber_offset << "\n"
      << "zeta=" << fmt(cfg.zeta) << " n_base=" << cfg.n_base
      << " n_fiber=" << cfg.n_fiber << " atom_cap=" << cfg.atom_cap
      << " lp_cap=" << cfg.lp_cap << "\n"
      << "tol=" << fmt(cfg.effective_tol()) << " max_iter=" << cfg.max_iter
      << " seed=" << cfg.seed << " pair_budget=" << cfg.pair_budget << "\n"
      << "perturbation: " << cfg.perturb_kind << " delta_max=" << fmt(cfg.delta_max)
      << "\n\n";
}

inline std::string outpath(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

inline int run_check(const RunConfig& cfg, std::ofstream& rep) {
  SkewSystem F0 = make_system(cfg);
  HypothesisReport hyp = check_base_hypotheses(F0.base, cfg.zeta);
  PerturbationFamily fam = make_family(cfg, F0);
  AdmissibilityReport adm = check_admissibility(fam, cfg.zeta, cfg.probes, 4, cfg.seed);

  CsvWriter csv(outpath(cfg, "check.csv"), {"check", "value", "threshold", "pass"});
  rep << "hypothesis checks\n";
  for (const auto& c : hyp.checks) {
    csv.row({c.name, fmt(c.value), fmt(c.threshold), c.pass ? "1" : "0"});
    rep << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name
        << "  value=" << fmt(c.value) << " threshold=" << fmt(c.threshold) << "\n";
  }
  rep << "  combined expansion inequality left side = " << fmt(hyp.expansion_lhs)
      << "\n\nadmissibility checks (probes";
  for (double p : cfg.probes) rep << ' ' << fmt(p);
  rep << ")\n";
  for (const auto& c : adm.checks) {
    csv.row({c.name, fmt(c.value), fmt(c.threshold), c.pass ? "1" : "0"});
    rep << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name
        << "  value=" << fmt(c.value) << " threshold=" << fmt(c.threshold) << "\n";
  }
  const auto& k = adm.constants;
  rep << "\nfamily constants: C1=" << fmt(k.C1) << " (|G0|_zeta=" << fmt(k.holder_G0)
      << " K5=" << fmt(k.K5) << " B_u=" << fmt(k.B_u) << "), M=" << fmt(k.M)
      << ", rho2=" << fmt(k.rho2) << ", C2=" << fmt(k.C2) << ", M2=" << fmt(k.M2)
      << "\n";
  return (hyp.all_pass() && adm.all_pass()) ? 0 : 1;
}

inline int run_fixpoint(const RunConfig& cfg, std::ofstream& rep) {
  SkewSystem F = make_system(cfg);
  AtomicMeasure nu = AtomicMeasure::dirac(0.5, 1.0, cfg.zeta);
  double tol = cfg.effective_tol();

  CsvWriter csv(outpath(cfg, "fixpoint.csv"),
                {"iteration", "residual", "holder_estimate", "mass"});
  LeafwiseMeasure cur =
      product_seed(DensityOnGrid::constant(F.base_grid, 1.0, cfg.zeta), nu);
  bool converged = false;
  std::size_t it = 0;
  double residual = 0.0;
  for (; it < cfg.max_iter; ++it) {
    LeafwiseMeasure next = apply_transfer(F, cur);
    residual = linf_distance(next, cur, F.lp_cap);
    cur = std::move(next);
    double hold = holder_constant(cur, F.base_grid.n, cfg.seed, F.lp_cap).value;
    csv.row({std::to_string(it + 1), fmt(residual), fmt(hold), fmt(cur.total_mass())});
    if (residual < tol) {
      converged = true;
      break;
    }
  }
  rep << "fixpoint: " << (converged ? "converged" : "NOT converged") << " after "
      << (converged ? it + 1 : it) << " iterations, final residual " << fmt(residual)
      << " (tol " << fmt(tol) << ")\n";
  double inv = linf_distance(apply_transfer(F, cur), cur, F.lp_cap);
  double inv_tol = tol + std::pow(F.fiber_grid.h(), cfg.zeta);
  bool inv_ok = inv <= inv_tol;
  rep << "invariance residual ||F_* mu - mu||_inf = " << fmt(inv) << " (allowed "
      << fmt(inv_tol) << ") " << (inv_ok ? "pass" : "FAIL") << "\n";
  return (converged && inv_ok) ? 0 : 1;
}

inline int run_rate(const RunConfig& cfg, std::ofstream& rep) {
  SkewSystem F = make_system(cfg);
  SpectralEstimate se = estimate_spectral_constants(F.base, cfg.zeta, 5, cfg.seed);
  ConvergenceConstants cc =
      ConvergenceConstants::make(se.r_hat, se.D_hat, cfg.alpha, cfg.zeta);
  RateReport rr = measured_equilibrium_rate(F, 5, 25, cfg.seed, cc);

  CsvWriter csv(outpath(cfg, "rate.csv"), {"n", "measured", "bound", "margin"});
  for (const auto& r : rr.rows)
    csv.row({std::to_string(r.n), fmt(r.measured), fmt(r.bound), fmt(r.margin)});
  rep << "convergence to equilibrium\n"
      << "  measured base constants: r=" << fmt(se.r_hat) << " D=" << fmt(se.D_hat)
      << "\n  beta1=" << fmt(cc.beta1) << " D_conv=" << fmt(cc.D_conv)
      << "\n  empirical rate=" << fmt(rr.empirical_rate)
      << (rr.empirical_rate <= cc.beta1 + 0.05 ? " (pass" : " (FAIL")
      << ", allowed beta1 + 0.05 = " << fmt(cc.beta1 + 0.05) << ")"
      << "\n  all steps within bound: " << (rr.all_within_bound ? "yes" : "NO") << "\n";
  return (rr.all_within_bound && rr.empirical_rate <= cc.beta1 + 0.05) ? 0 : 1;
}

inline int run_sweep(const RunConfig& cfg, std::ofstream& rep) {
  SkewSystem F0 = make_system(cfg);
  PerturbationFamily fam = make_family(cfg, F0);
  AdmissibilityReport adm = check_admissibility(fam, cfg.zeta, cfg.probes, 4, cfg.seed);
  SweepOptions opt;
  opt.tol = cfg.effective_tol();
  opt.max_iter = cfg.max_iter;
  opt.seed = cfg.seed;
  opt.pair_budget = cfg.pair_budget;
  SweepResult sw = stability_sweep(fam, cfg.deltas, adm.constants, opt);

  CsvWriter csv(outpath(cfg, "sweep.csv"),
                {"delta", "R", "measured_gap", "certified_N", "certified_closed",
                 "operator_gap", "operator_bound", "holder_delta", "converged"});
  for (const auto& r : sw.rows)
    csv.row({fmt(r.delta), fmt(r.R), fmt(r.measured_gap), fmt(r.certified_N),
             fmt(r.certified_closed), fmt(r.operator_gap), fmt(r.operator_bound),
             fmt(r.holder_delta), r.converged ? "1" : "0"});

  std::ofstream plot(outpath(cfg, "sweep_plot.dat"));
  plot << "# stability sweep, log-log data: delta measured_gap certified_closed\n";
  for (const auto& r : sw.rows)
    plot << fmt(r.delta) << ' ' << fmt(r.measured_gap) << ' '
         << fmt(r.certified_closed) << '\n';

  bool gap_ok = true;
  for (const auto& r : sw.rows) {
    double tol = 2.0 * (std::pow(F0.base_grid.h(), cfg.zeta) +
                        std::pow(F0.fiber_grid.h(), cfg.zeta));
    if (r.operator_gap > r.operator_bound + tol) gap_ok = false;
  }
  rep << "stability sweep (" << sw.rows.size() << " rows, kind=" << fam.kind << ")\n"
      << "  grid tolerance " << fmt(sw.grid_tolerance) << "\n"
      << "  rowwise measured <= certified: " << (sw.all_pass() ? "pass" : "FAIL")
      << "\n  rowwise operator gap <= C1 R^zeta: " << (gap_ok ? "pass" : "FAIL")
      << "\n  fit measured ~= c R^zeta |log delta|: c=" << fmt(sw.fit_c)
      << " over " << sw.fit_rows << " rows, residual " << fmt(sw.fit_residual)
      << "\n  log-log slope of measured vs delta: " << fmt(sw.fit_slope) << "\n";
  return (sw.all_pass() && gap_ok && adm.all_pass()) ? 0 : 1;
}

}  // namespace detail

/// Executes one verb. Returns the process exit code: 0 on success, 1 when
/// any asserted inequality fails beyond tolerance.
inline int run(const std::string& verb, const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream rep(detail::outpath(cfg, "report.txt"));
  if (!rep) throw std::runtime_error("cannot open report.txt in " + cfg.out_dir);
  detail::echo_config(rep, cfg, verb);
  int rc = 0;
  if (verb == "check") rc = detail::run_check(cfg, rep);
  else if (verb == "fixpoint") rc = detail::run_fixpoint(cfg, rep);
  else if (verb == "rate") rc = detail::run_rate(cfg, rep);
  else if (verb == "sweep") rc = detail::run_sweep(cfg, rep);
  else if (verb == "report") {
    rc = detail::run_check(cfg, rep);
    rep << '\n';
    rc = std::max(rc, detail::run_fixpoint(cfg, rep));
    rep << '\n';
    rc = std::max(rc, detail::run_rate(cfg, rep));
    rep << '\n';
    rc = std::max(rc, detail::run_sweep(cfg, rep));
  } else {
    throw ValidationError("unknown verb '" + verb + "'");
  }
  rep << "\nresult: " << (rc == 0 ? "ok" : "inequality failure") << "\n";
  return rc;
}

}  // namespace skewstab

#endif  // SKEWSTAB_RUN_HPP
