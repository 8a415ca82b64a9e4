#ifndef SKEWSTAB_STABILITY_HPP
#define SKEWSTAB_STABILITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "skewstab/equilibrium.hpp"
#include "skewstab/transfer.hpp"

namespace skewstab {

/// A parametrized family delta -> F_delta of skew systems with a declared
/// drift bound R(delta). systems(0) must be the unperturbed system.
struct PerturbationFamily {
  std::function<SkewSystem(double)> systems;
  std::function<double(double)> R_declared;
  std::string kind;  // fiber-translation | base-rotation | composite
  double delta_max = 0.1;
};

/// G_delta = G + delta over a fixed base; only the fiber drifts (R = delta).
inline PerturbationFamily fiber_translation_family(const SkewSystem& F0) {
  PerturbationFamily fam;
  fam.kind = "fiber-translation";
  fam.systems = [F0](double delta) {
    SkewSystem F = F0;
    auto G0 = F0.fiber.G;
    F.fiber.G = [G0, delta](std::size_t i, double x, double y) {
      return G0(i, x, y) + delta;
    };
    return F;
  };
  fam.R_declared = [](double delta) { return delta; };
  return fam;
}

/// f_delta = (k x + delta) mod 1; branches rotate, fiber fixed. The preimage
/// shift is delta / k, which dominates the drift (R = delta / k).
inline PerturbationFamily base_rotation_family(const SkewSystem& F0, std::size_t k) {
  PerturbationFamily fam;
  fam.kind = "base-rotation";
  fam.systems = [F0, k](double delta) {
    SkewSystem F = F0;
    F.base = linear_base(k, delta, F0.base.eps_rho);
    return F;
  };
  fam.R_declared = [k](double delta) { return delta / static_cast<double>(k); };
  return fam;
}

/// Both perturbations at once; R is the max of the parts.
inline PerturbationFamily composite_family(const SkewSystem& F0, std::size_t k) {
  PerturbationFamily fam;
  fam.kind = "composite";
  fam.systems = [F0, k](double delta) {
    SkewSystem F = F0;
    F.base = linear_base(k, delta, F0.base.eps_rho);
    auto G0 = F0.fiber.G;
    F.fiber.G = [G0, delta](std::size_t i, double x, double y) {
      return G0(i, x, y) + delta;
    };
    return F;
  };
  fam.R_declared = [k](double delta) {
    return std::max(delta, delta / static_cast<double>(k));
  };
  return fam;
}

struct RBreakdown {
  double jacobian = 0.0;   // sum_i |rho_delta(g_delta_i) - rho_0(g_0_i)|
  double preimage = 0.0;   // max_i d1(g_0_i, g_delta_i)
  double fiber = 0.0;      // sup |G_delta - G_0|
  double R_hat = 0.0;
  std::size_t n_samples = 0;
};

/// Sampled maxima of the three drift quantities; R_hat is their max.
inline RBreakdown compute_R(const PerturbationFamily& fam, double delta,
                            std::size_t n_samples, std::uint64_t seed) {
  SkewSystem F0 = fam.systems(0.0);
  SkewSystem Fd = fam.systems(delta);
  RBreakdown b;
  b.n_samples = n_samples;
  Rng rng(seed);
  const std::size_t deg = F0.base.deg;
  std::vector<double> g0(deg), gd(deg);
  for (std::size_t s = 0; s < n_samples; ++s) {
    double x = rng.uniform();
    for (std::size_t i = 0; i < deg; ++i) {
      g0[i] = F0.base.branch_inv(i, x);
      gd[i] = Fd.base.branch_inv(i, x);
    }
    // Branch indexation can relabel across the circle wrap when the
    // perturbed partition rotates, so the i-th preimages are matched by the
    // cyclic alignment of the two sorted preimage sets that minimizes the
    // drift, not by raw branch index.
    std::sort(g0.begin(), g0.end());
    std::sort(gd.begin(), gd.end());
    double pre = 1e300;
    std::size_t best_o = 0;
    for (std::size_t o = 0; o < deg; ++o) {
      double mx = 0.0;
      for (std::size_t i = 0; i < deg; ++i)
        mx = std::max(mx, circle_dist(g0[i], gd[(i + o) % deg]));
      if (mx < pre) {
        pre = mx;
        best_o = o;
      }
    }
    double jac = 0.0;
    for (std::size_t i = 0; i < deg; ++i)
      jac += std::fabs(Fd.base.rho(gd[(i + best_o) % deg]) - F0.base.rho(g0[i]));
    b.jacobian = std::max(b.jacobian, jac);
    b.preimage = std::max(b.preimage, pre);
    double y = rng.uniform();
    for (std::size_t i = 0; i < F0.base.deg; ++i) {
      // Compare branch maps at a common point of the unperturbed cell.
      const Interval& P = F0.base.partition[i];
      double xc = P.lo + (P.hi - P.lo) * x;
      b.fiber = std::max(b.fiber,
                         std::fabs(Fd.fiber.G(i, xc, y) - F0.fiber.G(i, xc, y)));
    }
  }
  b.R_hat = std::max({b.jacobian, b.preimage, b.fiber});
  return b;
}

/// Constants of the (R(delta), zeta)-family machinery. C1 is always
/// reassembled from its parts.
struct StabilityConstants {
  double C = 0.0;      // weak-norm gap constant, = C1
  double M = 0.0;      // uniform strong-norm bound of the fixed points
  double rho2 = 0.0;   // convergence-to-equilibrium rate, = beta1
  double C2 = 0.0;     // its prefactor, = D_conv
  double M2 = 1.0;     // weak-norm iterate bound (weak contraction)
  double K5 = 0.0;     // sup 1/(det Df_delta * det Df_0)
  double beta_u = 0.0; // sup_delta (alpha_delta L_delta)^zeta
  double D_u = 0.0;    // sup_delta D_reg,delta
  double B_u = 0.0;    // D_u / (1 - beta_u)
  double holder_G0 = 0.0;
  double C1 = 0.0;     // |G_0|_zeta + 1 + K5 + B_u

  void assemble() {
    B_u = beta_u < 1.0 ? D_u / (1.0 - beta_u) : 0.0;
    C1 = holder_G0 + 1.0 + K5 + B_u;
    C = C1;
  }
};

struct AdmissibilityCheck {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct AdmissibilityReport {
  std::vector<AdmissibilityCheck> checks;
  StabilityConstants constants;
  std::vector<double> probes;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

/// Verifies uniform spectral data (A1), uniform regularity constants (A2)
/// and the branch/Jacobian conditions (U1) over a finite probe set, and
/// assembles the family constants used by the certified bound.
inline AdmissibilityReport check_admissibility(const PerturbationFamily& fam,
                                               double zeta,
                                               const std::vector<double>& probes,
                                               std::size_t n_trials = 4,
                                               std::uint64_t seed = 11) {
  AdmissibilityReport rep;
  rep.probes = probes;
  SkewSystem F0 = fam.systems(0.0);

  double lam = 0.0, Dmax = 0.0;
  bool deg_ok = true;
  double K5 = 0.0, beta_u = 0.0, D_u = 0.0, alpha_u = 0.0;
  double r0 = 0.0, D0 = 0.0;
  for (double d : probes) {
    SkewSystem Fd = fam.systems(d);
    SpectralEstimate se = estimate_spectral_constants(Fd.base, zeta, n_trials, seed);
    lam = std::max(lam, se.beta2_hat);
    Dmax = std::max(Dmax, std::max(se.D_hat, se.C2_hat));
    if (d == 0.0) {
      r0 = se.r_hat;
      D0 = se.D_hat;
    }
    deg_ok = deg_ok && (Fd.base.deg == F0.base.deg);
    RegularityConstants rc = RegularityConstants::make(Fd);
    beta_u = std::max(beta_u, rc.beta);
    D_u = std::max(D_u, rc.D_reg);
    alpha_u = std::max(alpha_u, Fd.fiber.alpha);
    // K5 over sampled preimage pairs.
    Rng rng(seed ^ 0x51ab);
    for (std::size_t s = 0; s < 512; ++s) {
      double x = rng.uniform();
      for (std::size_t i = 0; i < F0.base.deg; ++i) {
        double g0 = F0.base.branch_inv(i, x);
        double gd = Fd.base.branch_inv(i, x);
        K5 = std::max(K5, Fd.base.rho(gd) * F0.base.rho(g0));
      }
    }
  }
  rep.checks.push_back({"A1: uniform spectral rate lambda < 1", lam, 1.0, lam < 1.0});
  rep.checks.push_back({"A1: uniform spectral constant D finite", Dmax, 1e6, Dmax < 1e6});
  rep.checks.push_back({"A2: sup_delta (alpha L)^zeta < 1", beta_u, 1.0, beta_u < 1.0});
  rep.checks.push_back({"A2: sup_delta D_reg finite", D_u, 1e6, D_u < 1e6});
  rep.checks.push_back(
      {"U1: constant branch count",
       deg_ok ? static_cast<double>(F0.base.deg) : -1.0,
       static_cast<double>(F0.base.deg), deg_ok});

  StabilityConstants k;
  k.M = Dmax + 1.0;
  k.K5 = K5;
  k.beta_u = beta_u;
  k.D_u = D_u;
  k.holder_G0 = F0.fiber.holder_G;
  ConvergenceConstants cc = ConvergenceConstants::make(
      std::max(r0, 1e-6), std::max(D0, 1.0), F0.fiber.alpha, zeta);
  k.rho2 = cc.beta1;
  k.C2 = cc.D_conv;
  k.M2 = 1.0;
  k.assemble();
  rep.constants = k;
  rep.checks.push_back({"family constants: rho2 in (0,1)", k.rho2, 1.0,
                        k.rho2 > 0.0 && k.rho2 < 1.0});
  return rep;
}

struct OperatorGap {
  double gap = 0.0;    // ||(F0* - Fdelta*) mu_delta||_inf
  double R_hat = 0.0;
  double bound = 0.0;  // C1 R_hat^zeta
  bool pass = false;
};

inline OperatorGap operator_gap(const PerturbationFamily& fam, double delta,
                                const LeafwiseMeasure& mu_delta,
                                const StabilityConstants& k,
                                std::size_t n_samples = 2048,
                                std::uint64_t seed = 13) {
  SkewSystem F0 = fam.systems(0.0);
  SkewSystem Fd = fam.systems(delta);
  OperatorGap og;
  og.gap = linf_distance(apply_transfer(F0, mu_delta), apply_transfer(Fd, mu_delta),
                         F0.lp_cap);
  og.R_hat = compute_R(fam, delta, n_samples, seed).R_hat;
  og.bound = k.C1 * std::pow(og.R_hat, F0.zeta);
  double tol = 2.0 * std::pow(F0.base_grid.h(), F0.zeta) +
               2.0 * std::pow(F0.fiber_grid.h(), F0.zeta);
  og.pass = og.gap <= og.bound + tol;
  return og;
}

struct CertifiedBound {
  long N = 0;
  double bound_N = 0.0;
  double bound_closed = 0.0;
};

/// The fixed-point stability bound at the proof's optimal splitting depth
/// N = floor(log delta / log rho2), plus its closed form.
inline CertifiedBound certified_stability_bound(const StabilityConstants& k, double zeta,
                                                double delta, double R_delta) {
  if (delta <= 0.0 || delta >= 1.0)
    throw std::domain_error("certified_stability_bound: delta outside (0,1)");
  CertifiedBound cb;
  cb.N = static_cast<long>(std::floor(std::log(delta) / std::log(k.rho2)));
  double Rz = std::pow(R_delta, zeta);
  cb.bound_N = Rz * k.C * k.M2 * static_cast<double>(cb.N) +
               2.0 * k.C2 * std::pow(k.rho2, static_cast<double>(cb.N)) * k.M;
  cb.bound_closed = Rz * std::fabs(std::log(delta)) *
                    (k.C * k.M2 / std::fabs(std::log(k.rho2)) +
                     2.0 * k.C2 * k.M / k.rho2);
  return cb;
}

struct SweepRow {
  double delta = 0.0;
  double R = 0.0;
  double measured_gap = 0.0;
  double certified_N = 0.0;
  double certified_closed = 0.0;
  double operator_gap = 0.0;
  double operator_bound = 0.0;
  double holder_delta = 0.0;
  bool converged = false;
  bool pass = false;  // measured <= certified_closed + grid tolerance
};

struct SweepResult {
  std::vector<SweepRow> rows;
  StabilityConstants constants;
  double fit_c = 0.0;      // measured ~= c R^zeta |log delta|
  double fit_slope = 0.0;  // log-log slope of measured vs delta
  double fit_residual = 0.0;
  std::size_t fit_rows = 0;
  double grid_tolerance = 0.0;
  bool all_pass() const {
    for (const auto& r : rows)
      if (!r.pass) return false;
    return true;
  }
};

struct SweepOptions {
  double tol = 1e-6;
  std::size_t max_iter = 200;
  std::uint64_t seed = 17;
  std::size_t pair_budget = 2048;
  std::size_t r_samples = 2048;
};

/// Full stability experiment: fixed point per delta, measured gap against
/// mu_0, certified bounds, operator gap and path regularity, plus a
/// log-space least-squares fit of the modulus measured ~ c R^zeta |log d|.
/// Rows whose measured gap sits below 10x the grid tolerance are noise and
/// are excluded from the fit.
inline SweepResult stability_sweep(const PerturbationFamily& fam,
                                   const std::vector<double>& delta_list,
                                   const StabilityConstants& k,
                                   const SweepOptions& opt = {}) {
  SweepResult res;
  res.constants = k;
  SkewSystem F0 = fam.systems(0.0);
  res.grid_tolerance = 2.0 * (std::pow(F0.base_grid.h(), F0.zeta) +
                              std::pow(F0.fiber_grid.h(), F0.zeta));
  AtomicMeasure seed_nu = AtomicMeasure::dirac(0.5, 1.0, F0.zeta);
  FixedPointResult fp0 = fixed_point(F0, seed_nu, opt.tol, opt.max_iter);

  for (double d : delta_list) {
    SkewSystem Fd = fam.systems(d);
    SweepRow row;
    row.delta = d;
    FixedPointResult fpd = fixed_point(Fd, seed_nu, opt.tol, opt.max_iter);
    row.converged = fp0.converged && fpd.converged;
    RBreakdown rb = compute_R(fam, d, opt.r_samples, opt.seed);
    row.R = rb.R_hat;
    row.measured_gap = linf_distance(fpd.measure, fp0.measure, F0.lp_cap);
    CertifiedBound cb = certified_stability_bound(k, F0.zeta, d, rb.R_hat);
    row.certified_N = cb.bound_N;
    row.certified_closed = cb.bound_closed;
    OperatorGap og = operator_gap(fam, d, fpd.measure, k, opt.r_samples, opt.seed);
    row.operator_gap = og.gap;
    row.operator_bound = og.bound;
    row.holder_delta =
        holder_constant(fpd.measure, opt.pair_budget, opt.seed, F0.lp_cap).value;
    row.pass = row.converged &&
               row.measured_gap <= row.certified_closed + res.grid_tolerance;
    res.rows.push_back(row);
  }

  // Fits on the informative rows only: above the discretization noise floor
  // when enough rows clear it, otherwise on every converged positive row
  // (families measured through barycenter-preserving quantization resolve
  // gaps far below the worst-case grid tolerance).
  auto fit_pass = [&](const SweepRow& r, double floor_) {
    return r.converged && r.measured_gap > floor_;
  };
  double floor_ = 10.0 * res.grid_tolerance;
  std::size_t nf = 0;
  for (const auto& r : res.rows)
    if (fit_pass(r, floor_)) ++nf;
  if (nf < 2) {
    floor_ = 0.0;
    nf = 0;
    for (const auto& r : res.rows)
      if (fit_pass(r, floor_)) ++nf;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0, sc = 0;
  for (const auto& r : res.rows) {
    if (!fit_pass(r, floor_)) continue;
    double lx = std::log(r.delta), ly = std::log(r.measured_gap);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    sc += ly - std::log(std::pow(r.R, F0.zeta) * std::fabs(std::log(r.delta)));
  }
  res.fit_rows = nf;
  if (nf >= 2) {
    double n = static_cast<double>(nf);
    res.fit_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    res.fit_c = std::exp(sc / n);
    double a = (sy - res.fit_slope * sx) / n;
    double rss = 0.0;
    for (const auto& r : res.rows) {
      if (!fit_pass(r, floor_)) continue;
      double e = std::log(r.measured_gap) - (a + res.fit_slope * std::log(r.delta));
      rss += e * e;
    }
    res.fit_residual = std::sqrt(rss / n);
  }
  return res;
}

struct UniformHolderReport {
  double beta_u = 0.0;
  double D_u = 0.0;
  double B_u = 0.0;
  std::vector<double> estimates;  // per-probe |mu_delta|_zeta
  bool hypothesis_ok = true;
  bool all_pass = true;
};

inline UniformHolderReport uniform_holder_bound(const PerturbationFamily& fam,
                                                const std::vector<double>& probes,
                                                const SweepOptions& opt = {}) {
  UniformHolderReport rep;
  SkewSystem F0 = fam.systems(0.0);
  double gtol = 2.0 * (std::pow(F0.base_grid.h(), F0.zeta) +
                       std::pow(F0.fiber_grid.h(), F0.zeta));
  for (double d : probes) {
    SkewSystem Fd = fam.systems(d);
    RegularityConstants rc = RegularityConstants::make(Fd);
    rep.beta_u = std::max(rep.beta_u, rc.beta);
    rep.D_u = std::max(rep.D_u, rc.D_reg);
  }
  rep.hypothesis_ok = rep.beta_u < 1.0;
  rep.B_u = rep.hypothesis_ok ? rep.D_u / (1.0 - rep.beta_u) : 0.0;
  AtomicMeasure seed_nu = AtomicMeasure::dirac(0.5, 1.0, F0.zeta);
  for (double d : probes) {
    SkewSystem Fd = fam.systems(d);
    FixedPointResult fp = fixed_point(Fd, seed_nu, opt.tol, opt.max_iter);
    double est = holder_constant(fp.measure, opt.pair_budget, opt.seed, F0.lp_cap).value;
    rep.estimates.push_back(est);
    if (!(est <= rep.B_u + gtol)) rep.all_pass = false;
  }
  return rep;
}

}  // namespace skewstab

#endif  // SKEWSTAB_STABILITY_HPP
