#ifndef SKEWSTAB_EQUILIBRIUM_HPP
#define SKEWSTAB_EQUILIBRIUM_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "skewstab/leafwise.hpp"
#include "skewstab/transfer.hpp"

namespace skewstab {

/// Constants of the exponential convergence-to-equilibrium statement:
/// for zero-average mu, ||F_*^n mu||_inf <= D_conv beta1^n ||mu||_{S^inf}.
struct ConvergenceConstants {
  double r = 0.0;      // measured base contraction of |P_f^n phi|_zeta
  double D = 0.0;
  double alpha = 0.0;
  double zeta = 1.0;
  double alpha_bar = 0.0;  // 1 / (1 - alpha^zeta)
  double beta1 = 0.0;      // max{ sqrt(r), sqrt(alpha^zeta) }
  double D_conv = 0.0;     // 1/sqrt(alpha^zeta) + alpha_bar * D / sqrt(r)

  static ConvergenceConstants make(double r, double D, double alpha, double zeta) {
    ConvergenceConstants c;
    c.r = r;
    c.D = D;
    c.alpha = alpha;
    c.zeta = zeta;
    double az = std::pow(alpha, zeta);
    c.alpha_bar = 1.0 / (1.0 - az);
    c.beta1 = std::max(std::sqrt(r), std::sqrt(az));
    c.D_conv = 1.0 / std::sqrt(az) + c.alpha_bar * D / std::sqrt(r);
    return c;
  }
};

/// Constants of the regularity statement: the invariant measure's path
/// Hoelder constant obeys |mu0|_zeta <= D_reg / (1 - beta).
struct RegularityConstants {
  double beta = 0.0;   // (alpha L)^zeta
  double D_reg = 0.0;  // eps_rho L^zeta + |G|_zeta L^zeta
  double bound = 0.0;  // D_reg / (1 - beta)
  bool hypothesis_ok = true;

  static RegularityConstants make(const SkewSystem& F) {
    RegularityConstants r;
    double Lz = std::pow(F.base.L_const, F.zeta);
    r.beta = F.beta_reg();
    r.D_reg = F.base.eps_rho * Lz + F.fiber.holder_G * Lz;
    r.hypothesis_ok = r.beta < 1.0;
    r.bound = r.hypothesis_ok ? r.D_reg / (1.0 - r.beta) : 0.0;
    return r;
  }
};

struct FixedPointResult {
  LeafwiseMeasure measure;
  std::vector<double> residuals;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Power iteration of F_* from the product seed m1 x nu until the step
/// distance falls below tol. Non-convergence is a reported state.
inline FixedPointResult fixed_point(const SkewSystem& F, const AtomicMeasure& seed_nu,
                                    double tol, std::size_t max_iter) {
  FixedPointResult res;
  res.measure = product_seed(DensityOnGrid::constant(F.base_grid, 1.0, F.zeta), seed_nu);
  for (std::size_t k = 0; k < max_iter; ++k) {
    LeafwiseMeasure next = apply_transfer(F, res.measure);
    double r = linf_distance(next, res.measure, F.lp_cap);
    res.residuals.push_back(r);
    res.measure = std::move(next);
    res.iterations = k + 1;
    if (r < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

struct RateRow {
  std::size_t n = 0;
  double measured = 0.0;   // ||F_*^n mu||_inf
  double bound = 0.0;      // D_conv beta1^n ||mu||_{S^inf} + n h_fib^zeta alpha_bar
  double margin = 0.0;     // bound - measured
};

struct RateReport {
  ConvergenceConstants constants;
  std::vector<RateRow> rows;       // worst margin per step over all pairs
  double empirical_rate = 0.0;     // geometric fit of the measured decay
  bool all_within_bound = true;
};

/// Runs zero-average inputs mu = m_nu - m_nu' through F_* and checks the
/// convergence-to-equilibrium inequality step by step. The reported rows
/// carry, per n, the worst (smallest) margin over the tested pairs.
inline RateReport measured_equilibrium_rate(const SkewSystem& F, std::size_t pairs,
                                            std::size_t n_steps, std::uint64_t seed,
                                            const ConvergenceConstants& cc) {
  RateReport rep;
  rep.constants = cc;
  rep.rows.assign(n_steps, RateRow{});
  for (std::size_t n = 0; n < n_steps; ++n) {
    rep.rows[n].n = n + 1;
    rep.rows[n].margin = 1e300;
  }
  const double hq = std::pow(F.fiber_grid.h(), F.zeta);
  Rng rng(seed);
  double lr_num = 0.0, lr_den = 0.0;  // log-space LS slope accumulator
  for (std::size_t p = 0; p < pairs; ++p) {
    AtomicMeasure nu1 = AtomicMeasure::dirac(rng.uniform(), 1.0, F.zeta);
    AtomicMeasure nu2 = AtomicMeasure::dirac(rng.uniform(), 1.0, F.zeta);
    DensityOnGrid one = DensityOnGrid::constant(F.base_grid, 1.0, F.zeta);
    LeafwiseMeasure mu =
        signed_combine(product_seed(one, nu1), product_seed(one, nu2), 1.0, -1.0);
    double s = sinf_norm(mu, F.lp_cap);
    LeafwiseMeasure cur = mu;
    double prev_log = 0.0;
    bool have_prev = false;
    for (std::size_t n = 1; n <= n_steps; ++n) {
      cur = apply_transfer(F, cur);
      double meas = linf_norm(cur, F.lp_cap);
      double bound = cc.D_conv * std::pow(cc.beta1, static_cast<double>(n)) * s +
                     static_cast<double>(n) * hq * cc.alpha_bar;
      auto& row = rep.rows[n - 1];
      row.measured = std::max(row.measured, meas);
      row.bound = std::max(row.bound, bound);
      double margin = bound - meas;
      if (margin < row.margin) row.margin = margin;
      if (margin < 0.0) rep.all_within_bound = false;
      if (meas > 10.0 * hq) {
        double lg = std::log(meas);
        if (have_prev) {
          lr_num += lg - prev_log;
          lr_den += 1.0;
        }
        prev_log = lg;
        have_prev = true;
      } else {
        have_prev = false;
      }
    }
  }
  rep.empirical_rate = lr_den > 0.0 ? std::exp(lr_num / lr_den) : 0.0;
  return rep;
}

struct RegularityCertificate {
  RegularityConstants constants;
  double estimate = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

inline RegularityCertificate regularity_certificate(const SkewSystem& F,
                                                    const FixedPointResult& fp,
                                                    std::size_t pair_budget = 4096,
                                                    std::uint64_t seed = 7) {
  RegularityCertificate cert;
  cert.constants = RegularityConstants::make(F);
  cert.estimate = holder_constant(fp.measure, pair_budget, seed, F.lp_cap).value;
  cert.tolerance = 2.0 * std::pow(F.base_grid.h(), F.zeta) +
                   2.0 * std::pow(F.fiber_grid.h(), F.zeta);
  cert.pass = cert.constants.hypothesis_ok &&
              cert.estimate <= cert.constants.bound + cert.tolerance;
  return cert;
}

}  // namespace skewstab

#endif  // SKEWSTAB_EQUILIBRIUM_HPP
