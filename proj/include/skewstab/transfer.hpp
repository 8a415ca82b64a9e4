#ifndef SKEWSTAB_TRANSFER_HPP
#define SKEWSTAB_TRANSFER_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "skewstab/base_map.hpp"
#include "skewstab/common.hpp"
#include "skewstab/fiber_map.hpp"
#include "skewstab/grid.hpp"
#include "skewstab/leafwise.hpp"

namespace skewstab {

struct SkewSystem {
  BaseMapSpec base;
  FiberMapSpec fiber;
  double zeta = 1.0;
  BaseGrid base_grid{1024};
  FiberGrid fiber_grid{257};
  std::size_t lp_cap = 2048;

  // (alpha L)^zeta, the contraction rate of the Hoelder path recursion.
  double beta_reg() const {
    return std::pow(fiber.alpha * base.L_const, zeta);
  }
  bool regularity_hypothesis_ok() const { return beta_reg() < 1.0; }
};

/// Pushforward F_* on a leafwise measure. Each output leaf c_j collects the
/// deg preimages gamma_i of c_j: the input fiber measure at gamma_i is read
/// by piecewise-linear interpolation of the stored path (a convex combination
/// of the two neighbouring leaves), pushed through the fiber map at gamma_i,
/// and weighted by rho(gamma_i). The path interpolation is clamped at the
/// endpoint cut 0 = 1 rather than wrapped: the fiber map may jump across
/// branch boundaries, including the cut, so the path of fiber measures is
/// only regular on the interval and blending fibers across the cut would
/// smear that jump into the two boundary leaves. The clamp swaps cut-zone
/// interpolation weights symmetrically between the end leaves, so total mass
/// is still conserved exactly. The output marginal is taken from the actual
/// leaf masses, which keeps the mass/marginal invariant exact; it agrees
/// with the periodic density transfer P_f(phi_x) except at the two leaves
/// adjacent to the cut, where the two reads differ by O(h |phi'|). Atoms are
/// re-quantized once per application to cap their count.
inline LeafwiseMeasure apply_transfer(const SkewSystem& F, const LeafwiseMeasure& A) {
  if (A.grid != F.base_grid) throw GridMismatch("apply_transfer: leaf grid mismatch");
  const std::size_t n = A.grid.n;
  const double h = A.grid.h();
  LeafwiseMeasure out;
  out.grid = A.grid;
  out.zeta = A.zeta;
  out.marginal = DensityOnGrid::constant(A.grid, 0.0, A.zeta);
  out.fibers.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = A.grid.center(j);
    AtomicMeasure acc = AtomicMeasure::zero(A.zeta);
    for (std::size_t i = 0; i < F.base.deg; ++i) {
      const double g = F.base.branch_inv(i, x);
      const double w = F.base.rho(g);
      // Clamped interpolation weights of gamma over the two nearest centers.
      double t = wrap01(g) / h - 0.5;
      std::size_t lo;
      double frac;
      if (t <= 0.0) {
        lo = 0;
        frac = 0.0;
      } else if (t >= static_cast<double>(n - 1)) {
        lo = n - 1;
        frac = 0.0;
      } else {
        lo = static_cast<std::size_t>(t);
        frac = t - static_cast<double>(lo);
      }
      std::size_t hi = (lo + 1 < n) ? lo + 1 : lo;
      auto push_leaf = [&](std::size_t src, double leaf_w) {
        if (leaf_w == 0.0) return;
        for (const auto& a : A.fibers[src].atoms) {
          double p = F.fiber.G(i, g, a.pos);
          if (p < -1e-9 || p > 1.0 + 1e-9)
            throw RangeFault("apply_transfer: fiber image left K");
          acc.atoms.push_back(Atom{std::min(std::max(p, 0.0), 1.0), a.w * leaf_w * w});
        }
      };
      push_leaf(lo, 1.0 - frac);
      push_leaf(hi, frac);
    }
    out.fibers.push_back(quantize(acc, F.fiber_grid));
    out.marginal.values[j] = out.fibers[j].total_mass();
  }
  return out;
}

struct TransferStep {
  std::size_t n = 0;
  double step_distance = 0.0;   // ||F_*^k A - F_*^{k-1} A||_inf
  double holder_estimate = 0.0;
  double mass = 0.0;
  double quantization_budget = 0.0;  // cumulative k * h_fib^zeta / (1 - alpha^zeta)
};

struct TransferTrace {
  LeafwiseMeasure final;
  std::vector<TransferStep> steps;
};

inline TransferTrace iterate_transfer(const SkewSystem& F, const LeafwiseMeasure& A,
                                      std::size_t n, std::size_t holder_budget = 0,
                                      std::uint64_t seed = 1) {
  TransferTrace tr;
  tr.final = A;
  const double hq = std::pow(F.fiber_grid.h(), F.zeta);
  const double damp = 1.0 - std::pow(F.fiber.alpha, F.zeta);
  for (std::size_t k = 1; k <= n; ++k) {
    LeafwiseMeasure next = apply_transfer(F, tr.final);
    TransferStep st;
    st.n = k;
    st.step_distance = linf_distance(next, tr.final, F.lp_cap);
    if (holder_budget > 0)
      st.holder_estimate = holder_constant(next, holder_budget, seed, F.lp_cap).value;
    st.mass = next.total_mass();
    st.quantization_budget = static_cast<double>(k) * hq / damp;
    tr.steps.push_back(st);
    tr.final = std::move(next);
  }
  return tr;
}

}  // namespace skewstab

#endif  // SKEWSTAB_TRANSFER_HPP
