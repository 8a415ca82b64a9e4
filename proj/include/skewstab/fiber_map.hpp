#ifndef SKEWSTAB_FIBER_MAP_HPP
#define SKEWSTAB_FIBER_MAP_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "skewstab/base_map.hpp"
#include "skewstab/common.hpp"

namespace skewstab {

/// Fiber dynamics G : M x K -> K, K = [0,1], branch-wise in the base
/// partition. Contracts every vertical fiber at declared rate alpha and is
/// zeta-Hoelder in the base coordinate inside each partition cell (jumps
/// across cell boundaries are allowed).
struct FiberMapSpec {
  std::size_t branches = 0;
  std::function<double(std::size_t, double, double)> G;  // G_i(x, y)
  double alpha = 0.5;          // declared fiber contraction rate, in (0,1)
  double zeta = 1.0;
  double holder_G = 0.0;       // declared |G|_zeta = max_i |G_i|_zeta
  std::string family_name;
};

/// Affine family G(x,y) = alpha*y + offset(x). offset either constant or
/// linear in x; the linear variant couples fiber to base (the graph system).
inline FiberMapSpec affine_fiber_const(std::size_t branches, double alpha, double c) {
  FiberMapSpec g;
  g.branches = branches;
  g.alpha = alpha;
  g.G = [alpha, c](std::size_t, double, double y) { return alpha * y + c; };
  g.holder_G = 0.0;
  g.family_name = "affine-const";
  return g;
}

inline FiberMapSpec affine_fiber_linear(std::size_t branches, double alpha, double slope,
                                        double c = 0.0) {
  FiberMapSpec g;
  g.branches = branches;
  g.alpha = alpha;
  g.G = [alpha, slope, c](std::size_t, double x, double y) {
    return alpha * y + slope * x + c;
  };
  g.holder_G = std::fabs(slope);  // exact for zeta = 1
  g.family_name = "affine-linear";
  return g;
}

inline double eval_fiber(const FiberMapSpec& g, const BaseMapSpec& f, double x, double y) {
  if (x < 0.0 || x >= 1.0) throw std::domain_error("eval_fiber: x outside [0,1)");
  if (y < -1e-12 || y > 1.0 + 1e-12) throw std::domain_error("eval_fiber: y outside K");
  std::size_t i = 0;
  for (; i < f.deg; ++i)
    if (f.partition[i].contains(x)) break;
  if (i == f.deg) i = f.deg - 1;
  double v = g.G(i, x, y);
  if (v < -1e-9 || v > 1.0 + 1e-9)
    throw RangeFault("fiber map left K = [0,1]");
  return std::min(std::max(v, 0.0), 1.0);
}

/// Sampled contraction rate: sup over (x, z1 != z2) of
/// d(G(x,z1), G(x,z2)) / d(z1,z2). Monotone in n_samples for a fixed seed.
inline double estimate_alpha(const FiberMapSpec& g, const BaseMapSpec& f,
                             std::size_t n_samples, std::uint64_t seed) {
  Rng rng(seed);
  double a = 0.0;
  for (std::size_t s = 0; s < n_samples; ++s) {
    double x = rng.uniform();
    double z1 = rng.uniform();
    double z2 = rng.uniform();
    if (z1 == z2) continue;
    std::size_t i = f.partition.empty() ? 0 : f.deg - 1;
    for (std::size_t k = 0; k < f.deg; ++k)
      if (f.partition[k].contains(x)) { i = k; break; }
    double r = std::fabs(g.G(i, x, z1) - g.G(i, x, z2)) / std::fabs(z1 - z2);
    a = std::max(a, r);
  }
  return a;
}

struct FiberHolderEstimate {
  std::vector<double> per_branch;
  double overall = 0.0;
  std::size_t n_samples = 0;
};

/// Branch-local Hoelder constants of G in the base coordinate: pairs are
/// drawn inside a single partition cell so jumps at cell boundaries never
/// inflate the estimate.
inline FiberHolderEstimate estimate_fiber_holder(const FiberMapSpec& g,
                                                 const BaseMapSpec& f, double zeta,
                                                 std::size_t n_samples,
                                                 std::uint64_t seed) {
  FiberHolderEstimate est;
  est.n_samples = n_samples;
  est.per_branch.assign(f.deg, 0.0);
  for (std::size_t i = 0; i < f.deg; ++i) {
    // One stream per branch so a larger n_samples extends every branch's
    // sample set instead of shifting it.
    Rng rng(seed + 0x9e3779b97f4a7c15ull * (i + 1));
    const Interval& P = f.partition[i];
    double m = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
      double x1 = rng.uniform(P.lo, P.hi);
      double x2 = rng.uniform(P.lo, P.hi);
      double y = rng.uniform();
      double d = std::fabs(x1 - x2);
      if (d < 1e-12) continue;
      m = std::max(m, std::fabs(g.G(i, x1, y) - g.G(i, x2, y)) / std::pow(d, zeta));
    }
    est.per_branch[i] = m;
    est.overall = std::max(est.overall, m);
  }
  return est;
}

}  // namespace skewstab

#endif  // SKEWSTAB_FIBER_MAP_HPP
