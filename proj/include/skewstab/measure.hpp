#ifndef SKEWSTAB_MEASURE_HPP
#define SKEWSTAB_MEASURE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "skewstab/common.hpp"
#include "skewstab/grid.hpp"
#include "skewstab/wk_lp.hpp"

namespace skewstab {

struct Atom {
  double pos = 0.0;
  double w = 0.0;
};

/// Finitely supported signed measure on the fiber K = [0,1].
struct AtomicMeasure {
  std::vector<Atom> atoms;
  double zeta = 1.0;

  static AtomicMeasure zero(double zeta_ = 1.0) { return AtomicMeasure{{}, zeta_}; }

  static AtomicMeasure dirac(double p, double w = 1.0, double zeta_ = 1.0) {
    return AtomicMeasure{{Atom{p, w}}, zeta_};
  }

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.w;
    return s;
  }

  double tv_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += std::fabs(a.w);
    return s;
  }

  // Sort by position and merge atoms at identical positions. Exact-zero
  // weights produced by cancellation are dropped.
  void compact() {
    std::sort(atoms.begin(), atoms.end(),
              [](const Atom& a, const Atom& b) { return a.pos < b.pos; });
    std::vector<Atom> out;
    out.reserve(atoms.size());
    for (const auto& a : atoms) {
      if (!out.empty() && out.back().pos == a.pos)
        out.back().w += a.w;
      else
        out.push_back(a);
    }
    std::erase_if(out, [](const Atom& a) { return a.w == 0.0; });
    atoms.swap(out);
  }

  AtomicMeasure scaled(double c) const {
    AtomicMeasure r = *this;
    for (auto& a : r.atoms) a.w *= c;
    return r;
  }
};

inline AtomicMeasure signed_difference(const AtomicMeasure& mu, const AtomicMeasure& nu) {
  AtomicMeasure d;
  d.zeta = mu.zeta;
  d.atoms.reserve(mu.atoms.size() + nu.atoms.size());
  d.atoms = mu.atoms;
  for (const auto& a : nu.atoms) d.atoms.push_back(Atom{a.pos, -a.w});
  d.compact();
  return d;
}

/// W_1^zeta(mu, nu): exact optimum of the dual-ball linear program over
/// test functions with |g|_inf <= 1 and H_zeta(g) <= 1, evaluated on the
/// combined support. zeta = 1 uses the consecutive-pair chain reduction;
/// zeta < 1 needs the full pairwise constraint set (d^zeta is not additive
/// along the line) and goes through the transportation-form solver.
inline double wk_distance(const AtomicMeasure& mu, const AtomicMeasure& nu, double zeta,
                          std::size_t lp_cap = 2048) {
  AtomicMeasure d = signed_difference(mu, nu);
  if (d.atoms.empty()) return 0.0;
  if (d.atoms.size() > lp_cap)
    throw std::length_error("wk_distance: combined support exceeds the LP cap");
  std::vector<double> pts(d.atoms.size()), cs(d.atoms.size());
  for (std::size_t i = 0; i < d.atoms.size(); ++i) {
    pts[i] = d.atoms[i].pos;
    cs[i] = d.atoms[i].w;
  }
  if (zeta == 1.0) return solve_chain(pts, cs);
  return solve_transport(pts, cs, zeta);
}

inline double wk_norm(const AtomicMeasure& mu, double zeta, std::size_t lp_cap = 2048) {
  return wk_distance(mu, AtomicMeasure::zero(mu.zeta), zeta, lp_cap);
}

/// Pushforward under a fiber map K -> K; mass carried atom by atom.
inline AtomicMeasure push_fiber(const std::function<double(double)>& F,
                                const AtomicMeasure& mu) {
  AtomicMeasure out;
  out.zeta = mu.zeta;
  out.atoms.reserve(mu.atoms.size());
  for (const auto& a : mu.atoms) {
    double p = F(a.pos);
    if (p < -1e-9 || p > 1.0 + 1e-9)
      throw RangeFault("push_fiber: image left K = [0,1]");
    out.atoms.push_back(Atom{std::min(std::max(p, 0.0), 1.0), a.w});
  }
  return out;
}

/// Mass-preserving linear splitting onto grid nodes. Each atom's weight is
/// shared between the two nearest nodes proportionally to distance, which
/// keeps the barycenter and costs at most h^zeta per unit of TV mass in W.
inline AtomicMeasure quantize(const AtomicMeasure& mu, const FiberGrid& grid) {
  std::vector<double> w(grid.n_fiber, 0.0);
  const double h = grid.h();
  for (const auto& a : mu.atoms) {
    double t = a.pos / h;
    auto k = static_cast<std::size_t>(t);
    if (k >= grid.n_fiber - 1) k = grid.n_fiber - 2;
    double frac = t - static_cast<double>(k);
    w[k] += a.w * (1.0 - frac);
    w[k + 1] += a.w * frac;
  }
  AtomicMeasure out;
  out.zeta = mu.zeta;
  for (std::size_t k = 0; k < grid.n_fiber; ++k)
    if (w[k] != 0.0) out.atoms.push_back(Atom{grid.node(k), w[k]});
  return out;
}

}  // namespace skewstab

#endif  // SKEWSTAB_MEASURE_HPP
