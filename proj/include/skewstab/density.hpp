#ifndef SKEWSTAB_DENSITY_HPP
#define SKEWSTAB_DENSITY_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "skewstab/common.hpp"
#include "skewstab/grid.hpp"

namespace skewstab {

/// A real function on the circle stored at cell centers of a BaseGrid.
/// Off-grid evaluation uses periodic piecewise-linear interpolation, which
/// keeps both the sup norm and the Hoelder seminorm of the node values.
struct DensityOnGrid {
  BaseGrid grid;
  std::vector<double> values;
  double zeta = 1.0;

  static DensityOnGrid constant(const BaseGrid& g, double c, double zeta_ = 1.0) {
    return DensityOnGrid{g, std::vector<double>(g.n, c), zeta_};
  }

  // Cell-average integral against Lebesgue.
  double integral() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * grid.h();
  }

  double sup_norm() const {
    double s = 0.0;
    for (double v : values) s = std::max(s, std::fabs(v));
    return s;
  }

  // Piecewise-linear periodic interpolation between cell centers.
  double eval(double x) const {
    const std::size_t n = grid.n;
    const double h = grid.h();
    double t = wrap01(x) / h - 0.5;  // position in units of cells from center 0
    double f = std::floor(t);
    double w = t - f;
    auto i0 = static_cast<std::size_t>(((static_cast<long long>(f) % static_cast<long long>(n)) + static_cast<long long>(n)) % static_cast<long long>(n));
    std::size_t i1 = (i0 + 1) % n;
    return (1.0 - w) * values[i0] + w * values[i1];
  }

  /// Hoelder seminorm over cell-center pairs with circle separation >= h.
  /// For zeta == 1 the max is attained on adjacent centers (the circle
  /// distance is additive along the grid), so an O(n) scan suffices.
  double holder_seminorm() const {
    const std::size_t n = grid.n;
    if (n < 2) return 0.0;
    const double h = grid.h();
    if (zeta == 1.0) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = (i + 1) % n;
        m = std::max(m, std::fabs(values[j] - values[i]) / h);
      }
      return m;
    }
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double d = circle_dist(grid.center(i), grid.center(j));
        if (d < h * (1.0 - 1e-12)) continue;
        m = std::max(m, std::fabs(values[j] - values[i]) / std::pow(d, zeta));
      }
    }
    return m;
  }

  // |phi|_zeta = H_zeta(phi) + |phi|_inf, the strong-norm convention.
  double holder_norm() const { return holder_seminorm() + sup_norm(); }
};

inline DensityOnGrid operator+(const DensityOnGrid& a, const DensityOnGrid& b) {
  if (a.grid != b.grid) throw GridMismatch("density grid mismatch");
  DensityOnGrid r = a;
  for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] += b.values[i];
  return r;
}

inline DensityOnGrid scaled(const DensityOnGrid& a, double c) {
  DensityOnGrid r = a;
  for (double& v : r.values) v *= c;
  return r;
}

}  // namespace skewstab

#endif  // SKEWSTAB_DENSITY_HPP
