#ifndef SKEWSTAB_GRID_HPP
#define SKEWSTAB_GRID_HPP

#include <cstddef>
#include <vector>

#include "skewstab/common.hpp"

namespace skewstab {

/// Uniform cell grid on the circle [0,1); densities live at cell centers.
struct BaseGrid {
  std::size_t n = 0;

  double h() const { return 1.0 / static_cast<double>(n); }
  double center(std::size_t i) const {
    return (static_cast<double>(i) + 0.5) * h();
  }
  // Cell containing x (x in [0,1)).
  std::size_t cell(double x) const {
    auto i = static_cast<std::size_t>(x * static_cast<double>(n));
    return i >= n ? n - 1 : i;
  }
  bool operator==(const BaseGrid&) const = default;
};

/// Uniform node grid on the fiber K = [0,1], endpoints included.
struct FiberGrid {
  std::size_t n_fiber = 0;  // node count, >= 2

  double h() const { return 1.0 / static_cast<double>(n_fiber - 1); }
  double node(std::size_t i) const { return static_cast<double>(i) * h(); }
  bool operator==(const FiberGrid&) const = default;
};

}  // namespace skewstab

#endif  // SKEWSTAB_GRID_HPP
