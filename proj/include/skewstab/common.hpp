#ifndef SKEWSTAB_COMMON_HPP
#define SKEWSTAB_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace skewstab {

// Distance on the circle [0,1).
inline double circle_dist(double a, double b) {
  double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

inline double wrap01(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y = 0.0;  // guard against x == -0.0 rounding
  return y;
}

/// Deterministic RNG wrapper. std::mt19937_64 has a standard-mandated
/// sequence, and we build doubles from raw bits ourselves so that streams
/// are identical across platforms and library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t index(std::uint64_t n) {
    return eng_() % n;  // negligible bias for our n
  }

 private:
  std::mt19937_64 eng_;
};

struct GridMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RangeFault : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace skewstab

#endif  // SKEWSTAB_COMMON_HPP
