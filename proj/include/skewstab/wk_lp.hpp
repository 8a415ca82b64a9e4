#ifndef SKEWSTAB_WK_LP_HPP
#define SKEWSTAB_WK_LP_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "skewstab/common.hpp"

namespace skewstab {

// ---------------------------------------------------------------------------
// The dual-ball linear program behind the W metric:
//
//   maximize   sum_i c_i g_i
//   subject to |g_i| <= 1,  |g_i - g_j| <= d(p_i, p_j)^zeta  for all pairs,
//
// over test-function values g_i at the support points p_i of a signed
// measure with weights c_i. Two exact solvers:
//
//  * solve_chain     - zeta = 1 on the line, where metric additivity reduces
//                      the pairwise constraints to consecutive pairs. Solved
//                      by dynamic programming over concave piecewise-linear
//                      value functions; the result is the exact LP optimum.
//  * solve_transport - any zeta in (0,1]. Solves the LP dual, a balanced
//                      transportation problem with a slack node (disposal
//                      cost 1 realizes the |g| <= 1 box), by the primal
//                      transportation simplex with Bland's rule.
//
// Points with zero weight never change the optimum (d^zeta is a metric for
// zeta <= 1, so any feasible g on a subset extends) and are dropped by the
// callers.
// ---------------------------------------------------------------------------

namespace detail {

/// Concave piecewise-linear function on [-1, 1] as ordered breakpoints.
struct ConcavePL {
  std::vector<double> x, y;

  double value_at(double xq) const {
    if (xq <= x.front()) return y.front();
    if (xq >= x.back()) return y.back();
    auto it = std::upper_bound(x.begin(), x.end(), xq);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    double t = (xq - x[k - 1]) / (x[k] - x[k - 1]);
    return (1.0 - t) * y[k - 1] + t * y[k];
  }

  double max_value() const {
    double m = y.front();
    for (double v : y) m = std::max(m, v);
    return m;
  }

  // max over the window [g-d, g+d]: widen around the peak by d, then clip
  // back to [-1, 1].
  void widen_and_clip(double d) {
    std::size_t peak = 0;
    for (std::size_t k = 1; k < y.size(); ++k)
      if (y[k] > y[peak]) peak = k;
    std::vector<double> nx, ny;
    nx.reserve(x.size() + 2);
    ny.reserve(y.size() + 2);
    for (std::size_t k = 0; k < peak; ++k) {
      nx.push_back(x[k] - d);
      ny.push_back(y[k]);
    }
    nx.push_back(x[peak] - d);
    ny.push_back(y[peak]);
    nx.push_back(x[peak] + d);
    ny.push_back(y[peak]);
    for (std::size_t k = peak + 1; k < x.size(); ++k) {
      nx.push_back(x[k] + d);
      ny.push_back(y[k]);
    }
    x.swap(nx);
    y.swap(ny);
    clip();
  }

  void add_linear(double c) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += c * x[k];
  }

 private:
  void clip() {
    double ylo = value_at(-1.0), yhi = value_at(1.0);
    std::vector<double> nx, ny;
    nx.push_back(-1.0);
    ny.push_back(ylo);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (x[k] > -1.0 && x[k] < 1.0) {
        nx.push_back(x[k]);
        ny.push_back(y[k]);
      }
    }
    nx.push_back(1.0);
    ny.push_back(yhi);
    x.swap(nx);
    y.swap(ny);
  }
};

}  // namespace detail

/// Exact chain-LP optimum for zeta = 1. points must be strictly increasing.
inline double solve_chain(const std::vector<double>& points,
                          const std::vector<double>& coeffs) {
  const std::size_t n = points.size();
  if (n == 0) return 0.0;
  detail::ConcavePL V;
  V.x = {-1.0, 1.0};
  V.y = {-coeffs[0], coeffs[0]};
  for (std::size_t i = 1; i < n; ++i) {
    V.widen_and_clip(points[i] - points[i - 1]);
    V.add_linear(coeffs[i]);
  }
  return V.max_value();
}

/// Exact LP optimum for any zeta in (0,1] via the dual transportation
/// problem. points need not be sorted; pairs with equal positions should be
/// merged by the caller.
inline double solve_transport(const std::vector<double>& points,
                              const std::vector<double>& coeffs, double zeta) {
  std::vector<double> sp, sw;  // sources: positive part
  std::vector<double> tp, tw;  // sinks: negative part
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (coeffs[i] > 0.0) {
      sp.push_back(points[i]);
      sw.push_back(coeffs[i]);
    } else if (coeffs[i] < 0.0) {
      tp.push_back(points[i]);
      tw.push_back(-coeffs[i]);
    }
  }
  double splus = 0.0, sminus = 0.0;
  for (double w : sw) splus += w;
  for (double w : tw) sminus += w;
  if (splus == 0.0 && sminus == 0.0) return 0.0;

  // Slack node on both sides: every unit may be disposed of at cost 1.
  const std::size_t m = sp.size() + 1;  // last source = slack
  const std::size_t n = tp.size() + 1;  // last sink  = slack
  std::vector<double> a(sw), b(tw);
  a.push_back(sminus);
  b.push_back(splus);

  auto cost = [&](std::size_t i, std::size_t j) -> double {
    bool si = (i == m - 1), sj = (j == n - 1);
    if (si && sj) return 0.0;
    if (si || sj) return 1.0;
    return std::min(std::pow(std::fabs(sp[i] - tp[j]), zeta), 2.0);
  };

  // --- transportation simplex ---
  struct Cell {
    std::size_t i, j;
    double flow;
  };
  std::vector<Cell> basis;
  basis.reserve(m + n - 1);
  {
    // Northwest-corner staircase: moves right or down one step at a time,
    // so the m+n-1 cells always form a connected spanning tree even under
    // degeneracy.
    std::vector<double> ra = a, rb = b;
    std::size_t i = 0, j = 0;
    while (true) {
      double f = std::min(ra[i], rb[j]);
      basis.push_back({i, j, f});
      ra[i] -= f;
      rb[j] -= f;
      if (i == m - 1 && j == n - 1) break;
      if (ra[i] <= 1e-15 && i + 1 < m) ++i;
      else if (j + 1 < n) ++j;
      else ++i;
    }
  }

  const double tol = 1e-11;
  const std::size_t max_iter = 400 * (m + n) + 2000;
  std::vector<double> u(m), v(n);
  std::vector<char> udone(m), vdone(n);
  std::vector<std::vector<std::size_t>> by_src(m), by_snk(n);
  bool optimal = false;

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    // Potentials from the basis tree.
    for (auto& l : by_src) l.clear();
    for (auto& l : by_snk) l.clear();
    for (std::size_t k = 0; k < basis.size(); ++k) {
      by_src[basis[k].i].push_back(k);
      by_snk[basis[k].j].push_back(k);
    }
    std::fill(udone.begin(), udone.end(), 0);
    std::fill(vdone.begin(), vdone.end(), 0);
    u[0] = 0.0;
    udone[0] = 1;
    std::vector<std::size_t> stack_src{0}, stack_snk;
    while (!stack_src.empty() || !stack_snk.empty()) {
      if (!stack_src.empty()) {
        std::size_t i = stack_src.back();
        stack_src.pop_back();
        for (std::size_t k : by_src[i]) {
          std::size_t j = basis[k].j;
          if (!vdone[j]) {
            v[j] = cost(i, j) - u[i];
            vdone[j] = 1;
            stack_snk.push_back(j);
          }
        }
      } else {
        std::size_t j = stack_snk.back();
        stack_snk.pop_back();
        for (std::size_t k : by_snk[j]) {
          std::size_t i = basis[k].i;
          if (!udone[i]) {
            u[i] = cost(i, j) - v[j];
            udone[i] = 1;
            stack_src.push_back(i);
          }
        }
      }
    }

    // Entering cell: Bland's rule (first lexicographic negative reduced cost).
    std::size_t ei = m, ej = n;
    for (std::size_t i = 0; i < m && ei == m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (cost(i, j) - u[i] - v[j] < -tol) {
          ei = i;
          ej = j;
          break;
        }
    if (ei == m) {
      optimal = true;
      break;
    }

    // Unique cycle through the basis tree from source ei to sink ej.
    // parent-pointer BFS on the bipartite tree.
    std::vector<int> psrc(m, -2), psnk(n, -2);  // parent basis cell index
    psrc[ei] = -1;
    std::vector<std::size_t> qs{ei}, qt;
    bool reached = false;
    while ((!qs.empty() || !qt.empty()) && !reached) {
      if (!qs.empty()) {
        std::size_t i = qs.back();
        qs.pop_back();
        for (std::size_t k : by_src[i]) {
          std::size_t j = basis[k].j;
          if (psnk[j] == -2) {
            psnk[j] = static_cast<int>(k);
            if (j == ej) {
              reached = true;
              break;
            }
            qt.push_back(j);
          }
        }
      } else {
        std::size_t j = qt.back();
        qt.pop_back();
        for (std::size_t k : by_snk[j]) {
          std::size_t i = basis[k].i;
          if (psrc[i] == -2) {
            psrc[i] = static_cast<int>(k);
            qs.push_back(i);
          }
        }
      }
    }
    if (!reached) throw std::runtime_error("transport simplex: basis not a tree");

    // Walk the path back; minus-positions are the basic cells left from the
    // entering cell with odd distance.
    std::vector<std::size_t> minus, plus;
    std::size_t j = ej;
    while (true) {
      int k = psnk[j];  // basic cell (i, j): minus
      minus.push_back(static_cast<std::size_t>(k));
      std::size_t i = basis[static_cast<std::size_t>(k)].i;
      if (psrc[i] == -1) break;
      std::size_t k2 = static_cast<std::size_t>(psrc[i]);  // cell (i, j'): plus
      plus.push_back(k2);
      j = basis[k2].j;
    }
    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = basis.size();
    for (std::size_t k : minus)
      if (basis[k].flow < theta - 1e-18 ||
          (basis[k].flow <= theta && k < leave)) {
        theta = basis[k].flow;
        leave = k;
      }
    for (std::size_t k : minus) basis[k].flow -= theta;
    for (std::size_t k : plus) basis[k].flow += theta;
    basis[leave] = {ei, ej, theta};
  }

  if (!optimal)
    throw std::runtime_error("transport simplex: iteration cap hit before optimality");
  double total = 0.0;
  for (const auto& cc : basis) total += cc.flow * cost(cc.i, cc.j);
  return total;
}

}  // namespace skewstab

#endif  // SKEWSTAB_WK_LP_HPP
