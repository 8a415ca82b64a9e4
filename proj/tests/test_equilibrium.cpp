#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "skewstab/equilibrium.hpp"

using namespace skewstab;

namespace {

SkewSystem doubling_affine(double offset, std::size_t n_base = 128,
                           std::size_t n_fiber = 65) {
  SkewSystem F;
  F.base = linear_base(2);
  F.fiber = affine_fiber_const(2, 0.5, offset);
  F.zeta = 1.0;
  F.base_grid = BaseGrid{n_base};
  F.fiber_grid = FiberGrid{n_fiber};
  return F;
}

AtomicMeasure uniform_nu(std::size_t n) {
  AtomicMeasure nu;
  for (std::size_t i = 0; i < n; ++i)
    nu.atoms.push_back(Atom{(i + 0.5) / static_cast<double>(n), 1.0 / n});
  return nu;
}

}  // namespace

TEST_CASE("convergence constants arithmetic") {
  auto cc = ConvergenceConstants::make(0.5, 1.0, 0.5, 1.0);
  CHECK_THAT(cc.beta1, Catch::Matchers::WithinAbs(std::sqrt(0.5), 1e-12));
  CHECK_THAT(cc.alpha_bar, Catch::Matchers::WithinAbs(2.0, 1e-12));
  CHECK_THAT(cc.D_conv,
             Catch::Matchers::WithinAbs(1.0 / std::sqrt(0.5) + 2.0 / std::sqrt(0.5),
                                        1e-12));
  CHECK(cc.beta1 > 0.0);
  CHECK(cc.beta1 < 1.0);
}

TEST_CASE("fixed point of contracting fiber maps") {
  SECTION("G = 0.5y converges to Leb x delta_0") {
    auto F = doubling_affine(0.0);
    double tol = std::max(1e-6, 2.0 * F.fiber_grid.h());
    auto fp = fixed_point(F, uniform_nu(8), tol, 100);
    REQUIRE(fp.converged);
    auto ref = product_seed(DensityOnGrid::constant(F.base_grid, 1.0),
                            AtomicMeasure::dirac(0.0));
    CHECK(linf_distance(fp.measure, ref) <= 2.0 * tol + F.fiber_grid.h());
  }

  SECTION("G = 0.5y + 0.25 converges to Leb x delta_{0.5}") {
    auto F = doubling_affine(0.25);
    double tol = std::max(1e-6, 2.0 * F.fiber_grid.h());
    auto fp = fixed_point(F, AtomicMeasure::dirac(0.0), tol, 100);
    REQUIRE(fp.converged);
    auto ref = product_seed(DensityOnGrid::constant(F.base_grid, 1.0),
                            AtomicMeasure::dirac(0.5));
    CHECK(linf_distance(fp.measure, ref) <= 2.0 * tol + F.fiber_grid.h());
  }

  SECTION("uniqueness: distinct seeds land on the same measure") {
    auto F = doubling_affine(0.25);
    double tol = std::max(1e-6, 2.0 * F.fiber_grid.h());
    double gtol = 2.0 * F.base_grid.h() + 2.0 * F.fiber_grid.h();
    auto a = fixed_point(F, AtomicMeasure::dirac(0.0), tol, 100);
    auto b = fixed_point(F, AtomicMeasure::dirac(1.0), tol, 100);
    auto c = fixed_point(F, uniform_nu(16), tol, 100);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    REQUIRE(c.converged);
    CHECK(linf_distance(a.measure, b.measure) <= 2.0 * tol + gtol);
    CHECK(linf_distance(a.measure, c.measure) <= 2.0 * tol + gtol);
    CHECK(linf_distance(b.measure, c.measure) <= 2.0 * tol + gtol);
  }

  SECTION("invariance probe") {
    auto F = doubling_affine(0.25);
    double tol = std::max(1e-6, 2.0 * F.fiber_grid.h());
    auto fp = fixed_point(F, uniform_nu(4), tol, 100);
    REQUIRE(fp.converged);
    CHECK(linf_distance(apply_transfer(F, fp.measure), fp.measure) <=
          tol + F.fiber_grid.h());
  }

  SECTION("residuals non-increasing after burn-in") {
    auto F = doubling_affine(0.25);
    auto fp = fixed_point(F, AtomicMeasure::dirac(0.0), 1e-9, 40);
    auto burn = static_cast<std::size_t>(
        std::ceil(std::log(F.fiber_grid.h()) / std::log(0.5)));
    for (std::size_t k = burn; k + 1 < fp.residuals.size(); ++k)
      CHECK(fp.residuals[k + 1] <= fp.residuals[k] + F.fiber_grid.h());
  }

  SECTION("non-convergence is reported, not thrown") {
    auto F = doubling_affine(0.25);
    auto fp = fixed_point(F, AtomicMeasure::dirac(0.0), 1e-15, 3);
    CHECK_FALSE(fp.converged);
    CHECK(fp.iterations == 3);
  }
}

TEST_CASE("measured equilibrium rate") {
  auto F = doubling_affine(0.25);
  auto se = estimate_spectral_constants(F.base, 1.0, 3, 19);
  auto cc = ConvergenceConstants::make(se.r_hat, se.D_hat, 0.5, 1.0);

  SECTION("theoretical constants for the doubling base") {
    CHECK_THAT(cc.beta1, Catch::Matchers::WithinAbs(std::sqrt(0.5), 0.02));
  }

  SECTION("bound holds at every step and rate beats the theorem") {
    auto rep = measured_equilibrium_rate(F, 4, 8, 5, cc);
    CHECK(rep.all_within_bound);
    for (const auto& row : rep.rows) CHECK(row.margin >= 0.0);
    // x-independent fiber maps contract at alpha^zeta = 0.5, faster than the
    // theorem's square-root rate; the spec band is <= 0.76.
    CHECK(rep.empirical_rate <= 0.76);
    CHECK(rep.empirical_rate <= 0.5 + 0.05);
  }

  SECTION("zero input stays zero") {
    auto one = DensityOnGrid::constant(F.base_grid, 1.0);
    auto m = product_seed(one, AtomicMeasure::dirac(0.3));
    auto z = signed_combine(m, m, 1.0, -1.0);
    auto cur = z;
    for (int n = 0; n < 4; ++n) {
      CHECK(linf_norm(cur) == 0.0);
      cur = apply_transfer(F, cur);
    }
  }
}

TEST_CASE("regularity certificate") {
  SECTION("x-independent fiber and eps_rho = 0: bound 0, estimate 0") {
    SkewSystem F = doubling_affine(0.25);
    F.base = linear_base(2, 0.0, 0.0);
    double tol = std::max(1e-6, 2.0 * F.fiber_grid.h());
    auto fp = fixed_point(F, AtomicMeasure::dirac(0.0), tol, 100);
    REQUIRE(fp.converged);
    auto cert = regularity_certificate(F, fp);
    CHECK(cert.constants.bound == 0.0);
    CHECK(cert.estimate <= 1e-12);
    CHECK(cert.pass);
  }

  SECTION("graph system meets the displayed bound 1.02") {
    SkewSystem F;
    F.base = linear_base(2);  // eps_rho defaults to 1e-2
    F.fiber = affine_fiber_linear(2, 0.5, 0.5);
    F.zeta = 1.0;
    F.base_grid = BaseGrid{256};
    F.fiber_grid = FiberGrid{65};
    double tol = std::max(1e-6, 2.0 * F.fiber_grid.h());
    auto fp = fixed_point(F, AtomicMeasure::dirac(0.5), tol, 100);
    REQUIRE(fp.converged);
    auto cert = regularity_certificate(F, fp);
    CHECK_THAT(cert.constants.bound, Catch::Matchers::WithinAbs(1.02, 1e-12));
    CHECK(cert.estimate <= 1.02 + cert.tolerance);
    CHECK(cert.pass);
  }

  SECTION("bound is linear in the fiber Hoelder constant") {
    SkewSystem F = doubling_affine(0.25);
    auto a = RegularityConstants::make(F);
    F.fiber.holder_G = 0.2;
    auto b = RegularityConstants::make(F);
    F.fiber.holder_G = 0.4;
    auto c = RegularityConstants::make(F);
    CHECK_THAT(c.D_reg - a.D_reg, Catch::Matchers::WithinAbs(2.0 * (b.D_reg - a.D_reg),
                                                             1e-12));
  }

  SECTION("hypothesis flag when (alpha L)^zeta >= 1") {
    SkewSystem F = doubling_affine(0.25);
    F.base.L_const = 3.0;  // alpha L = 1.5
    auto rc = RegularityConstants::make(F);
    CHECK_FALSE(rc.hypothesis_ok);
  }
}
