#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "skewstab/stability.hpp"

using namespace skewstab;

namespace {

SkewSystem base_system(std::size_t n_base = 256, std::size_t n_fiber = 65) {
  SkewSystem F;
  F.base = linear_base(2);
  F.fiber = affine_fiber_const(2, 0.5, 0.25);
  F.zeta = 1.0;
  F.base_grid = BaseGrid{n_base};
  F.fiber_grid = FiberGrid{n_fiber};
  return F;
}

const std::vector<double> kProbes{0.0, 0.05, 0.1};

}  // namespace

TEST_CASE("drift breakdown compute_R") {
  auto F0 = base_system();

  SECTION("fiber translation activates only the fiber condition") {
    auto fam = fiber_translation_family(F0);
    for (double d : {0.01, 0.05}) {
      auto b = compute_R(fam, d, 512, 3);
      CHECK(b.jacobian == 0.0);
      CHECK(b.preimage == 0.0);
      CHECK_THAT(b.fiber, Catch::Matchers::WithinAbs(d, 1e-12));
      CHECK_THAT(b.R_hat, Catch::Matchers::WithinAbs(d, 1e-12));
      CHECK(b.R_hat <= fam.R_declared(d) + 1e-9);
    }
  }

  SECTION("base rotation shifts preimages by delta / k") {
    auto fam = base_rotation_family(F0, 2);
    auto b = compute_R(fam, 0.04, 512, 3);
    CHECK(b.jacobian == 0.0);  // rho constant 1/2 on both sides
    CHECK_THAT(b.preimage, Catch::Matchers::WithinAbs(0.02, 1e-12));
    CHECK(b.fiber == 0.0);
    CHECK(b.R_hat <= fam.R_declared(0.04) + 1e-9);
  }

  SECTION("composite takes the max of the parts") {
    auto fam = composite_family(F0, 2);
    auto b = compute_R(fam, 0.04, 512, 3);
    CHECK_THAT(b.preimage, Catch::Matchers::WithinAbs(0.02, 1e-12));
    CHECK_THAT(b.fiber, Catch::Matchers::WithinAbs(0.04, 1e-12));
    CHECK_THAT(b.R_hat, Catch::Matchers::WithinAbs(0.04, 1e-12));
  }

  SECTION("delta = 0 gives exactly zero") {
    for (auto mk : {&fiber_translation_family}) {
      auto fam = mk(F0);
      auto b = compute_R(fam, 0.0, 128, 3);
      CHECK(b.R_hat == 0.0);
    }
    auto b = compute_R(base_rotation_family(F0, 2), 0.0, 128, 3);
    CHECK(b.R_hat == 0.0);
  }
}

TEST_CASE("admissibility of the shipped families") {
  auto F0 = base_system();

  SECTION("fiber translation family is admissible with pinned constants") {
    auto fam = fiber_translation_family(F0);
    auto rep = check_admissibility(fam, 1.0, kProbes, 3, 11);
    CHECK(rep.all_pass());
    const auto& k = rep.constants;
    // constant Jacobians: K5 = (1/2)(1/2)
    CHECK_THAT(k.K5, Catch::Matchers::WithinAbs(0.25, 1e-12));
    CHECK_THAT(k.beta_u, Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(k.D_u, Catch::Matchers::WithinAbs(0.01, 1e-12));
    CHECK_THAT(k.B_u, Catch::Matchers::WithinAbs(0.02, 1e-12));
    // C1 = |G0|_zeta + 1 + K5 + B_u with |G0|_zeta = 0
    CHECK_THAT(k.C1, Catch::Matchers::WithinAbs(1.27, 1e-12));
    CHECK(k.C == k.C1);
    CHECK(k.M2 == 1.0);
    CHECK_THAT(k.rho2, Catch::Matchers::WithinAbs(std::sqrt(0.5), 0.02));
    CHECK(k.rho2 > 0.0);
    CHECK(k.rho2 < 1.0);
    CHECK(k.C2 > 0.0);
    CHECK(k.M >= 1.0);
  }

  SECTION("branch-count change fails U1") {
    PerturbationFamily fam;
    fam.kind = "composite";
    fam.systems = [&F0](double delta) {
      SkewSystem F = F0;
      F.base = linear_base(delta > 0.0 ? 3 : 2);
      return F;
    };
    fam.R_declared = [](double delta) { return delta; };
    auto rep = check_admissibility(fam, 1.0, kProbes, 2, 11);
    CHECK_FALSE(rep.all_pass());
  }

  SECTION("constant family is trivially admissible") {
    PerturbationFamily fam;
    fam.kind = "fiber-translation";
    fam.systems = [&F0](double) { return F0; };
    fam.R_declared = [](double) { return 0.0; };
    auto rep = check_admissibility(fam, 1.0, kProbes, 2, 11);
    CHECK(rep.all_pass());
  }
}

TEST_CASE("operator gap against the weak-norm bound") {
  auto F0 = base_system();
  auto fam = fiber_translation_family(F0);
  auto rep = check_admissibility(fam, 1.0, kProbes, 3, 11);
  AtomicMeasure nu = AtomicMeasure::dirac(0.5);

  SECTION("delta = 0 has zero gap") {
    auto fp = fixed_point(F0, nu, 1e-6, 200);
    auto og = operator_gap(fam, 0.0, fp.measure, rep.constants, 512, 13);
    CHECK(og.gap == 0.0);
    CHECK(og.R_hat == 0.0);
    CHECK(og.pass);
  }

  SECTION("translation gap equals delta for point-mass fibers") {
    double d = 0.02;
    auto Fd = fam.systems(d);
    auto fp = fixed_point(Fd, nu, 1e-6, 200);
    REQUIRE(fp.converged);
    auto og = operator_gap(fam, d, fp.measure, rep.constants, 512, 13);
    CHECK_THAT(og.gap, Catch::Matchers::WithinAbs(d, 1e-9));
    CHECK_THAT(og.bound, Catch::Matchers::WithinAbs(rep.constants.C1 * d, 1e-9));
    CHECK(og.gap <= og.bound + 1e-12);
    CHECK(og.pass);
  }
}

TEST_CASE("certified stability bound arithmetic") {
  StabilityConstants k;
  k.C = 1.0;
  k.M = 1.0;
  k.rho2 = 0.5;
  k.C2 = 1.0;
  k.M2 = 1.0;

  SECTION("pinned value at delta = 2^-10") {
    double d = std::pow(2.0, -10.0);
    auto cb = certified_stability_bound(k, 1.0, d, d);
    CHECK(cb.N == 10);
    CHECK_THAT(cb.bound_N, Catch::Matchers::WithinAbs(12.0 * d, 1e-15));
    CHECK(cb.bound_N <= cb.bound_closed);
  }

  SECTION("bound_N below the closed form along a dyadic grid") {
    for (int kk = 1; kk <= 20; ++kk) {
      double d = std::pow(2.0, -kk);
      auto cb = certified_stability_bound(k, 1.0, d, d);
      CHECK(cb.N == kk);
      CHECK(cb.bound_N <= cb.bound_closed + 1e-15);
    }
  }

  SECTION("monotone along delta = rho2^k") {
    double prev = 1e300;
    for (int kk = 1; kk <= 20; ++kk) {
      double d = std::pow(0.5, kk);
      auto cb = certified_stability_bound(k, 1.0, d, d);
      CHECK(cb.bound_N <= prev + 1e-15);
      prev = cb.bound_N;
    }
  }

  SECTION("delta outside (0,1) is rejected") {
    CHECK_THROWS_AS(certified_stability_bound(k, 1.0, 0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(certified_stability_bound(k, 1.0, 1.5, 1.5), std::domain_error);
  }
}

TEST_CASE("stability sweep on the translation family") {
  auto F0 = base_system(256, 65);
  auto fam = fiber_translation_family(F0);
  auto rep = check_admissibility(fam, 1.0, kProbes, 3, 11);
  std::vector<double> deltas;
  for (int k = 4; k <= 8; ++k) deltas.push_back(std::pow(2.0, -k));
  SweepOptions opt;  // tol 1e-6: resolves the oracle gap below grid scale
  auto sw = stability_sweep(fam, deltas, rep.constants, opt);

  REQUIRE(sw.rows.size() == deltas.size());
  CHECK(sw.all_pass());
  double row_tol = 2.0 * (F0.base_grid.h() + F0.fiber_grid.h()) + 1e-6;
  double prev_gap = 1e300;
  for (const auto& r : sw.rows) {
    CHECK(r.converged);
    // affine fixed-point oracle: the fiber point shifts by delta/(1-alpha)
    CHECK_THAT(r.measured_gap, Catch::Matchers::WithinAbs(2.0 * r.delta, row_tol));
    CHECK(r.measured_gap <= r.certified_closed + sw.grid_tolerance);
    CHECK(r.measured_gap <= prev_gap + 1e-12);
    prev_gap = r.measured_gap;
    CHECK_THAT(r.operator_gap, Catch::Matchers::WithinAbs(r.delta, 1e-9));
    CHECK(r.operator_gap <= r.operator_bound + 1e-12);
    // uniform Hoelder bound: point-mass fibers constant in the leaf
    CHECK(r.holder_delta <= rep.constants.B_u + sw.grid_tolerance);
  }
  CHECK(sw.fit_rows >= 2);
  CHECK_THAT(sw.fit_slope, Catch::Matchers::WithinAbs(1.0, 0.05));
  CHECK(sw.fit_c > 0.0);
}

TEST_CASE("uniform Hoelder report") {
  auto F0 = base_system(128, 65);

  SECTION("translation family: estimates vanish, B_u = 0.02") {
    auto fam = fiber_translation_family(F0);
    SweepOptions opt;
    auto rep = uniform_holder_bound(fam, {0.0, 0.05, 0.1}, opt);
    CHECK(rep.hypothesis_ok);
    CHECK_THAT(rep.B_u, Catch::Matchers::WithinAbs(0.02, 1e-12));
    REQUIRE(rep.estimates.size() == 3);
    for (double e : rep.estimates) CHECK(e <= 1e-9);
    CHECK(rep.all_pass);
  }

  SECTION("graph family stays below B_u = 1.02") {
    SkewSystem G = F0;
    // tent-graph fiber: same Hoelder constant 0.5 as the linear graph but
    // with range [0, 0.75], leaving headroom for the translations
    G.fiber.branches = 2;
    G.fiber.alpha = 0.5;
    G.fiber.holder_G = 0.5;
    G.fiber.G = [](std::size_t, double x, double y) {
      return 0.5 * y + 0.5 * std::min(x, 1.0 - x);
    };
    auto fam = fiber_translation_family(G);
    SweepOptions opt;
    auto rep = uniform_holder_bound(fam, {0.0, 0.05, 0.1}, opt);
    CHECK(rep.hypothesis_ok);
    CHECK_THAT(rep.B_u, Catch::Matchers::WithinAbs(1.02, 1e-12));
    CHECK(rep.all_pass);
  }
}
