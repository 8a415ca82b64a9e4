#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "skewstab/fiber_map.hpp"

using namespace skewstab;

TEST_CASE("affine fiber evaluation") {
  auto f = linear_base(2);
  auto g = affine_fiber_const(2, 0.5, 0.25);
  CHECK_THAT(eval_fiber(g, f, 0.3, 0.5), Catch::Matchers::WithinAbs(0.5, 1e-12));
  CHECK_THAT(eval_fiber(g, f, 0.8, 0.0), Catch::Matchers::WithinAbs(0.25, 1e-12));
  CHECK_THAT(eval_fiber(g, f, 0.8, 1.0), Catch::Matchers::WithinAbs(0.75, 1e-12));
}

TEST_CASE("range fault when the image leaves K") {
  auto f = linear_base(2);
  auto g = affine_fiber_const(2, 0.5, 0.75);  // 0.5*1 + 0.75 = 1.25 > 1
  CHECK_THROWS_AS(eval_fiber(g, f, 0.1, 1.0), RangeFault);
}

TEST_CASE("contraction rate estimate") {
  auto f = linear_base(2);
  auto g = affine_fiber_const(2, 0.5, 0.25);
  double a = estimate_alpha(g, f, 4096, 5);
  CHECK(a <= 0.5 + 1e-12);
  CHECK(a > 0.49);

  SECTION("monotone in the sample count") {
    double a1 = estimate_alpha(g, f, 256, 5);
    double a2 = estimate_alpha(g, f, 1024, 5);
    double a3 = estimate_alpha(g, f, 4096, 5);
    CHECK(a1 <= a2);
    CHECK(a2 <= a3);
  }
}

TEST_CASE("branch-wise Hoelder estimate of G") {
  auto f = linear_base(2);

  SECTION("x-independent map has constant zero") {
    auto g = affine_fiber_const(2, 0.5, 0.25);
    auto est = estimate_fiber_holder(g, f, 1.0, 2048, 9);
    CHECK(est.overall == 0.0);
  }

  SECTION("linear coupling reaches its slope from below") {
    auto g = affine_fiber_linear(2, 0.5, 0.5);
    auto est = estimate_fiber_holder(g, f, 1.0, 2048, 9);
    CHECK(est.overall <= 0.5 + 1e-12);
    CHECK(est.overall > 0.49);
    REQUIRE(est.per_branch.size() == 2);
  }

  SECTION("monotone in the sample count") {
    auto g = affine_fiber_linear(2, 0.5, 0.3);
    double e1 = estimate_fiber_holder(g, f, 1.0, 128, 9).overall;
    double e2 = estimate_fiber_holder(g, f, 1.0, 512, 9).overall;
    double e3 = estimate_fiber_holder(g, f, 1.0, 2048, 9).overall;
    CHECK(e1 <= e2);
    CHECK(e2 <= e3);
  }
}

TEST_CASE("headroom under translation perturbations") {
  // Shipped fiber maps must keep G + delta inside K up to delta_max = 0.1.
  auto f = linear_base(2);
  auto g = affine_fiber_const(2, 0.5, 0.25);
  Rng rng(2);
  for (int s = 0; s < 1000; ++s) {
    double x = rng.uniform(), y = rng.uniform();
    double v = eval_fiber(g, f, x, y);
    CHECK(v + 0.1 <= 1.0 + 1e-12);
  }
}
