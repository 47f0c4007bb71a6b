#include "zcp/coverage.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>

#include "doctest.h"

using namespace zcp;

TEST_CASE("zeta: single-parameter closed form") {
  for (long n_m : {5L, 50L, 500L}) {
    const GuaranteeQuery q{n_m, 1, 0};
    for (double eps : {0.01, 0.1, 0.5}) {
      CHECK(zeta(q, eps).zeta ==
            doctest::Approx(std::pow(1.0 - eps, static_cast<double>(n_m))).epsilon(1e-12));
    }
  }
}

TEST_CASE("zeta: direct hand summation for a two-sample query") {
  // C(n_out + n_theta - 1, n_out) = C(1,1) = 1;
  // sum_{i=0}^{1} C(2,i) 0.5^i 0.5^{2-i} = 0.25 + 2*0.25 = 0.75.
  const GuaranteeQuery q{2, 1, 1};
  const ZetaResult res = zeta(q, 0.5);
  CHECK(res.zeta == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_FALSE(res.vacuous);
}

TEST_CASE("zeta: vacuous bound is flagged") {
  // Large leading binomial with a weak tail pushes the bound past 1.
  const GuaranteeQuery q{20, 15, 10};
  const ZetaResult res = zeta(q, 0.5);
  CHECK(res.zeta > 1.0);
  CHECK(res.vacuous);
}

TEST_CASE("zeta: paper-scale query near 0.1") {
  const GuaranteeQuery q{77, 2, 0};
  CHECK(zeta(q, 0.0496).zeta == doctest::Approx(0.1).epsilon(0.02));
}

TEST_CASE("zeta: input validation") {
  CHECK_THROWS_AS(zeta(GuaranteeQuery{0, 1, 0}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(zeta(GuaranteeQuery{5, 0, 0}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(zeta(GuaranteeQuery{5, 1, 5}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(zeta(GuaranteeQuery{5, 1, 0}, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(zeta(GuaranteeQuery{5, 1, 0}, 1.0), std::invalid_argument);
}

TEST_CASE("solve_epsilon: closed-form inversion at n_theta = 1") {
  const GuaranteeQuery q{100, 1, 0};
  const double target = std::exp(-1.0);
  const EpsilonResult res = solve_epsilon(q, 1.0 - target);  // zeta* = e^{-1}
  CHECK(res.epsilon == doctest::Approx(1.0 - std::exp(-1.0 / 100.0)).epsilon(1e-9));
}

TEST_CASE("solve_epsilon: guaranteed coverage rows") {
  SUBCASE("CP on Energy: n_m = 77, n_theta = 2") {
    const EpsilonResult res = solve_epsilon(GuaranteeQuery{77, 2, 0}, 0.9);
    CHECK(std::abs(res.guaranteed_coverage - 0.9504) < 0.002);
  }
  SUBCASE("IPM/ZCP on Energy: n_m = 77, n_theta = 15") {
    const EpsilonResult res = solve_epsilon(GuaranteeQuery{77, 15, 0}, 0.9);
    CHECK(std::abs(res.guaranteed_coverage - 0.7492) < 0.005);
  }
  SUBCASE("outlier rows reproduce too") {
    CHECK(std::abs(solve_epsilon(GuaranteeQuery{77, 2, 1}, 0.9).guaranteed_coverage - 0.9205) <
          0.002);
    CHECK(std::abs(solve_epsilon(GuaranteeQuery{77, 2, 5}, 0.9).guaranteed_coverage - 0.8304) <
          0.002);
    CHECK(std::abs(solve_epsilon(GuaranteeQuery{77, 15, 1}, 0.9).guaranteed_coverage - 0.6709) <
          0.005);
  }
}

TEST_CASE("solve_epsilon: boundary reports when no root exists") {
  // A vacuous query keeps zeta above the target everywhere.
  CHECK_THROWS_AS(solve_epsilon(GuaranteeQuery{20, 15, 10}, 0.9), std::domain_error);
}

TEST_CASE("zeta monotonicity grids") {
  SUBCASE("strictly decreasing in epsilon") {
    const GuaranteeQuery q{60, 4, 1};
    double prev = std::numeric_limits<double>::infinity();
    for (double eps = 0.02; eps < 0.9; eps += 0.04) {
      const double z = zeta(q, eps).zeta;
      CHECK(z < prev);
      prev = z;
    }
  }
  SUBCASE("non-decreasing in n_theta and n_out, non-increasing in n_m") {
    const double eps = 0.1;
    double prev = 0.0;
    for (int n_theta = 1; n_theta <= 8; ++n_theta) {
      const double z = zeta(GuaranteeQuery{60, n_theta, 0}, eps).zeta;
      CHECK(z >= prev - 1e-15);
      prev = z;
    }
    prev = 0.0;
    for (int n_out = 0; n_out <= 5; ++n_out) {
      const double z = zeta(GuaranteeQuery{60, 2, n_out}, eps).zeta;
      CHECK(z >= prev - 1e-15);
      prev = z;
    }
    prev = 2.0;
    for (long n_m : {40L, 80L, 160L, 320L}) {
      const double z = zeta(GuaranteeQuery{n_m, 2, 0}, eps).zeta;
      CHECK(z <= prev + 1e-15);
      prev = z;
    }
  }
}

TEST_CASE("solve_epsilon then zeta recovers the confidence target") {
  for (long n_m : {30L, 77L, 1000L, 100000L}) {
    const GuaranteeQuery q{n_m, 3, 1};
    const EpsilonResult res = solve_epsilon(q, 0.9);
    CHECK(std::abs(zeta(q, res.epsilon).zeta - 0.1) < 1e-8);
  }
}

TEST_CASE("zeta handles very large calibration sizes in log space") {
  const GuaranteeQuery q{1000000, 10, 3};
  const double z = zeta(q, 0.001).zeta;
  CHECK(std::isfinite(z));
  CHECK(z >= 0.0);
}
