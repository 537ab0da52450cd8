#include <doctest.h>

#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "fpanel/stats.hpp"

using namespace fpanel;

TEST_SUITE("stats") {

TEST_CASE("normal quantile matches published fixed points") {
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(normal_quantile(0.975) ==
        doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.025) ==
        doctest::Approx(-1.959963984540054).epsilon(1e-12));
  CHECK(normal_quantile(0.95) ==
        doctest::Approx(1.6448536269514722).epsilon(1e-12));
  CHECK(normal_quantile(0.841344746068543) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
  CHECK_THROWS_AS(normal_quantile(-0.2), std::invalid_argument);
}

TEST_CASE("normal cdf basics") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(1.959963984540054) ==
        doctest::Approx(0.975).epsilon(1e-13));
  CHECK(normal_cdf(-8.0) == doctest::Approx(6.22096057427178e-16).epsilon(1e-3));
  CHECK(normal_cdf(8.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cdf and quantile are mutual inverses across the support") {
  const double ps[] = {1e-10, 1e-6, 1e-3, 0.01, 0.1, 0.3,  0.5,
                       0.7,   0.9,  0.99, 0.999, 0.999999};
  for (double p : ps) {
    const double x = normal_quantile(p);
    CHECK(std::abs(normal_cdf(x) - p) <= 1e-11 * std::max(p, 1e-4));
    if (p > 1e-8 && p < 1.0 - 1e-8) {
      CHECK(normal_quantile(normal_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
    }
  }
}

TEST_CASE("regularized incomplete beta against closed forms") {
  // I_x(2,3) = x^2 (6 - 8x + 3x^2)
  const double x = 0.5;
  const double exact23 = x * x * (6 - 8 * x + 3 * x * x);
  CHECK(regularized_incomplete_beta(0.5, 2, 3) ==
        doctest::Approx(exact23).epsilon(1e-14));
  // I_x(5,2) = 6 x^5 - 5 x^6
  const double y = 0.3;
  const double exact52 = 6 * std::pow(y, 5) - 5 * std::pow(y, 6);
  CHECK(regularized_incomplete_beta(0.3, 5, 2) ==
        doctest::Approx(exact52).epsilon(1e-13));
  // I_x(1,b) = 1 - (1-x)^b
  CHECK(regularized_incomplete_beta(0.2, 1, 7) ==
        doctest::Approx(1 - std::pow(0.8, 7)).epsilon(1e-14));
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(regularized_incomplete_beta(0.37, 4.5, 2.25) ==
        doctest::Approx(1 - regularized_incomplete_beta(0.63, 2.25, 4.5))
            .epsilon(1e-13));
  CHECK(regularized_incomplete_beta(0.0, 2, 3) == 0.0);
  CHECK(regularized_incomplete_beta(1.0, 2, 3) == 1.0);
}

TEST_CASE("beta quantile inverts the cdf") {
  const double cases[][2] = {{2, 3}, {5, 2}, {0.5, 0.5}, {30, 70}, {1, 1}};
  for (auto& ab : cases) {
    for (double x : {0.05, 0.2, 0.5, 0.8, 0.95}) {
      const double p = regularized_incomplete_beta(x, ab[0], ab[1]);
      // Deep in a tail the cdf saturates to exactly 0 or 1 in double
      // precision and the round trip is information-theoretically lost.
      if (p <= 1e-12 || p >= 1.0 - 1e-12) continue;
      CHECK(beta_quantile(p, ab[0], ab[1]) ==
            doctest::Approx(x).epsilon(1e-9));
    }
  }
  CHECK(beta_quantile(0.0, 2, 3) == 0.0);
  CHECK(beta_quantile(1.0, 2, 3) == 1.0);
  CHECK_THROWS_AS(beta_quantile(0.5, -1.0, 2.0), std::invalid_argument);
}

TEST_CASE("log_beta agrees with lgamma identity") {
  CHECK(log_beta(2, 3) == doctest::Approx(std::log(1.0 / 12.0)).epsilon(1e-13));
  CHECK(log_beta(0.5, 0.5) ==
        doctest::Approx(std::log(3.14159265358979323846)).epsilon(1e-13));
}

} // TEST_SUITE("stats")
