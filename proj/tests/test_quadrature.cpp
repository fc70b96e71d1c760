#include <cmath>

#include "doctest.h"
#include "solbranch/quadrature.hpp"

using namespace solbranch;

TEST_CASE("adaptive rule on smooth integrands") {
  CHECK(integrate([](double x) { return x * x; }, 0, 1).value == doctest::Approx(1.0 / 3.0));
  CHECK(integrate([](double x) { return std::sin(x); }, 0, M_PI).value ==
        doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate([](double x) { return std::exp(-x * x); }, -8, 8).value ==
        doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
}

TEST_CASE("integrable endpoint singularities") {
  // int_0^1 log(x) dx = -1; nodes are interior so the endpoint is never hit
  const auto r = integrate([](double x) { return std::log(x); }, 0, 1, 1e-8, 1e-12);
  CHECK(r.value == doctest::Approx(-1.0).epsilon(1e-7));
  // int_0^1 x*|log x| dx = 1/4
  const auto r2 = integrate([](double x) { return -x * std::log(x); }, 0, 1, 1e-10);
  CHECK(r2.value == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("gauss-legendre integrates polynomials exactly") {
  const GaussRule& g = gauss_legendre(8);
  double sum = 0.0;
  for (size_t i = 0; i < g.nodes.size(); ++i) {
    const double x = g.nodes[i];
    sum += g.weights[i] * (5 * x * x * x * x - x * x + 3);
  }
  CHECK(sum == doctest::Approx(2.0 - 2.0 / 3.0 + 6.0).epsilon(1e-13));
}

TEST_CASE("gauss-hermite moments") {
  CHECK(gaussian_expectation([](double z) { return z * z; }, 0.0, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(gaussian_expectation([](double z) { return std::cos(z); }, 0.0, 1.0) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
  // heat semigroup on cos: E[cos(x + sigma Z)] = cos(x) exp(-sigma^2/2)
  const double v = gaussian_expectation([](double z) { return std::cos(z); }, 0.7, 0.9);
  CHECK(v == doctest::Approx(std::cos(0.7) * std::exp(-0.81 / 2)).epsilon(1e-10));
  CHECK(gaussian_expectation([](double z) { return z; }, 2.5, 0.0) == doctest::Approx(2.5));
}
