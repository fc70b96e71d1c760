#include <cmath>
#include <random>

#include "doctest.h"
#include "solbranch/jet.hpp"
#include "test_support.hpp"

using namespace solbranch;
using testsup::central_derivative;

TEST_CASE("product is plain polynomial truncation") {
  Jet1 a(std::vector<double>{1, 1});
  Jet1 b(std::vector<double>{1, -1});
  const Jet1 r = a.with_order(2) * b.with_order(2);
  CHECK(r.c[0] == doctest::Approx(1.0));
  CHECK(r.c[1] == doctest::Approx(0.0));
  CHECK(r.c[2] == doctest::Approx(-1.0));
}

TEST_CASE("quotient of hand-built jets") {
  Jet1 gamma(std::vector<double>{1, 1, 0});
  const Jet1 num = gamma * gamma;  // [1,2,1]
  CHECK(num.c[1] == doctest::Approx(2.0));
  const Jet1 den(std::vector<double>{2, 0, 0});
  const Jet1 r = num / den;
  CHECK(r.c[0] == doctest::Approx(0.5));
  CHECK(r.c[1] == doctest::Approx(1.0));
  CHECK(r.c[2] == doctest::Approx(0.5));
}

TEST_CASE("division guard fires on near-zero leading coefficient") {
  Jet1 a = Jet1::constant(1.0, 2);
  Jet1 b(std::vector<double>{1e-18, 1, 1});
  CHECK_THROWS_AS(a / b, GuardError);
  try {
    (void)(a / b);
  } catch (const GuardError& e) {
    CHECK(e.guard == Guard::division);
  }
}

TEST_CASE("elementary function jets") {
  const Jet1 lg = log(Jet1(std::vector<double>{1, 1}));
  CHECK(lg.c[0] == doctest::Approx(0.0));
  CHECK(lg.c[1] == doctest::Approx(1.0));

  const Jet1 ex = exp(Jet1::variable(0.0, 4));
  CHECK(ex.c[0] == doctest::Approx(1.0));
  CHECK(ex.c[1] == doctest::Approx(1.0));
  CHECK(ex.c[2] == doctest::Approx(0.5));
  CHECK(ex.c[3] == doctest::Approx(1.0 / 6.0));
  CHECK(ex.c[4] == doctest::Approx(1.0 / 24.0));

  // sin(x^2) at x = 0.3 vs finite differences
  const Jet1 x = Jet1::variable(0.3, 3);
  const Jet1 s = sin(x * x);
  auto f = [](double u) { return std::sin(u * u); };
  for (int k = 0; k <= 3; ++k) {
    const double fd = central_derivative(f, 0.3, k);
    const double jet_val = extract_derivative(s, k);
    CHECK(jet_val == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("derivative extraction restores factorials") {
  const Jet1 c(std::vector<double>{1, 0, -0.5});  // cos at 0
  CHECK(extract_derivative(c, 2) == doctest::Approx(-1.0));
  CHECK(extract_derivative(c, 0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(extract_derivative(c, 3), GuardError);

  Jet2 x1 = Jet2::variable(0.0, 0, 2);
  Jet2 x2 = Jet2::variable(0.0, 1, 2);
  const Jet2 p = x1 * x2;
  CHECK(extract_derivative(p, 1, 1) == doctest::Approx(1.0));
  CHECK(extract_derivative(p, 2, 0) == doctest::Approx(0.0));
}

TEST_CASE("2D jets: coefficients of x1*x2 + x1^2") {
  Jet2 x1 = Jet2::variable(0.0, 0, 2);
  Jet2 x2 = Jet2::variable(0.0, 1, 2);
  const Jet2 e = x1 * x2 + x1 * x1;
  CHECK(e.at(0, 0) == doctest::Approx(0.0));
  CHECK(e.at(1, 0) == doctest::Approx(0.0));
  CHECK(e.at(0, 1) == doctest::Approx(0.0));
  CHECK(e.at(2, 0) == doctest::Approx(1.0));
  CHECK(e.at(1, 1) == doctest::Approx(1.0));
  CHECK(e.at(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("algebraic round trips") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coeff(-2.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Jet1 a = Jet1::constant(0.0, 5), b = Jet1::constant(0.0, 5), c = Jet1::constant(0.0, 5);
    for (int k = 0; k <= 5; ++k) {
      a.c[k] = coeff(gen);
      b.c[k] = coeff(gen);
      c.c[k] = coeff(gen);
    }
    a.c[0] += 3.0;  // keep leading coefficients away from zero
    b.c[0] += 3.0;

    const Jet1 ab = a * b, ba = b * a;
    for (int k = 0; k <= 5; ++k) CHECK(ab.c[k] == doctest::Approx(ba.c[k]).epsilon(1e-12));

    const Jet1 abc1 = (a * b) * c, abc2 = a * (b * c);
    for (int k = 0; k <= 5; ++k)
      CHECK(abc1.c[k] == doctest::Approx(abc2.c[k]).epsilon(1e-12).scale(1.0));

    const Jet1 rt = (a * b) / b;
    for (int k = 0; k <= 5; ++k) CHECK(rt.c[k] == doctest::Approx(a.c[k]).epsilon(1e-10));

    const Jet1 el = exp(log(a));
    for (int k = 0; k <= 5; ++k) CHECK(el.c[k] == doctest::Approx(a.c[k]).epsilon(1e-10));
  }
}

TEST_CASE("jet derivative shifts coefficients") {
  // d/deps of f(x+eps) at order 3: coefficients (k+1)c[k+1]
  const Jet1 x = Jet1::variable(0.5, 3);
  const Jet1 f = x * x * x;  // (0.5+e)^3
  const Jet1 df = derivative(f);
  CHECK(df.order() == 2);
  CHECK(df.value() == doctest::Approx(3 * 0.25));
  const Jet2 y = Jet2::variable(1.0, 0, 2);
  const Jet2 g = y * y;
  const Jet2 dg = derivative(g, 0);
  CHECK(dg.value() == doctest::Approx(2.0));
  CHECK(derivative(g, 1).value() == doctest::Approx(0.0));
}
