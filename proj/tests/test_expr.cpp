#include <cmath>
#include <random>

#include "doctest.h"
#include "solbranch/expr.hpp"
#include "test_support.hpp"

using namespace solbranch;

namespace {
const std::vector<std::string> kTheta{"theta"};
const std::vector<std::string> kXY{"x1", "x2"};
}  // namespace

TEST_CASE("grammar shape: 1 + 2*cos(theta)^2") {
  const Expr e = parse_expression("1 + 2*cos(theta)^2", kTheta);
  REQUIRE(e.kind == Expr::Kind::add);
  CHECK(e.children[0].kind == Expr::Kind::number);
  const Expr& mul = e.children[1];
  REQUIRE(mul.kind == Expr::Kind::mul);
  CHECK(mul.children[0].number == 2.0);
  const Expr& pw = mul.children[1];
  REQUIRE(pw.kind == Expr::Kind::pow);
  CHECK(pw.children[0].kind == Expr::Kind::call);
  CHECK(pw.children[0].fn == "cos");
  CHECK(pw.children[1].number == 2.0);
}

TEST_CASE("unknown identifier reported with 1-based column") {
  try {
    parse_expression("cos(thteta)", kTheta);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.column == 5);
  }
}

TEST_CASE("power is right-associative and above unary minus") {
  CHECK(eval_scalar(parse_expression("2^3^2", {}), {}) == doctest::Approx(512.0));
  CHECK(eval_scalar(parse_expression("-2^2", {}), {}) == doctest::Approx(-4.0));
  CHECK(eval_scalar(parse_expression("2^-2", {}), {}) == doctest::Approx(0.25));
  CHECK(eval_scalar(parse_expression("2*3^2", {}), {}) == doctest::Approx(18.0));
}

TEST_CASE("scalar evaluation") {
  const Expr e = parse_expression("exp(-(x1^2+x2^2))", kXY);
  CHECK(eval_scalar(e, {1.0, 0.0}) == doctest::Approx(std::exp(-1.0)));
  CHECK(eval_scalar(parse_expression("powi(x1, 3)", kXY), {2.0, 0.0}) == doctest::Approx(8.0));
  CHECK(eval_scalar(parse_expression("powi(x1, -2)", kXY), {2.0, 0.0}) == doctest::Approx(0.25));
}

TEST_CASE("jet evaluation: cosine series") {
  const Expr e = parse_expression("cos(theta)", kTheta);
  const Jet1 j = eval_jet(e, {Jet1::variable(0.0, 4)});
  CHECK(j.c[0] == doctest::Approx(1.0));
  CHECK(j.c[1] == doctest::Approx(0.0));
  CHECK(j.c[2] == doctest::Approx(-0.5));
  CHECK(j.c[3] == doctest::Approx(0.0));
  CHECK(j.c[4] == doctest::Approx(1.0 / 24.0));
}

TEST_CASE("jet evaluation: 2D polynomial coefficients") {
  const Expr e = parse_expression("x1*x2 + x1^2", kXY);
  const Jet2 j = eval_jet(e, {Jet2::variable(0.0, 0, 2), Jet2::variable(0.0, 1, 2)});
  CHECK(j.at(0, 0) == doctest::Approx(0.0));
  CHECK(j.at(1, 0) == doctest::Approx(0.0));
  CHECK(j.at(0, 1) == doctest::Approx(0.0));
  CHECK(j.at(2, 0) == doctest::Approx(1.0));
  CHECK(j.at(1, 1) == doctest::Approx(1.0));
  CHECK(j.at(0, 2) == doctest::Approx(0.0));
}

TEST_CASE("jet value agrees with scalar value") {
  testsup::ExprGen gen(11, {"x1", "x2"});
  for (int i = 0; i < 40; ++i) {
    const Expr e = parse_expression(gen.generate(), kXY);
    const double x1 = 0.3 + 0.1 * i / 40.0, x2 = -0.2;
    const double sc = eval_scalar(e, {x1, x2});
    const Jet2 j = eval_jet(e, {Jet2::variable(x1, 0, 3), Jet2::variable(x2, 1, 3)});
    CHECK(j.value() == doctest::Approx(sc).epsilon(1e-12));
  }
}

TEST_CASE("jet derivatives agree with finite differences of scalar eval") {
  testsup::ExprGen gen(23, {"x1", "x2"});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> point(-0.8, 0.8);
  int checked = 0;
  for (int i = 0; i < 25; ++i) {
    const std::string text = gen.generate();
    const Expr e = parse_expression(text, kXY);
    const double x1 = point(rng), x2 = point(rng);
    const Jet2 j = eval_jet(e, {Jet2::variable(x1, 0, 2), Jet2::variable(x2, 1, 2)});
    auto f = [&](double u1, double u2) { return eval_scalar(e, {u1, u2}); };
    for (int a = 0; a <= 2; ++a)
      for (int b = 0; a + b <= 2; ++b) {
        const double fd = testsup::central_derivative_2d(f, x1, x2, a, b);
        const double jd = extract_derivative(j, a, b);
        const double scale = std::max({std::abs(fd), std::abs(jd), 1.0});
        CHECK(std::abs(jd - fd) / scale < 2e-6);
        ++checked;
      }
  }
  CHECK(checked > 100);
}

TEST_CASE("pretty-print round trip is structurally identical") {
  testsup::ExprGen gen(31, {"theta"});
  for (int i = 0; i < 60; ++i) {
    const Expr e = parse_expression(gen.generate(), kTheta);
    const Expr back = parse_expression(to_string(e, kTheta), kTheta);
    CHECK(e == back);
  }
  for (const char* s : {"1 + 2*cos(theta)^2", "-theta^2", "2^3^2", "powi(theta, -3)",
                        "theta - (1 - theta) - 2", "theta/2/3", "-(-theta)"}) {
    const Expr e = parse_expression(s, kTheta);
    CHECK(e == parse_expression(to_string(e, kTheta), kTheta));
  }
}

TEST_CASE("parser is total: bad input yields located errors, never crashes") {
  std::mt19937_64 rng(77);
  const std::string alphabet = "xyt123+-*/^()., abcdefg_";
  std::uniform_int_distribution<size_t> len(0, 24);
  std::uniform_int_distribution<size_t> ch(0, alphabet.size() - 1);
  for (int i = 0; i < 3000; ++i) {
    std::string s;
    const size_t n = len(rng);
    for (size_t k = 0; k < n; ++k) s += alphabet[ch(rng)];
    try {
      (void)parse_expression(s, {"x", "y", "t"});
    } catch (const ParseError& e) {
      CHECK(e.column >= 1);
      CHECK(e.column <= static_cast<int>(s.size()) + 1);
    }
  }
}

TEST_CASE("arity and syntax errors") {
  CHECK_THROWS_AS(parse_expression("sin()", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("sin(theta, theta)", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("powi(theta)", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("powi(theta, theta)", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("(theta", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("theta +", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("", kTheta), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(theta)", kTheta), ParseError);
}

TEST_CASE("domain guards propagate") {
  CHECK_THROWS_AS(eval_scalar(parse_expression("log(x1)", kXY), {-1.0, 0.0}), GuardError);
  CHECK_THROWS_AS(eval_scalar(parse_expression("sqrt(x1)", kXY), {-1.0, 0.0}), GuardError);
  const Expr e = parse_expression("log(theta)", kTheta);
  CHECK_THROWS_AS(eval_jet(e, {Jet1::variable(-2.0, 2)}), GuardError);
}
