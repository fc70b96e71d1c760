#pragma once

// Shared helpers for the test suites: finite-difference oracles and a small
// random-expression generator used to cross-check jets against derivatives
// computed without any jet machinery.

#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace testsup {

// k-th derivative by nested central differences + one Richardson step.
// The base step grows with k; at fixed 1e-4 the order-4 stencil would be
// pure roundoff in doubles.
inline double central_derivative(const std::function<double(double)>& f, double x, int k,
                                 double h = 0.0) {
  if (k == 0) return f(x);
  if (h == 0.0) {
    static const double steps[5] = {0.0, 1e-4, 5e-4, 2e-3, 1e-2};
    h = k <= 4 ? steps[k] : 2e-2;
  }
  std::function<double(double, double)> level = [&f](double x0, double) { return f(x0); };
  for (int i = 0; i < k; ++i) {
    auto prev = level;
    level = [prev](double x0, double step) {
      return (prev(x0 + step, step) - prev(x0 - step, step)) / (2.0 * step);
    };
  }
  const double coarse = level(x, 2.0 * h);
  const double fine = level(x, h);
  return (4.0 * fine - coarse) / 3.0;
}

// Mixed partial d1^a d2^b by nesting the 1D helper along each axis.
inline double central_derivative_2d(const std::function<double(double, double)>& f, double x1,
                                    double x2, int a, int b) {
  auto along_x1 = [&](double u2) {
    auto g = [&](double u1) { return f(u1, u2); };
    return central_derivative(g, x1, a);
  };
  return central_derivative(along_x1, x2, b);
}

}  // namespace testsup

#include "solbranch/kernel_sampler.hpp"
#include "solbranch/quadrature.hpp"

namespace testsup {

// Independent total-mass quadrature of a kernel density: radial-outer
// (adaptive, split at the h kink radius), angular-inner with octant Gauss
// panels aligned to the |cos|/|sin| kinks. Includes the rho_delta atom.
inline double integrate_density_mass(const solbranch::KernelSampler& sampler, solbranch::Vec2 x,
                                     solbranch::KernelDensity which) {
  using namespace solbranch;
  const auto angular = [&](double rho) {
    const GaussRule& g = gauss_legendre(32);
    double sum = 0.0;
    for (int octant = 0; octant < 8; ++octant) {
      const double a = octant * M_PI / 4.0;
      for (size_t i = 0; i < g.nodes.size(); ++i) {
        const double alpha = a + M_PI / 8.0 * (1.0 + g.nodes[i]);
        const double w = M_PI / 8.0 * g.weights[i];
        const Vec2 y{x.x1 + rho * std::cos(alpha), x.x2 + rho * std::sin(alpha)};
        sum += w * sampler.density(x, y, which);
      }
    }
    return sum * rho;  // polar Jacobian
  };
  const double r_cut = x.norm() + 70.0;
  double total = 0.0;
  double lo = 1e-14;
  for (double cut : {x.norm(), 1.0, r_cut}) {
    if (cut <= lo || cut > r_cut) continue;
    total += integrate(angular, lo, cut, 1e-9, 1e-15, 60).value;
    lo = cut;
  }
  if (lo < r_cut) total += integrate(angular, lo, r_cut, 1e-9, 1e-15, 60).value;
  if (which == KernelDensity::rho_delta)
    total += sampler.weight()(x) / sampler.normalizations(x).n_delta;
  return total;
}

// Random smooth expressions over the declared variables, built so that every
// log/sqrt argument is bounded away from zero and every division is safe on
// the whole sampling box.
class ExprGen {
 public:
  explicit ExprGen(uint64_t seed, std::vector<std::string> vars)
      : gen_(seed), vars_(std::move(vars)) {}

  std::string generate(int depth = 3) { return expr(depth); }

  const std::vector<std::string>& vars() const { return vars_; }

 private:
  std::mt19937_64 gen_;
  std::vector<std::string> vars_;

  double unif(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(gen_);
  }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(gen_); }

  std::string leaf() {
    if (pick(3) == 0) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6g", unif(-2.0, 2.0));
      return buf;
    }
    return vars_[static_cast<size_t>(pick(static_cast<int>(vars_.size())))];
  }

  std::string expr(int depth) {
    if (depth == 0) return leaf();
    switch (pick(8)) {
      case 0:
        return "(" + expr(depth - 1) + " + " + expr(depth - 1) + ")";
      case 1:
        return "(" + expr(depth - 1) + " - " + expr(depth - 1) + ")";
      case 2:
        return "(" + expr(depth - 1) + ")*(" + expr(depth - 1) + ")";
      case 3:
        return "sin(" + expr(depth - 1) + ")";
      case 4:
        return "cos(" + expr(depth - 1) + ")";
      case 5:
        // keep exponents mild so high derivatives stay representable
        return "exp(0.3*sin(" + expr(depth - 1) + "))";
      case 6:
        return "log(2.5 + sin(" + expr(depth - 1) + "))";
      case 7:
        return "(" + expr(depth - 1) + ")/(2.5 + cos(" + expr(depth - 1) + "))";
      default:
        return leaf();
    }
  }
};

}  // namespace testsup
