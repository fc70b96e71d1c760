#pragma once

// Deterministic integration utilities shared by the engines and oracles:
// adaptive Gauss-Kronrod on finite intervals, Gauss-Hermite for heat
// semigroup expectations, Gauss-Legendre panels.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace solbranch {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double achieved)
      : std::runtime_error(msg + " (achieved tolerance " + std::to_string(achieved) + ")"),
        achieved_tolerance(achieved) {}
  double achieved_tolerance;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
};

/// Adaptive G7-K15 over [a, b]; throws QuadratureError if the requested
/// tolerance cannot be met within the subdivision budget.
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol = 1e-10, double abs_tol = 1e-14,
                           int max_depth = 48);

/// Nodes/weights for integral_{-1}^{1} f(x) dx (cached per n).
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

/// Nodes/weights for integral e^{-x^2} f(x) dx over the whole line.
const GaussRule& gauss_hermite(int n);

/// E[f(x + sigma Z)], Z standard normal, by Gauss-Hermite.
double gaussian_expectation(const std::function<double(double)>& f, double x, double sigma,
                            int n_nodes = 40);

}  // namespace solbranch
