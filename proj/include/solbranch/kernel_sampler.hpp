#pragma once

// Sampling machinery for the nonlocal kernel integrals of the vorticity
// equation. A positive weight h makes |K| h, |K + delta| h and |dK/dx_i| h
// finite measures; normalized they become the x-dependent densities the
// branching process draws kernel children from. Signs are carried by the
// sampler, magnitudes by the normalizations.

#include <cstdint>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "solbranch/rng.hpp"

namespace solbranch {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;
  double norm() const;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x1 + b.x1, a.x2 + b.x2}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x1 - b.x1, a.x2 - b.x2}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x1, s * a.x2}; }

/// K(u) = log|u| / 2pi and its gradient.
double log_kernel(Vec2 u);
double log_kernel_grad(Vec2 u, int axis);

/// Radially structured weight from the admissible catalog. Each entry knows
/// its radial profile, its sup, and an exponential envelope
/// H(u) <= env_amplitude * exp(-env_rate * u) used by the rejection sampler.
class WeightFn {
 public:
  enum class Kind { abs_exp, gaussian };

  static WeightFn from_name(const std::string& name);  // "abs-exp" | "gaussian"
  explicit WeightFn(Kind kind = Kind::abs_exp) : kind_(kind) {}

  const char* name() const;
  double operator()(Vec2 y) const { return radial(y.norm()); }
  double radial(double u) const;
  double sup() const;
  double env_amplitude() const;
  double env_rate() const;
  double dlog(Vec2 x, int axis) const;  // d/dx_axis log h(x)

 private:
  Kind kind_;
};

struct KernelNormalizations {
  double n = 0.0;        // integral |K| h
  double n1 = 0.0;       // integral |d1 K| h
  double n2 = 0.0;       // integral |d2 K| h
  double n_delta = 0.0;  // n + h(x): the delta term is a unit atom at y = x
};

enum class KernelDensity { rho, rho_delta, rho_1, rho_2 };

struct KernelDraw {
  Vec2 y;
  int sign = 1;   // sign of the sampled kernel factor (+1 for the atom)
  bool is_atom = false;
};

class KernelSampler {
 public:
  explicit KernelSampler(WeightFn h, double quad_rel_tol = 1e-6);

  const WeightFn& weight() const { return h_; }

  /// Adaptive polar quadrature around the singularities; memoized per
  /// position at 1e-9 resolution (idempotent concurrent inserts).
  KernelNormalizations normalizations(Vec2 x) const;

  /// Exact rejection draw from the named density around x. Throws after
  /// 1e6 proposals (cannot happen for catalog weights, guards a bad h).
  KernelDraw sample(RngStream& s, Vec2 x, KernelDensity which) const;

  /// Continuous-part density value (tests and goodness-of-fit); the
  /// rho_delta atom carries mass h(x)/N_delta(x) on top of this.
  double density(Vec2 x, Vec2 y, KernelDensity which) const;

 private:
  WeightFn h_;
  double rel_tol_;
  mutable std::unordered_map<std::uint64_t, KernelNormalizations> cache_;
  mutable std::shared_mutex cache_mutex_;

  KernelNormalizations compute(Vec2 x) const;
  KernelDraw sample_log_density(RngStream& s, Vec2 x) const;
  KernelDraw sample_grad_density(RngStream& s, Vec2 x, int axis) const;
};

}  // namespace solbranch
