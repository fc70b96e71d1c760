#pragma once

// Truncated Taylor jets in one or two formal displacement variables.
// c[k] stores f^(k)/k! (scaled derivatives), so multiplication of jets is
// plain polynomial truncation and realizes the Leibniz rule mechanically.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace solbranch {

inline constexpr double kDefaultEpsDiv = 1e-9;

/// Which guard fired; paths hitting a guard are rejected upstream, not zeroed.
enum class Guard { division, domain, order };

class GuardError : public std::runtime_error {
 public:
  GuardError(Guard g, const std::string& msg) : std::runtime_error(msg), guard(g) {}
  Guard guard;
};

namespace jet_detail {

inline double factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(171, 1.0);
    for (int i = 1; i < 171; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table[static_cast<size_t>(n)];
}

// Scaled derivative series g^(k)(u0)/k! of the elementary outer functions.
enum class Fn { exp, log, sin, cos, sqrt, recip };

inline std::vector<double> outer_series(Fn fn, double u0, int m, double eps_div) {
  std::vector<double> g(static_cast<size_t>(m) + 1);
  switch (fn) {
    case Fn::exp: {
      g[0] = std::exp(u0);
      for (int k = 1; k <= m; ++k) g[k] = g[k - 1] / k;
      break;
    }
    case Fn::log: {
      if (!(u0 > eps_div))
        throw GuardError(Guard::domain, "log of jet with non-positive leading coefficient");
      g[0] = std::log(u0);
      double p = 1.0;  // (-1)^{k+1} / u0^k
      for (int k = 1; k <= m; ++k) {
        p *= -1.0 / u0;
        g[k] = -p / k;
      }
      break;
    }
    case Fn::sin:
    case Fn::cos: {
      const double s = std::sin(u0), c = std::cos(u0);
      const double cycle[4] = {s, c, -s, -c};
      const int shift = fn == Fn::cos ? 1 : 0;
      for (int k = 0; k <= m; ++k) g[k] = cycle[(k + shift) % 4] / factorial(k);
      break;
    }
    case Fn::sqrt: {
      if (!(u0 > eps_div))
        throw GuardError(Guard::domain, "sqrt of jet with non-positive leading coefficient");
      g[0] = std::sqrt(u0);
      for (int k = 1; k <= m; ++k) g[k] = g[k - 1] * (1.5 / k - 1.0) / u0;
      break;
    }
    case Fn::recip: {
      if (std::abs(u0) < eps_div)
        throw GuardError(Guard::division, "division by jet with near-zero leading coefficient");
      g[0] = 1.0 / u0;
      for (int k = 1; k <= m; ++k) g[k] = -g[k - 1] / u0;
      break;
    }
  }
  return g;
}

}  // namespace jet_detail

// ---------------------------------------------------------------------------
// Jet1: f(theta + eps) truncated at `order`.
// ---------------------------------------------------------------------------

struct Jet1 {
  std::vector<double> c;  // c[k] = f^(k)/k!, size order+1

  Jet1() : c(1, 0.0) {}
  explicit Jet1(std::vector<double> coeffs) : c(std::move(coeffs)) {
    if (c.empty()) c.assign(1, 0.0);
  }

  int order() const { return static_cast<int>(c.size()) - 1; }
  double value() const { return c[0]; }

  static Jet1 constant(double v, int m) {
    Jet1 j;
    j.c.assign(static_cast<size_t>(m) + 1, 0.0);
    j.c[0] = v;
    return j;
  }

  static Jet1 variable(double v, int m) {
    Jet1 j = constant(v, m);
    if (m >= 1) j.c[1] = 1.0;
    return j;
  }

  Jet1 with_order(int m) const {
    Jet1 j;
    j.c.assign(static_cast<size_t>(m) + 1, 0.0);
    const int n = std::min(m, order());
    for (int k = 0; k <= n; ++k) j.c[k] = c[k];
    return j;
  }
};

inline int common_order(const Jet1& a, const Jet1& b) {
  return a.order() < b.order() ? a.order() : b.order();
}

inline Jet1 operator+(const Jet1& a, const Jet1& b) {
  const int m = common_order(a, b);
  Jet1 r = Jet1::constant(0.0, m);
  for (int k = 0; k <= m; ++k) r.c[k] = a.c[k] + b.c[k];
  return r;
}

inline Jet1 operator-(const Jet1& a, const Jet1& b) {
  const int m = common_order(a, b);
  Jet1 r = Jet1::constant(0.0, m);
  for (int k = 0; k <= m; ++k) r.c[k] = a.c[k] - b.c[k];
  return r;
}

inline Jet1 operator-(const Jet1& a) {
  Jet1 r = a;
  for (auto& x : r.c) x = -x;
  return r;
}

inline Jet1 operator*(const Jet1& a, const Jet1& b) {
  const int m = common_order(a, b);
  Jet1 r = Jet1::constant(0.0, m);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) r.c[i + j] += a.c[i] * b.c[j];
  return r;
}

inline Jet1 operator*(double s, const Jet1& a) {
  Jet1 r = a;
  for (auto& x : r.c) x *= s;
  return r;
}

/// Composition g(a) for univariate outer g given by its scaled-derivative
/// series at a.value(); evaluated by Horner in the nilpotent part of a.
inline Jet1 compose(const std::vector<double>& g, const Jet1& a) {
  const int m = a.order();
  Jet1 w = a;
  w.c[0] = 0.0;
  Jet1 r = Jet1::constant(g[static_cast<size_t>(m)], m);
  for (int k = m - 1; k >= 0; --k) {
    r = r * w;
    r.c[0] += g[static_cast<size_t>(k)];
  }
  return r;
}

inline Jet1 exp(const Jet1& a) {
  return compose(jet_detail::outer_series(jet_detail::Fn::exp, a.value(), a.order(), 0.0), a);
}
inline Jet1 log(const Jet1& a, double eps_div = kDefaultEpsDiv) {
  return compose(jet_detail::outer_series(jet_detail::Fn::log, a.value(), a.order(), eps_div), a);
}
inline Jet1 sin(const Jet1& a) {
  return compose(jet_detail::outer_series(jet_detail::Fn::sin, a.value(), a.order(), 0.0), a);
}
inline Jet1 cos(const Jet1& a) {
  return compose(jet_detail::outer_series(jet_detail::Fn::cos, a.value(), a.order(), 0.0), a);
}
inline Jet1 sqrt(const Jet1& a, double eps_div = kDefaultEpsDiv) {
  return compose(jet_detail::outer_series(jet_detail::Fn::sqrt, a.value(), a.order(), eps_div), a);
}
inline Jet1 reciprocal(const Jet1& a, double eps_div = kDefaultEpsDiv) {
  return compose(jet_detail::outer_series(jet_detail::Fn::recip, a.value(), a.order(), eps_div), a);
}
inline Jet1 operator/(const Jet1& a, const Jet1& b) { return a * reciprocal(b); }

inline Jet1 div(const Jet1& a, const Jet1& b, double eps_div) {
  return a * reciprocal(b, eps_div);
}

inline Jet1 powi(const Jet1& a, long n, double eps_div = kDefaultEpsDiv) {
  if (n < 0) return reciprocal(powi(a, -n), eps_div);
  Jet1 r = Jet1::constant(1.0, a.order());
  Jet1 base = a;
  for (long e = n; e > 0; e >>= 1) {
    if (e & 1) r = r * base;
    if (e > 1) base = base * base;
  }
  return r;
}

/// d/d(eps): one derivative of the displaced function; order drops by one.
inline Jet1 derivative(const Jet1& a) {
  const int m = a.order();
  if (m == 0)
    throw GuardError(Guard::order, "derivative of order-0 jet");
  Jet1 r = Jet1::constant(0.0, m - 1);
  for (int k = 0; k < m; ++k) r.c[k] = (k + 1) * a.c[k + 1];
  return r;
}

/// True k-th derivative (factorial restored).
inline double extract_derivative(const Jet1& a, int k) {
  if (k < 0 || k > a.order())
    throw GuardError(Guard::order, "derivative index exceeds jet order");
  return jet_detail::factorial(k) * a.c[static_cast<size_t>(k)];
}

// ---------------------------------------------------------------------------
// Jet2: f(x1 + eps1, x2 + eps2), coefficients on the triangle a+b <= order.
// ---------------------------------------------------------------------------

struct Jet2 {
  int m = 0;              // order
  std::vector<double> c;  // c[idx(a,b)] = (1/(a! b!)) d1^a d2^b f

  static int idx(int a, int b) {
    const int d = a + b;
    return d * (d + 1) / 2 + b;
  }
  static size_t size_for(int m) { return static_cast<size_t>((m + 1) * (m + 2) / 2); }

  Jet2() : m(0), c(1, 0.0) {}
  Jet2(int order, std::vector<double> coeffs) : m(order), c(std::move(coeffs)) {}

  int order() const { return m; }
  double value() const { return c[0]; }
  double at(int a, int b) const { return c[static_cast<size_t>(idx(a, b))]; }

  static Jet2 constant(double v, int m) {
    Jet2 j;
    j.m = m;
    j.c.assign(size_for(m), 0.0);
    j.c[0] = v;
    return j;
  }

  /// Seeds coordinate `axis` (0 or 1) as the displaced variable.
  static Jet2 variable(double v, int axis, int m) {
    Jet2 j = constant(v, m);
    if (m >= 1) j.c[static_cast<size_t>(axis == 0 ? idx(1, 0) : idx(0, 1))] = 1.0;
    return j;
  }

  Jet2 with_order(int mo) const {
    Jet2 j = constant(0.0, mo);
    const int n = std::min(mo, m);
    for (int d = 0; d <= n; ++d)
      for (int b = 0; b <= d; ++b) j.c[static_cast<size_t>(idx(d - b, b))] = at(d - b, b);
    return j;
  }
};

inline int common_order(const Jet2& a, const Jet2& b) { return a.m < b.m ? a.m : b.m; }

inline Jet2 operator+(const Jet2& a, const Jet2& b) {
  const int m = common_order(a, b);
  Jet2 r = Jet2::constant(0.0, m);
  for (int d = 0; d <= m; ++d)
    for (int bb = 0; bb <= d; ++bb) {
      const int i = Jet2::idx(d - bb, bb);
      r.c[static_cast<size_t>(i)] = a.c[static_cast<size_t>(i)] + b.c[static_cast<size_t>(i)];
    }
  return r;
}

inline Jet2 operator-(const Jet2& a, const Jet2& b) {
  const int m = common_order(a, b);
  Jet2 r = Jet2::constant(0.0, m);
  for (int d = 0; d <= m; ++d)
    for (int bb = 0; bb <= d; ++bb) {
      const int i = Jet2::idx(d - bb, bb);
      r.c[static_cast<size_t>(i)] = a.c[static_cast<size_t>(i)] - b.c[static_cast<size_t>(i)];
    }
  return r;
}

inline Jet2 operator-(const Jet2& a) {
  Jet2 r = a;
  for (auto& x : r.c) x = -x;
  return r;
}

inline Jet2 operator*(const Jet2& a, const Jet2& b) {
  const int m = common_order(a, b);
  Jet2 r = Jet2::constant(0.0, m);
  for (int da = 0; da <= m; ++da)
    for (int ba = 0; ba <= da; ++ba) {
      const double av = a.c[static_cast<size_t>(Jet2::idx(da - ba, ba))];
      if (av == 0.0) continue;
      for (int db = 0; da + db <= m; ++db)
        for (int bb = 0; bb <= db; ++bb) {
          const double bv = b.c[static_cast<size_t>(Jet2::idx(db - bb, bb))];
          if (bv == 0.0) continue;
          r.c[static_cast<size_t>(Jet2::idx(da - ba + db - bb, ba + bb))] += av * bv;
        }
    }
  return r;
}

inline Jet2 operator*(double s, const Jet2& a) {
  Jet2 r = a;
  for (auto& x : r.c) x *= s;
  return r;
}

inline Jet2 compose(const std::vector<double>& g, const Jet2& a) {
  Jet2 w = a;
  w.c[0] = 0.0;
  Jet2 r = Jet2::constant(g[static_cast<size_t>(a.m)], a.m);
  for (int k = a.m - 1; k >= 0; --k) {
    r = r * w;
    r.c[0] += g[static_cast<size_t>(k)];
  }
  return r;
}

inline Jet2 exp(const Jet2& a) {
  return compose(jet_detail::outer_series(jet_detail::Fn::exp, a.value(), a.m, 0.0), a);
}
inline Jet2 log(const Jet2& a, double eps_div = kDefaultEpsDiv) {
  return compose(jet_detail::outer_series(jet_detail::Fn::log, a.value(), a.m, eps_div), a);
}
inline Jet2 sin(const Jet2& a) {
  return compose(jet_detail::outer_series(jet_detail::Fn::sin, a.value(), a.m, 0.0), a);
}
inline Jet2 cos(const Jet2& a) {
  return compose(jet_detail::outer_series(jet_detail::Fn::cos, a.value(), a.m, 0.0), a);
}
inline Jet2 sqrt(const Jet2& a, double eps_div = kDefaultEpsDiv) {
  return compose(jet_detail::outer_series(jet_detail::Fn::sqrt, a.value(), a.m, eps_div), a);
}
inline Jet2 reciprocal(const Jet2& a, double eps_div = kDefaultEpsDiv) {
  return compose(jet_detail::outer_series(jet_detail::Fn::recip, a.value(), a.m, eps_div), a);
}
inline Jet2 operator/(const Jet2& a, const Jet2& b) { return a * reciprocal(b); }

inline Jet2 div(const Jet2& a, const Jet2& b, double eps_div) {
  return a * reciprocal(b, eps_div);
}

inline Jet2 powi(const Jet2& a, long n, double eps_div = kDefaultEpsDiv) {
  if (n < 0) return reciprocal(powi(a, -n), eps_div);
  Jet2 r = Jet2::constant(1.0, a.m);
  Jet2 base = a;
  for (long e = n; e > 0; e >>= 1) {
    if (e & 1) r = r * base;
    if (e > 1) base = base * base;
  }
  return r;
}

/// d/d(eps_axis); order drops by one.
inline Jet2 derivative(const Jet2& a, int axis) {
  if (a.m == 0)
    throw GuardError(Guard::order, "derivative of order-0 jet");
  Jet2 r = Jet2::constant(0.0, a.m - 1);
  for (int d = 0; d <= a.m - 1; ++d)
    for (int b = 0; b <= d; ++b) {
      const int aa = d - b;
      if (axis == 0)
        r.c[static_cast<size_t>(Jet2::idx(aa, b))] = (aa + 1) * a.at(aa + 1, b);
      else
        r.c[static_cast<size_t>(Jet2::idx(aa, b))] = (b + 1) * a.at(aa, b + 1);
    }
  return r;
}

inline double extract_derivative(const Jet2& a, int i, int j) {
  if (i < 0 || j < 0 || i + j > a.m)
    throw GuardError(Guard::order, "derivative index exceeds jet order");
  return jet_detail::factorial(i) * jet_detail::factorial(j) * a.at(i, j);
}

}  // namespace solbranch
