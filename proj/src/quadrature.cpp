#include "solbranch/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace solbranch {

namespace {

// QUADPACK G7-K15 abscissae/weights on [-1, 1].
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double gauss = fc * kWg[3];
  double kron = fc * kWgk[7];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXgk[i];
    const double fsum = f(c - dx) + f(c + dx);
    kron += fsum * kWgk[i];
    if (i % 2 == 1) gauss += fsum * kWg[i / 2];
  }
  return {a, b, kron * h, std::abs(kron - gauss) * h};
}

void refine(const std::function<double(double)>& f, const Panel& p, double tol_for_panel,
            double global_scale, int depth, int max_depth, double& value, double& err) {
  if (p.error <= tol_for_panel || p.error <= 1e-16 * global_scale || depth >= max_depth) {
    value += p.value;
    err += p.error;
    return;
  }
  const double mid = 0.5 * (p.a + p.b);
  const Panel left = gk15(f, p.a, mid);
  const Panel right = gk15(f, mid, p.b);
  refine(f, left, 0.5 * tol_for_panel, global_scale, depth + 1, max_depth, value, err);
  refine(f, right, 0.5 * tol_for_panel, global_scale, depth + 1, max_depth, value, err);
}

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double rel_tol, double abs_tol, int max_depth) {
  if (a == b) return {0.0, 0.0};
  const Panel whole = gk15(f, a, b);
  const double scale = std::max(std::abs(whole.value), 1e-300);
  const double tol = std::max(abs_tol, rel_tol * scale);
  double value = 0.0, err = 0.0;
  refine(f, whole, tol, scale, 0, max_depth, value, err);
  const double final_tol = std::max(abs_tol, rel_tol * std::abs(value));
  if (err > 4.0 * final_tol && err > 1e-13)
    throw QuadratureError("adaptive quadrature did not converge",
                          err / std::max(std::abs(value), 1e-300));
  return {value, err};
}

namespace {

GaussRule compute_legendre(int n) {
  GaussRule r;
  r.nodes.resize(static_cast<size_t>(n));
  r.weights.resize(static_cast<size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.nodes[static_cast<size_t>(i)] = -x;
    r.nodes[static_cast<size_t>(n - 1 - i)] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weights[static_cast<size_t>(i)] = w;
    r.weights[static_cast<size_t>(n - 1 - i)] = w;
  }
  return r;
}

GaussRule compute_hermite(int n) {
  GaussRule r;
  r.nodes.resize(static_cast<size_t>(n));
  r.weights.resize(static_cast<size_t>(n));
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  double x = 0.0;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    if (i == 0)
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    else if (i == 1)
      x -= 1.14 * std::pow(static_cast<double>(n), 0.426) / x;
    else if (i == 2)
      x = 1.86 * x - 0.86 * r.nodes[static_cast<size_t>(n - 1)];
    else if (i == 3)
      x = 1.91 * x - 0.91 * r.nodes[static_cast<size_t>(n - 2)];
    else
      x = 2.0 * x - r.nodes[static_cast<size_t>(n - i + 1)];

    double pp = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double p0 = pim4, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = x * std::sqrt(2.0 / (j + 1.0)) * p1 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p2;
      }
      pp = std::sqrt(2.0 * n) * p1;
      const double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-14) break;
    }
    r.nodes[static_cast<size_t>(n - 1 - i)] = x;
    r.nodes[static_cast<size_t>(i)] = -x;
    const double w = 2.0 / (pp * pp);
    r.weights[static_cast<size_t>(n - 1 - i)] = w;
    r.weights[static_cast<size_t>(i)] = w;
  }
  return r;
}

template <typename F>
const GaussRule& cached_rule(std::map<int, GaussRule>& cache, std::mutex& mtx, int n, F compute) {
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute(n)).first;
  return it->second;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  return cached_rule(cache, mtx, n, compute_legendre);
}

const GaussRule& gauss_hermite(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mtx;
  return cached_rule(cache, mtx, n, compute_hermite);
}

double gaussian_expectation(const std::function<double(double)>& f, double x, double sigma,
                            int n_nodes) {
  if (sigma == 0.0) return f(x);
  const GaussRule& gh = gauss_hermite(n_nodes);
  const double scale = sigma * M_SQRT2;
  double sum = 0.0;
  for (size_t i = 0; i < gh.nodes.size(); ++i) sum += gh.weights[i] * f(x + scale * gh.nodes[i]);
  return sum / std::sqrt(M_PI);
}

}  // namespace solbranch
