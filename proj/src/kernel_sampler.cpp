#include "solbranch/kernel_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "solbranch/quadrature.hpp"

namespace solbranch {

double Vec2::norm() const { return std::hypot(x1, x2); }

double log_kernel(Vec2 u) { return std::log(u.norm()) / (2.0 * M_PI); }

double log_kernel_grad(Vec2 u, int axis) {
  const double r2 = u.x1 * u.x1 + u.x2 * u.x2;
  return (axis == 0 ? u.x1 : u.x2) / (2.0 * M_PI * r2);
}

WeightFn WeightFn::from_name(const std::string& name) {
  if (name == "abs-exp") return WeightFn(Kind::abs_exp);
  if (name == "gaussian") return WeightFn(Kind::gaussian);
  throw std::invalid_argument("unknown kernel weight '" + name + "' (abs-exp, gaussian)");
}

const char* WeightFn::name() const {
  return kind_ == Kind::abs_exp ? "abs-exp" : "gaussian";
}

double WeightFn::radial(double u) const {
  switch (kind_) {
    case Kind::abs_exp:
      return u * std::exp(-u);
    case Kind::gaussian:
      return std::exp(-0.5 * u * u);
  }
  return 0.0;
}

double WeightFn::sup() const {
  return kind_ == Kind::abs_exp ? std::exp(-1.0) : 1.0;
}

double WeightFn::env_amplitude() const {
  // abs_exp: u e^{-u} <= (2/e) e^{-u/2};  gaussian: e^{-u^2/2} <= e^{1/8} e^{-u/2}
  return kind_ == Kind::abs_exp ? 2.0 * std::exp(-1.0) : std::exp(0.125);
}

double WeightFn::env_rate() const { return 0.5; }

double WeightFn::dlog(Vec2 x, int axis) const {
  const double u = x.norm();
  const double xi = axis == 0 ? x.x1 : x.x2;
  switch (kind_) {
    case Kind::abs_exp:
      // log h = log|x| - |x|
      return xi / (u * u) - xi / u;
    case Kind::gaussian:
      return -xi;
  }
  return 0.0;
}

KernelSampler::KernelSampler(WeightFn h, double quad_rel_tol)
    : h_(h), rel_tol_(quad_rel_tol) {}

namespace {

std::uint64_t position_key(Vec2 x) {
  // 1e-9 positional resolution
  const auto q1 = static_cast<std::int64_t>(std::llround(x.x1 * 1e9));
  const auto q2 = static_cast<std::int64_t>(std::llround(x.x2 * 1e9));
  std::uint64_t h = static_cast<std::uint64_t>(q1) * 0x9E3779B97F4A7C15ull;
  h ^= static_cast<std::uint64_t>(q2) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
  return h;
}

Vec2 unit(double alpha) { return {std::cos(alpha), std::sin(alpha)}; }

}  // namespace

KernelNormalizations KernelSampler::normalizations(Vec2 x) const {
  const std::uint64_t key = position_key(x);
  {
    std::shared_lock lock(cache_mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  const KernelNormalizations result = compute(x);
  {
    std::unique_lock lock(cache_mutex_);
    cache_[key] = result;  // idempotent: every writer computes the same value
  }
  return result;
}

KernelNormalizations KernelSampler::compute(Vec2 x) const {
  // Angular moments of h around x at separation rho, by per-quadrant Gauss
  // panels (|cos|, |sin| kink only at the quadrant boundaries). The inner
  // angular integrand is smooth except at rho = |x| where the circle crosses
  // the origin of h; that shows up as a single weak radial singularity the
  // adaptive outer integral refines around.
  enum class Moment { plain, abs_cos, abs_sin };
  // Panel boundaries: the |cos|/|sin| kinks plus the back-direction angle,
  // where the circle around x passes closest to the origin of h.
  std::vector<double> bounds{0.0, 0.5 * M_PI, M_PI, 1.5 * M_PI, 2.0 * M_PI};
  if (x.norm() > 0.0) {
    double astar = std::atan2(-x.x2, -x.x1);
    if (astar < 0.0) astar += 2.0 * M_PI;
    bounds.push_back(astar);
    std::sort(bounds.begin(), bounds.end());
  }
  const auto angular = [&](double rho, Moment m) {
    const GaussRule& rule = gauss_legendre(16);
    double sum = 0.0;
    for (size_t p = 0; p + 1 < bounds.size(); ++p) {
      const double a = bounds[p], b = bounds[p + 1];
      if (b - a < 1e-14) continue;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double alpha = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
        const double w = 0.5 * (b - a) * rule.weights[i];
        const double hval = h_.radial((x + rho * unit(alpha)).norm());
        switch (m) {
          case Moment::plain:
            sum += w * hval;
            break;
          case Moment::abs_cos:
            sum += w * std::abs(std::cos(alpha)) * hval;
            break;
          case Moment::abs_sin:
            sum += w * std::abs(std::sin(alpha)) * hval;
            break;
        }
      }
    }
    return sum;
  };

  const double r_star = x.norm();        // kink radius of the angular moments
  const double r_cut = r_star + 60.0;    // h tail is below 1e-20 past this

  // Radial integrals, split at the kink radius so the adaptive rule refines
  // a clean endpoint instead of an interior spike.
  const auto radial = [&](const std::function<double(double)>& f, double lo, double hi) {
    double total = 0.0;
    double a = lo;
    if (r_star > lo && r_star < hi) {
      total += integrate(f, a, r_star, rel_tol_ * 0.1, 1e-16, 52).value;
      a = r_star;
    }
    total += integrate(f, a, hi, rel_tol_ * 0.1, 1e-16, 52).value;
    return total;
  };

  // N: |log rho| rho weight; the (0,1) part under rho = e^{-v} removes the
  // log singularity at the branch point itself (kink at v = -log r_star).
  const auto core_integrand = [&](double v) {
    const double rho = std::exp(-v);
    return v * std::exp(-2.0 * v) * angular(rho, Moment::plain);
  };
  double n_core = 0.0;
  const double v_star = r_star > 0.0 && r_star < 1.0 ? -std::log(r_star) : -1.0;
  if (v_star > 0.0 && v_star < 45.0) {
    n_core = integrate(core_integrand, 0.0, v_star, rel_tol_ * 0.1, 1e-16, 52).value +
             integrate(core_integrand, v_star, 45.0, rel_tol_ * 0.1, 1e-16, 52).value;
  } else {
    n_core = integrate(core_integrand, 0.0, 45.0, rel_tol_ * 0.1, 1e-16, 52).value;
  }
  const double n_tail = radial(
      [&](double rho) { return std::log(rho) * rho * angular(rho, Moment::plain); }, 1.0, r_cut);
  const double n1 =
      radial([&](double rho) { return angular(rho, Moment::abs_cos); }, 0.0, r_cut);
  const double n2 =
      radial([&](double rho) { return angular(rho, Moment::abs_sin); }, 0.0, r_cut);

  const double inv2pi = 1.0 / (2.0 * M_PI);
  KernelNormalizations result;
  result.n = (n_core + n_tail) * inv2pi;
  result.n1 = n1 * inv2pi;
  result.n2 = n2 * inv2pi;
  result.n_delta = result.n + h_(x);
  return result;
}

namespace {

// Inverse CDF of the density 4 rho (-log rho) on (0, 1):
// F(r) = r^2 (1 - 2 log r), solved by bisection-safeguarded Newton.
double sample_core_radius(double u) {
  double lo = 0.0, hi = 1.0, r = std::sqrt(u);
  for (int it = 0; it < 80; ++it) {
    const double f = r * r * (1.0 - 2.0 * std::log(r)) - u;
    if (f > 0)
      hi = r;
    else
      lo = r;
    const double df = -4.0 * r * std::log(r);
    double step = df != 0.0 ? r - f / df : 0.5 * (lo + hi);
    if (!(step > lo && step < hi)) step = 0.5 * (lo + hi);
    if (std::abs(step - r) < 1e-15) return step;
    r = step;
  }
  return r;
}

constexpr int kMaxProposals = 1000000;

}  // namespace

KernelDraw KernelSampler::sample_log_density(RngStream& s, Vec2 x) const {
  // Unnormalized target over (rho, alpha): |log rho| H(|x + rho e|) rho / 2pi.
  // Piece 1 (rho < 1): envelope H_sup rho (-log rho), exact inverse CDF.
  // Piece 2 (rho > 1): envelope A rho^2 e^{-b rho} with A = env_amp e^{b|x|},
  // using log rho <= rho and H(|x + rho e|) <= env_amp e^{-b(rho - |x|)}.
  const double b = h_.env_rate();
  const double amp = h_.env_amplitude() * std::exp(b * x.norm());
  const double mass1 = h_.sup() * 0.25;
  const double mass2 = amp * std::exp(-b) * (1.0 / b + 2.0 / (b * b) + 2.0 / (b * b * b));

  for (int attempt = 0; attempt < kMaxProposals; ++attempt) {
    double rho, envelope;
    if (s.uniform() * (mass1 + mass2) < mass1) {
      rho = sample_core_radius(s.uniform_pos());
      envelope = h_.sup() * rho * (-std::log(rho));
    } else {
      // Gamma(3, b) restricted to rho > 1
      do {
        rho = -(std::log(s.uniform_pos()) + std::log(s.uniform_pos()) +
                std::log(s.uniform_pos())) /
              b;
      } while (rho <= 1.0);
      envelope = amp * rho * rho * std::exp(-b * rho);
    }
    const double alpha = 2.0 * M_PI * s.uniform();
    const double target = std::abs(std::log(rho)) * h_.radial((x + rho * unit(alpha)).norm()) * rho;
    if (s.uniform() * envelope < target)
      return {x + rho * unit(alpha), rho < 1.0 ? -1 : 1, false};
  }
  throw std::runtime_error("kernel rejection sampler exhausted its proposal budget (rho)");
}

KernelDraw KernelSampler::sample_grad_density(RngStream& s, Vec2 x, int axis) const {
  // Unnormalized target over (rho, alpha): |e_axis(alpha)| H(|x + rho e|)/2pi.
  // Envelope in rho: min(H_sup, env e^{-b(rho-|x|)}) as a flat piece up to
  // rho*, then a shifted exponential.
  const double b = h_.env_rate();
  const double amp = h_.env_amplitude() * std::exp(b * x.norm());
  const double rho_star = std::max(0.0, x.norm() + std::log(h_.env_amplitude() / h_.sup()) / b);
  const double mass1 = h_.sup() * rho_star;
  const double mass2 = (amp / b) * std::exp(-b * rho_star);

  for (int attempt = 0; attempt < kMaxProposals; ++attempt) {
    double rho, envelope;
    if (s.uniform() * (mass1 + mass2) < mass1) {
      rho = rho_star * s.uniform_pos();
      envelope = h_.sup();
    } else {
      rho = rho_star - std::log(s.uniform_pos()) / b;
      envelope = amp * std::exp(-b * rho);
    }
    const double alpha = 2.0 * M_PI * s.uniform();
    const double trig = axis == 0 ? std::cos(alpha) : std::sin(alpha);
    const double target = std::abs(trig) * h_.radial((x + rho * unit(alpha)).norm());
    if (s.uniform() * envelope < target) {
      // dK/dx_axis at separation x - y = -rho e(alpha) has the sign of -trig
      return {x + rho * unit(alpha), trig < 0.0 ? 1 : -1, false};
    }
  }
  throw std::runtime_error("kernel rejection sampler exhausted its proposal budget (grad)");
}

KernelDraw KernelSampler::sample(RngStream& s, Vec2 x, KernelDensity which) const {
  switch (which) {
    case KernelDensity::rho:
      return sample_log_density(s, x);
    case KernelDensity::rho_1:
      return sample_grad_density(s, x, 0);
    case KernelDensity::rho_2:
      return sample_grad_density(s, x, 1);
    case KernelDensity::rho_delta: {
      const KernelNormalizations norms = normalizations(x);
      if (s.uniform() * norms.n_delta < h_(x)) return {x, 1, true};
      return sample_log_density(s, x);
    }
  }
  throw std::logic_error("unreachable kernel density");
}

double KernelSampler::density(Vec2 x, Vec2 y, KernelDensity which) const {
  const KernelNormalizations norms = normalizations(x);
  const Vec2 d{x.x1 - y.x1, x.x2 - y.x2};
  switch (which) {
    case KernelDensity::rho:
      return std::abs(log_kernel(d)) * h_(y) / norms.n;
    case KernelDensity::rho_delta:
      return std::abs(log_kernel(d)) * h_(y) / norms.n_delta;
    case KernelDensity::rho_1:
      return std::abs(log_kernel_grad(d, 0)) * h_(y) / norms.n1;
    case KernelDensity::rho_2:
      return std::abs(log_kernel_grad(d, 1)) * h_(y) / norms.n2;
  }
  throw std::logic_error("unreachable kernel density");
}

}  // namespace solbranch
