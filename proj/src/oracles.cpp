#include "solbranch/oracles.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "solbranch/quadrature.hpp"

namespace solbranch {

// ---------------------------------------------------------------------------
// Characteristics solution of the linear system (D = nu).
// ---------------------------------------------------------------------------

std::pair<double, double> soledge_characteristics_exact(const SoledgeParams& params, int m,
                                                        const Expr& radial_profile, double r,
                                                        double theta, double t) {
  if (params.D != params.nu)
    throw std::invalid_argument("characteristics solution requires D = nu");
  const double heat = gaussian_expectation(
      [&](double rr) { return eval_scalar(radial_profile, {rr}); }, r,
      std::sqrt(2.0 * params.D * t));
  const double phase = m * t / params.q;
  return {heat * std::cos(m * theta) * std::cos(phase),
          heat * std::sin(m * theta) * std::sin(phase)};
}

// ---------------------------------------------------------------------------
// Method-of-lines finite differences, RK4.
// ---------------------------------------------------------------------------

double FdSolution::at(const std::vector<double>& field, double r, double theta) const {
  const int ir = static_cast<int>(std::lround((r - grid.r_min) / dr()));
  double th = std::fmod(theta, 2.0 * M_PI);
  if (th < 0) th += 2.0 * M_PI;
  const int it = static_cast<int>(std::lround(th / dtheta())) % grid.ntheta;
  if (ir < 0 || ir >= grid.nr) throw std::invalid_argument("probe point outside the r grid");
  return field[static_cast<size_t>(ir) * grid.ntheta + it];
}

namespace {

struct FdWorkspace {
  const SoledgeParams& params;
  const Grid2& grid;
  int chi;
  double dr, dtheta;

  // 4th-order central periodic theta derivative
  void dtheta_central(const std::vector<double>& f, std::vector<double>& out) const {
    const int nt = grid.ntheta;
    const double c = 1.0 / (12.0 * dtheta);
    for (int i = 0; i < grid.nr; ++i) {
      const double* row = f.data() + static_cast<size_t>(i) * nt;
      double* orow = out.data() + static_cast<size_t>(i) * nt;
      for (int j = 0; j < nt; ++j) {
        const int jp1 = (j + 1) % nt, jp2 = (j + 2) % nt;
        const int jm1 = (j + nt - 1) % nt, jm2 = (j + nt - 2) % nt;
        orow[j] = c * (-row[jp2] + 8.0 * row[jp1] - 8.0 * row[jm1] + row[jm2]);
      }
    }
  }

  // 2nd-order radial Laplacian, zero-gradient ends (domain wide enough that
  // the boundary influence at the probes is negligible)
  void d2r_central(const std::vector<double>& f, std::vector<double>& out) const {
    const int nt = grid.ntheta;
    const double c = 1.0 / (dr * dr);
    for (int i = 0; i < grid.nr; ++i) {
      const int im = i > 0 ? i - 1 : 1;
      const int ip = i < grid.nr - 1 ? i + 1 : grid.nr - 2;
      for (int j = 0; j < nt; ++j) {
        out[static_cast<size_t>(i) * nt + j] =
            c * (f[static_cast<size_t>(ip) * nt + j] - 2.0 * f[static_cast<size_t>(i) * nt + j] +
                 f[static_cast<size_t>(im) * nt + j]);
      }
    }
  }

  void rhs(const std::vector<double>& density, const std::vector<double>& momentum,
           std::vector<double>& d_density, std::vector<double>& d_momentum,
           std::vector<double>& scratch_a, std::vector<double>& scratch_b) const {
    const size_t n = density.size();
    if (chi == 0) {
      // dN/dt = -(1/q) dtheta Gamma + D d2r N
      dtheta_central(momentum, scratch_a);
      d2r_central(density, d_density);
      for (size_t i = 0; i < n; ++i)
        d_density[i] = params.D * d_density[i] - scratch_a[i] / params.q;
      // dGamma/dt = -(1/q) dtheta (Gamma^2/N + N) + nu d2r Gamma
      for (size_t i = 0; i < n; ++i)
        scratch_b[i] = momentum[i] * momentum[i] / density[i] + density[i];
      dtheta_central(scratch_b, scratch_a);
      d2r_central(momentum, d_momentum);
      for (size_t i = 0; i < n; ++i)
        d_momentum[i] = params.nu * d_momentum[i] - scratch_a[i] / params.q;
    } else {
      dtheta_central(momentum, scratch_a);
      d2r_central(density, d_density);
      for (size_t i = 0; i < n; ++i)
        d_density[i] =
            params.D * d_density[i] - scratch_a[i] / params.q - density[i] / params.eta;
      d2r_central(momentum, d_momentum);
      for (size_t i = 0; i < n; ++i)
        d_momentum[i] =
            params.nu * d_momentum[i] - (momentum[i] - params.Gamma0) / params.eta;
    }
  }
};

}  // namespace

FdSolution soledge_fd_solve(const SoledgeParams& params, const Expr& init_density,
                            const Expr& init_momentum, const Grid2& grid, double t, int chi) {
  FdSolution sol;
  sol.grid = grid;
  const int nt = grid.ntheta, nr = grid.nr;
  const size_t n = static_cast<size_t>(nr) * nt;
  sol.density.resize(n);
  sol.momentum.resize(n);
  const double dr = sol.dr(), dth = sol.dtheta();

  for (int i = 0; i < nr; ++i) {
    const double r = grid.r_min + i * dr;
    for (int j = 0; j < nt; ++j) {
      const double theta = j * dth;
      sol.density[static_cast<size_t>(i) * nt + j] = eval_scalar(init_density, {r, theta});
      sol.momentum[static_cast<size_t>(i) * nt + j] = eval_scalar(init_momentum, {r, theta});
    }
  }
  if (t == 0.0) return sol;

  const double max_diff = std::max(params.D, params.nu);
  const double diffusion_limit =
      max_diff > 0 ? 0.4 * dr * dr / (2.0 * max_diff) : std::numeric_limits<double>::infinity();
  const double advection_limit = 0.5 * params.q * dth;
  const double dt_stable = std::min(diffusion_limit, advection_limit);
  const int steps = static_cast<int>(std::ceil(t / std::min(grid.dt, dt_stable)));
  const double dt = t / steps;
  if (dt > dt_stable)
    throw std::runtime_error("fd solver: requested step violates the stability bound");

  FdWorkspace ws{params, grid, chi, dr, dth};
  std::vector<double> k1n(n), k1g(n), k2n(n), k2g(n), k3n(n), k3g(n), k4n(n), k4g(n);
  std::vector<double> tn(n), tg(n), sa(n), sb(n);

  for (int step = 0; step < steps; ++step) {
    ws.rhs(sol.density, sol.momentum, k1n, k1g, sa, sb);
    for (size_t i = 0; i < n; ++i) {
      tn[i] = sol.density[i] + 0.5 * dt * k1n[i];
      tg[i] = sol.momentum[i] + 0.5 * dt * k1g[i];
    }
    ws.rhs(tn, tg, k2n, k2g, sa, sb);
    for (size_t i = 0; i < n; ++i) {
      tn[i] = sol.density[i] + 0.5 * dt * k2n[i];
      tg[i] = sol.momentum[i] + 0.5 * dt * k2g[i];
    }
    ws.rhs(tn, tg, k3n, k3g, sa, sb);
    for (size_t i = 0; i < n; ++i) {
      tn[i] = sol.density[i] + dt * k3n[i];
      tg[i] = sol.momentum[i] + dt * k3g[i];
    }
    ws.rhs(tn, tg, k4n, k4g, sa, sb);
    for (size_t i = 0; i < n; ++i) {
      sol.density[i] += dt / 6.0 * (k1n[i] + 2 * k2n[i] + 2 * k3n[i] + k4n[i]);
      sol.momentum[i] += dt / 6.0 * (k1g[i] + 2 * k2g[i] + 2 * k3g[i] + k4g[i]);
    }
    if (step % 128 == 0) {
      for (size_t i = 0; i < n; ++i)
        if (!std::isfinite(sol.density[i]) || std::abs(sol.density[i]) > 1e10)
          throw std::runtime_error("fd solver: field norm blew up (instability)");
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Picard iterates of the backward SOLEDGE equations.
// ---------------------------------------------------------------------------

namespace {

struct SoledgePicard {
  const SoledgeParams& params;
  const Expr& init_density;
  const Expr& init_momentum;
  double theta;
  double rel_tol;

  // theta-jet of the heat-propagated initial field at radius r
  Jet1 free_jet(const Expr& field, double diffusivity, double u, double r, int order,
                int nodes = 40) const {
    const double sigma = std::sqrt(2.0 * diffusivity * u);
    if (sigma == 0.0) {
      const std::vector<Jet1> bindings{Jet1::constant(r, order), Jet1::variable(theta, order)};
      return eval_jet(field, bindings);
    }
    const GaussRule& gh = gauss_hermite(nodes);
    Jet1 acc = Jet1::constant(0.0, order);
    const double scale = sigma * M_SQRT2;
    for (size_t i = 0; i < gh.nodes.size(); ++i) {
      const std::vector<Jet1> bindings{Jet1::constant(r + scale * gh.nodes[i], order),
                                       Jet1::variable(theta, order)};
      acc = acc + gh.weights[i] * eval_jet(field, bindings);
    }
    return (1.0 / std::sqrt(M_PI)) * acc;
  }

  // d/dtheta of {Gamma^2/N + N} built from depth-0 fields at (u, r)
  Jet1 bracket_depth0(double u, double r, int order, int nodes = 40) const {
    const Jet1 gamma = free_jet(init_momentum, params.nu, u, r, order + 1, nodes);
    const Jet1 density = free_jet(init_density, params.D, u, r, order + 1, nodes);
    return derivative(gamma * gamma / density + density);
  }

  Jet1 gauss_jet(const std::function<Jet1(double)>& f, double r, double sigma, int order,
                 int nodes = 40) const {
    if (sigma == 0.0) return f(r);
    const GaussRule& gh = gauss_hermite(nodes);
    Jet1 acc = Jet1::constant(0.0, order);
    const double scale = sigma * M_SQRT2;
    for (size_t i = 0; i < gh.nodes.size(); ++i)
      acc = acc + gh.weights[i] * f(r + scale * gh.nodes[i]);
    return (1.0 / std::sqrt(M_PI)) * acc;
  }

  double density_depth1(double r, double t) const {
    const double free_term = free_jet(init_density, params.D, t, r, 0).value();
    // integrand at elapsed tau: the two heats compose into one Gaussian
    const auto integrand = [&](double tau) {
      const double var = 2.0 * params.D * tau + 2.0 * params.nu * (t - tau);
      const double sigma = std::sqrt(var);
      return gaussian_expectation(
          [&](double rr) {
            const std::vector<Jet1> b{Jet1::constant(rr, 1), Jet1::variable(theta, 1)};
            return extract_derivative(eval_jet(init_momentum, b), 1);
          },
          r, sigma);
    };
    return free_term - integrate(integrand, 0.0, t, rel_tol).value / params.q;
  }

  double momentum_depth1(double r, double t) const {
    const double free_term = free_jet(init_momentum, params.nu, t, r, 0).value();
    const auto integrand = [&](double tau) {
      return gauss_jet([&](double rr) { return bracket_depth0(t - tau, rr, 0); }, r,
                       std::sqrt(2.0 * params.nu * tau), 0)
          .value();
    };
    return free_term - integrate(integrand, 0.0, t, rel_tol).value / params.q;
  }

  // depth-1 iterates as order-m theta jets (needed inside depth 2)
  Jet1 momentum_depth1_jet(double r, double t, int order) const {
    Jet1 total = free_jet(init_momentum, params.nu, t, r, order, 20);
    const GaussRule& gl = gauss_legendre(12);
    Jet1 integral = Jet1::constant(0.0, order);
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      const double tau = 0.5 * t * (1.0 + gl.nodes[i]);
      const double w = 0.5 * t * gl.weights[i];
      integral = integral +
                 w * gauss_jet([&](double rr) { return bracket_depth0(t - tau, rr, order, 20); },
                               r, std::sqrt(2.0 * params.nu * tau), order, 20);
    }
    return total - (1.0 / params.q) * integral;
  }

  Jet1 density_depth1_jet(double r, double t, int order) const {
    Jet1 total = free_jet(init_density, params.D, t, r, order, 20);
    const GaussRule& gl = gauss_legendre(12);
    Jet1 integral = Jet1::constant(0.0, order);
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
      const double tau = 0.5 * t * (1.0 + gl.nodes[i]);
      const double w = 0.5 * t * gl.weights[i];
      integral =
          integral + w * gauss_jet(
                             [&](double rr) {
                               return derivative(free_jet(init_momentum, params.nu, t - tau, rr,
                                                          order + 1, 20));
                             },
                             r, std::sqrt(2.0 * params.D * tau), order, 20);
    }
    return total - (1.0 / params.q) * integral;
  }

  double density_depth2(double r, double t) const {
    const double free_term = free_jet(init_density, params.D, t, r, 0).value();
    const auto integrand = [&](double tau) {
      return gauss_jet([&](double rr) { return derivative(momentum_depth1_jet(rr, t - tau, 1)); },
                       r, std::sqrt(2.0 * params.D * tau), 0, 24)
          .value();
    };
    return free_term - integrate(integrand, 0.0, t, rel_tol, 1e-12, 8).value / params.q;
  }

  double momentum_depth2(double r, double t) const {
    const double free_term = free_jet(init_momentum, params.nu, t, r, 0).value();
    const auto integrand = [&](double tau) {
      return gauss_jet(
                 [&](double rr) {
                   const Jet1 gamma = momentum_depth1_jet(rr, t - tau, 1);
                   const Jet1 density = density_depth1_jet(rr, t - tau, 1);
                   return derivative(gamma * gamma / density + density);
                 },
                 r, std::sqrt(2.0 * params.nu * tau), 0, 24)
          .value();
    };
    return free_term - integrate(integrand, 0.0, t, rel_tol, 1e-12, 8).value / params.q;
  }
};

}  // namespace

std::pair<double, double> soledge_picard_iterate(const SoledgeParams& params,
                                                 const Expr& init_density,
                                                 const Expr& init_momentum, double r, double theta,
                                                 double t, int depth, double rel_tol) {
  if (depth < 1 || depth > 2)
    throw std::invalid_argument("soledge_picard_iterate: depth must be 1 or 2");
  SoledgePicard picard{params, init_density, init_momentum, theta, rel_tol};
  if (depth == 1) return {picard.density_depth1(r, t), picard.momentum_depth1(r, t)};
  return {picard.density_depth2(r, t), picard.momentum_depth2(r, t)};
}

// ---------------------------------------------------------------------------
// Gaussian-family fields: closed-form heat propagation.
// ---------------------------------------------------------------------------

double GaussianField::value(Vec2 x) const {
  const Vec2 d = x - center;
  return offset + amplitude * std::exp(-decay * (d.x1 * d.x1 + d.x2 * d.x2));
}

GaussianField GaussianField::heat(double diffusivity, double time) const {
  const double denom = 1.0 + 4.0 * decay * diffusivity * time;
  GaussianField out = *this;
  out.amplitude = amplitude / denom;
  out.decay = decay / denom;
  return out;
}

double GaussianField::d1(Vec2 x) const {
  const Vec2 d = x - center;
  return amplitude * std::exp(-decay * (d.x1 * d.x1 + d.x2 * d.x2)) * (-2.0 * decay * d.x1);
}

double GaussianField::d2(Vec2 x) const {
  const Vec2 d = x - center;
  return amplitude * std::exp(-decay * (d.x1 * d.x1 + d.x2 * d.x2)) * (-2.0 * decay * d.x2);
}

std::string GaussianField::expression() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.17g + %.17g*exp(-%.17g*((x1 - %.17g)^2 + (x2 - %.17g)^2))",
                offset, amplitude, decay, center.x1, center.x2);
  return buf;
}

// ---------------------------------------------------------------------------
// Depth-1 Picard iterate of the configuration-space system.
// ---------------------------------------------------------------------------

namespace {

struct TokamPicard {
  const TokamParams& params;
  const KernelSampler& sampler;
  const GaussianField& init_density;
  const GaussianField& init_vorticity;
  double rel_tol;

  double lambda() const { return params.branch_rate(); }

  // free fields: exp(-lambda u) times the heat-propagated initial data
  GaussianField density0(double u) const { return init_density.heat(params.D, u); }
  GaussianField vorticity0(double u) const { return init_vorticity.heat(params.nu, u); }

  // Kernel integrals of h * Omega0(., u) around z: the log kernel one and
  // the two gradient ones (which share their radial integral).
  struct KernelIntegrals {
    double k_psi;   // int K(z - y) h(y) Omega0(y, u) dy
    double d1_psi;  // int d1 K ...
    double d2_psi;  // int d2 K ...
  };

  KernelIntegrals kernel_integrals(Vec2 z, double u) const {
    const GaussianField om = vorticity0(u);
    const double decay_free = std::exp(-lambda() * u);
    const auto field = [&](Vec2 y) { return sampler.weight()(y) * om.value(y); };
    const double r_cut = z.norm() + 60.0;

    const auto radial_log = [&](double alpha) {
      const Vec2 e{std::cos(alpha), std::sin(alpha)};
      const double core = integrate(
                              [&](double v) {
                                const double rho = std::exp(-v);
                                return -v * field(z + rho * e) * std::exp(-2.0 * v);
                              },
                              0.0, 45.0, 1e-8, 1e-15)
                              .value;
      const double tail = integrate(
                              [&](double rho) { return std::log(rho) * field(z + rho * e) * rho; },
                              1.0, r_cut, 1e-8, 1e-15)
                              .value;
      return core + tail;  // log rho is negative on (0,1): core carries the sign
    };
    const auto radial_plain = [&](double alpha) {
      const Vec2 e{std::cos(alpha), std::sin(alpha)};
      return integrate([&](double rho) { return field(z + rho * e); }, 0.0, r_cut, 1e-8, 1e-15)
          .value;
    };

    double klog = 0.0, g1 = 0.0, g2 = 0.0;
    const GaussRule& rule = gauss_legendre(24);
    for (int quadrant = 0; quadrant < 4; ++quadrant) {
      const double a = quadrant * M_PI / 2.0, b = a + M_PI / 2.0;
      for (size_t i = 0; i < rule.nodes.size(); ++i) {
        const double alpha = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[i];
        const double w = 0.5 * (b - a) * rule.weights[i];
        klog += w * radial_log(alpha);
        const double plain = radial_plain(alpha);
        g1 += w * (-std::cos(alpha)) * plain;  // d1 K = -cos(alpha)/(2 pi rho)
        g2 += w * (-std::sin(alpha)) * plain;
      }
    }
    const double inv2pi = 1.0 / (2.0 * M_PI);
    return {decay_free * klog * inv2pi, decay_free * g1 * inv2pi, decay_free * g2 * inv2pi};
  }

  // Branch-point integrand for the density species.
  double braces_density(Vec2 z, double u) const {
    const GaussianField n0 = density0(u);
    const double decay_free = std::exp(-lambda() * u);
    const KernelIntegrals ki = kernel_integrals(z, u);

    double source = 0.0;
    if (params.source)
      source = eval_scalar(*params.source, {z.x1, z.x2, u});

    const double n_val = decay_free * n0.value(z);
    const double dn1 = decay_free * n0.d1(z);
    const double dn2 = decay_free * n0.d2(z);
    const double bracket = ki.d1_psi * dn2 - ki.d2_psi * dn1;  // {K Psi, n}
    const double series = -lambda() * n_val * (std::exp(-ki.k_psi) - 1.0);
    return (source - bracket + series) / lambda();
  }

  // Branch-point integrand for the vorticity species, with the h and log h
  // factors at the branching coordinates, exactly as the trees pick them up.
  double braces_vorticity(Vec2 z, double u) const {
    const GaussianField n0 = density0(u);
    const GaussianField om = vorticity0(u);
    const double decay_free = std::exp(-lambda() * u);
    const KernelIntegrals ki = kernel_integrals(z, u);
    const double hz = sampler.weight()(z);

    const double om_val = decay_free * om.value(z);
    const double dom1 = decay_free * om.d1(z);
    const double dom2 = decay_free * om.d2(z);
    const double n_val = decay_free * n0.value(z);
    const double dn2 = decay_free * n0.d2(z);

    const double kill = params.sigma * (1.0 - std::exp(params.Lambda)) / hz;
    const double delta_term = lambda() * (ki.k_psi / hz + om_val);
    const double kpsi = ki.k_psi;
    const double series = -lambda() * (std::exp(-kpsi) - 1.0 + kpsi) / hz;
    const double dlh1 = sampler.weight().dlog(z, 0);
    const double dlh2 = sampler.weight().dlog(z, 1);
    const double bracket =
        ki.d1_psi * (dom2 + om_val * dlh2) - ki.d2_psi * (dom1 + om_val * dlh1);
    const double drive = -params.g * (dn2 / n_val) / hz;
    return (kill + delta_term + series - bracket + drive) / lambda();
  }

  double iterate(TokamSpecies species, Vec2 x, double t) const {
    const double diff = species == TokamSpecies::density ? params.D : params.nu;
    const GaussianField& f0 =
        species == TokamSpecies::density ? init_density : init_vorticity;
    const double free_term = std::exp(-lambda() * t) * f0.heat(diff, t).value(x);

    const GaussRule& gh = gauss_hermite(16);
    const auto outer = [&](double s) {
      // E over z ~ N(x, 2 diff s I) by a tensor Gauss-Hermite rule
      const double scale = std::sqrt(2.0 * diff * s) * M_SQRT2;
      double acc = 0.0;
      for (size_t i = 0; i < gh.nodes.size(); ++i)
        for (size_t j = 0; j < gh.nodes.size(); ++j) {
          const Vec2 z{x.x1 + scale * gh.nodes[i], x.x2 + scale * gh.nodes[j]};
          const double b = species == TokamSpecies::density ? braces_density(z, t - s)
                                                            : braces_vorticity(z, t - s);
          acc += gh.weights[i] * gh.weights[j] * b;
        }
      return acc / M_PI;
    };
    const double integral =
        integrate([&](double s) { return lambda() * std::exp(-lambda() * s) * outer(s); }, 0.0,
                  t, rel_tol, 1e-12, 16)
            .value;
    return free_term + integral;
  }
};

}  // namespace

double tokam_picard_depth1(const TokamParams& params, const KernelSampler& sampler,
                           const GaussianField& init_density, const GaussianField& init_vorticity,
                           TokamSpecies species, Vec2 x, double t, double rel_tol) {
  TokamPicard picard{params, sampler, init_density, init_vorticity, rel_tol};
  return picard.iterate(species, x, t);
}

// ---------------------------------------------------------------------------
// Depth-1 Picard iterate of the Fourier-space system.
// ---------------------------------------------------------------------------

double GaussianTransform::value(Vec2 k) const {
  return amplitude * std::exp(-beta * (k.x1 * k.x1 + k.x2 * k.x2));
}

std::pair<std::string, std::string> GaussianTransform::expression_pair() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.17g*exp(-%.17g*(k1^2 + k2^2))", amplitude, beta);
  return {std::string(buf), "0"};
}

namespace {

struct FourierPicard {
  const FourierParams& params;
  const GaussianTransform& init_f;
  const GaussianTransform& init_phi;
  double rel_tol;

  double lambda() const { return params.sigma * std::exp(params.Lambda); }

  double f0(Vec2 kk, double u) const {
    return std::exp(-params.D * (kk.x1 * kk.x1 + kk.x2 * kk.x2) * u) * init_f.value(kk);
  }
  double phi0(Vec2 kk, double u) const {
    return std::exp(-params.nu * (kk.x1 * kk.x1 + kk.x2 * kk.x2) * u) * init_phi.value(kk);
  }

  // n-fold self-convolution of phi0(., u) = A exp(-a |xi|^2):
  // (pi/a)^{n-1} A^n exp(-a |k|^2 / n) / n
  double phi0_conv_power(int n, Vec2 k, double u) const {
    const double a = init_phi.beta + params.nu * u;
    const double k2 = k.x1 * k.x1 + k.x2 * k.x2;
    return std::pow(init_phi.amplitude, n) * std::pow(M_PI / a, n - 1) *
           std::exp(-a * k2 / n) / n;
  }

  double series_sum(Vec2 k, double u) const {
    // Sum_{n>=1} (-1)^n / (n! (2 pi)^{n-1}) (phi0)^{*n}(k)
    double sum = 0.0, fact = 1.0;
    for (int n = 1; n <= 40; ++n) {
      fact *= n;
      const double term = ((n % 2 == 0) ? 1.0 : -1.0) / (fact * std::pow(2.0 * M_PI, n - 1)) *
                          phi0_conv_power(n, k, u);
      sum += term;
      if (std::abs(term) < 1e-18 * std::max(1.0, std::abs(sum)) && n > 3) break;
    }
    return sum;
  }

  // 2D momentum integral by a tensor Gauss-Legendre rule over a box that
  // covers both Gaussian factors.
  double momentum_integral(const std::function<double(Vec2)>& f, Vec2 k) const {
    const double width = std::sqrt(1.0 / std::min(init_f.beta, init_phi.beta));
    const double half = k.norm() + 8.0 * width + 2.0;
    const GaussRule& gl = gauss_legendre(96);
    double acc = 0.0;
    for (size_t i = 0; i < gl.nodes.size(); ++i)
      for (size_t j = 0; j < gl.nodes.size(); ++j) {
        const Vec2 xi{half * gl.nodes[i], half * gl.nodes[j]};
        acc += gl.weights[i] * gl.weights[j] * f(xi);
      }
    return acc * half * half;
  }

  std::complex<double> chi_braces(Vec2 k, double u) const {
    const double k2 = k.x1 * k.x1 + k.x2 * k.x2;
    const double gamma_k = params.kernel(k);

    const double term_a = momentum_integral(
                              [&](Vec2 xi) {
                                const Vec2 rest = k - xi;
                                return (k.x1 - xi.x1) * xi.x2 *
                                       (phi0(rest, u) * f0(xi, u) - f0(rest, u) * phi0(xi, u));
                              },
                              k) /
                          (2.0 * M_PI * params.D * k2 * gamma_k);
    const double term_b = -lambda() * series_sum(k, u) / (params.D * k2 * gamma_k);
    const double term_c = -momentum_integral(
                              [&](Vec2 xi) {
                                const Vec2 rest = k - xi;
                                return ((k.x1 - xi.x1) * xi.x1 + (k.x2 - xi.x2) * xi.x2) *
                                       f0(rest, u) * f0(xi, u);
                              },
                              k) /
                          (2.0 * M_PI * k2 * gamma_k);
    std::complex<double> term_s{0.0, 0.0};
    if (params.source)
      term_s = params.source->eval({k.x1, k.x2, u}) / (params.D * k2 * gamma_k);
    return term_a + term_b + term_c + term_s;
  }

  std::complex<double> zeta_braces(Vec2 k, double u) const {
    const double k2 = k.x1 * k.x1 + k.x2 * k.x2;
    const double gamma_k = params.kernel(k);

    const double term_a = momentum_integral(
                              [&](Vec2 xi) {
                                const Vec2 rest = k - xi;
                                const double xi2 = xi.x1 * xi.x1 + xi.x2 * xi.x2;
                                const double rest2 = rest.x1 * rest.x1 + rest.x2 * rest.x2;
                                return (k.x1 - xi.x1) * xi.x2 * (xi2 - rest2) * phi0(rest, u) *
                                       phi0(xi, u);
                              },
                              k) /
                          (2.0 * M_PI * params.nu * k2 * k2 * gamma_k);
    const double term_b = lambda() * series_sum(k, u) / (params.nu * k2 * k2 * gamma_k);
    const std::complex<double> term_chi =
        std::complex<double>(0.0, -params.g * k.x2 / (params.nu * k2 * k2)) * f0(k, u) / gamma_k;
    return term_a + term_b + term_chi;
  }

  std::complex<double> iterate(FourierSpecies species, Vec2 k, double t) const {
    const double k2 = k.x1 * k.x1 + k.x2 * k.x2;
    const double rate = (species == FourierSpecies::chi ? params.D : params.nu) * k2;
    const double gamma_k = params.kernel(k);
    const double init =
        species == FourierSpecies::chi ? init_f.value(k) : init_phi.value(k);
    const std::complex<double> free_term = std::exp(-rate * t) * init / gamma_k;

    const auto integrand = [&](double s) {
      const std::complex<double> braces = species == FourierSpecies::chi
                                              ? chi_braces(k, t - s)
                                              : zeta_braces(k, t - s);
      return rate * std::exp(-rate * s) * braces;
    };
    const double re =
        integrate([&](double s) { return integrand(s).real(); }, 0.0, t, rel_tol, 1e-14, 20)
            .value;
    const double im =
        integrate([&](double s) { return integrand(s).imag(); }, 0.0, t, rel_tol, 1e-14, 20)
            .value;
    return free_term + std::complex<double>(re, im);
  }
};

}  // namespace

std::complex<double> fourier_picard_depth1(const FourierParams& params,
                                           const GaussianTransform& init_f,
                                           const GaussianTransform& init_phi,
                                           FourierSpecies species, Vec2 k, double t,
                                           double rel_tol) {
  FourierPicard picard{params, init_f, init_phi, rel_tol};
  return picard.iterate(species, k, t);
}

}  // namespace solbranch
