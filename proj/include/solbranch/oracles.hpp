#pragma once

// Deterministic desk-scale ground truths for the acceptance tests:
//  - closed-form characteristics solution of the linear SOLEDGE system,
//  - method-of-lines finite-difference solver for the full system,
//  - truncated Picard/Duhamel iterates evaluated by quadrature.

#include <utility>
#include <vector>

#include "solbranch/expr.hpp"
#include "solbranch/soledge.hpp"
#include "solbranch/tokam_config.hpp"
#include "solbranch/tokam_fourier.hpp"

namespace solbranch {

/// Exact solution of the linear (chi = 0) system for D = nu and initial data
/// N = cos(m theta) g(r), Gamma = 0:
///   N = H_t[g](r) cos(m theta) cos(m t / q),
///   Gamma = H_t[g](r) sin(m theta) sin(m t / q).
std::pair<double, double> soledge_characteristics_exact(const SoledgeParams& params, int m,
                                                        const Expr& radial_profile, double r,
                                                        double theta, double t);

struct Grid2 {
  double r_min = -4.0;
  double r_max = 4.0;
  int nr = 129;       // r nodes (inclusive endpoints)
  int ntheta = 128;   // periodic theta nodes, power of two
  double dt = 1e-4;   // time step
};

struct FdSolution {
  Grid2 grid;
  std::vector<double> density;   // row-major [ir * ntheta + itheta]
  std::vector<double> momentum;

  double dr() const { return (grid.r_max - grid.r_min) / (grid.nr - 1); }
  double dtheta() const { return 2.0 * M_PI / grid.ntheta; }
  /// Value at the nearest grid node (tests probe on-node points).
  double at(const std::vector<double>& field, double r, double theta) const;
};

/// Method of lines for the SOLEDGE system with uniform mask value chi
/// (0 or 1): 4th-order central theta derivatives (periodic), 2nd-order in r,
/// classical RK4 in time. Throws on violated stability bound or blow-up.
FdSolution soledge_fd_solve(const SoledgeParams& params, const Expr& init_density,
                            const Expr& init_momentum, const Grid2& grid, double t, int chi);

/// First (or second) Picard/Duhamel iterate of the backward integral
/// equations, by adaptive quadrature with Gauss-Hermite heat applications.
std::pair<double, double> soledge_picard_iterate(const SoledgeParams& params,
                                                 const Expr& init_density,
                                                 const Expr& init_momentum, double r, double theta,
                                                 double t, int depth, double rel_tol = 1e-6);

/// Isotropic Gaussian-family field a + b exp(-c |x - center|^2); heat
/// semigroups and derivatives stay closed-form, which keeps the nested
/// Picard quadratures desk-scale.
struct GaussianField {
  double offset = 0.0;
  double amplitude = 0.0;
  double decay = 1.0;  // c > 0
  Vec2 center{0.0, 0.0};

  double value(Vec2 x) const;
  GaussianField heat(double diffusivity, double time) const;
  double d1(Vec2 x) const;
  double d2(Vec2 x) const;
  /// Expression text over (x1, x2) for feeding the same field to an engine.
  std::string expression() const;
};

/// Depth-1 Picard iterate of the configuration-space system for the given
/// species, with free fields propagated in closed form.
double tokam_picard_depth1(const TokamParams& params, const KernelSampler& sampler,
                           const GaussianField& init_density, const GaussianField& init_vorticity,
                           TokamSpecies species, Vec2 x, double t, double rel_tol = 1e-6);

/// Isotropic Gaussian transform A exp(-beta |k|^2) (real amplitude).
struct GaussianTransform {
  double amplitude = 0.0;
  double beta = 1.0;
  double value(Vec2 k) const;
  std::pair<std::string, std::string> expression_pair() const;  // (re, im)
};

/// Depth-1 Picard iterate of the Fourier-space system; convolution powers
/// of the Gaussian free fields are closed-form, the remaining momentum
/// integrals are done by tensor quadrature.
std::complex<double> fourier_picard_depth1(const FourierParams& params,
                                           const GaussianTransform& init_f,
                                           const GaussianTransform& init_phi,
                                           FourierSpecies species, Vec2 k, double t,
                                           double rel_tol = 1e-6);

}  // namespace solbranch
