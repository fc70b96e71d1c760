#pragma once

// Fourier-space TOKAM-2D stochastic solution: complex-valued branching in
// momentum space. Lines keep their momentum and decay at rate D|k|^2 or
// nu|k|^2; branchings draw children momenta conditioned to sum to the parent
// momentum through a Gaussian majorizing kernel, whose convolution powers
// are closed-form. Multipliers multiply along the path; no operator labels,
// no backtracking.

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "solbranch/branch_table.hpp"
#include "solbranch/estimate.hpp"
#include "solbranch/expr.hpp"
#include "solbranch/kernel_sampler.hpp"  // Vec2
#include "solbranch/rng.hpp"
#include "solbranch/soledge.hpp"  // GuardCheck

namespace solbranch {

/// gamma(k) = amplitude * phi_scale(k), phi the isotropic Gaussian density
/// of per-axis variance scale^2; strictly positive, closed-form convolution
/// powers gamma^{*n}(k) = amplitude^n * phi_{scale sqrt(n)}(k).
struct MajorizingKernel {
  double scale = 1.0;
  double amplitude = 1.0;

  double operator()(Vec2 k) const;
  double conv_power(int n, Vec2 k) const;
};

const std::vector<std::string>& fourier_vars();         // {"k1", "k2"}
const std::vector<std::string>& fourier_source_vars();  // {"k1", "k2", "t"}

/// A complex field given as (re, im) expression pair.
struct ComplexExpr {
  Expr re;
  Expr im;
  std::complex<double> eval(const std::vector<double>& bindings) const;
  static ComplexExpr parse(const std::string& re_text, const std::string& im_text,
                           const std::vector<std::string>& vars);
};

struct FourierParams {
  double sigma = 1.0;
  double Lambda = 0.0;
  double D = 1.0;   // > 0
  double nu = 1.0;  // > 0
  double g = 0.0;
  MajorizingKernel kernel;
  std::optional<ComplexExpr> source;  // transform of S' over (k1, k2, t)
};

enum class FourierSpecies { chi, zeta };  // F/gamma, Phi/gamma

/// First n-1 of n momenta distributed as iid N(0, scale^2 I) conditioned on
/// summing to k (the last child takes the exact remainder).
std::vector<Vec2> sample_conditioned_momenta(RngStream& s, const MajorizingKernel& kernel, int n,
                                             Vec2 k);

/// Branch tables at momentum k from the raw Duhamel coefficients; stored
/// coefficients carry the momentum-independent prefactor, the sampled
/// momentum factors multiply in per path. Poisson-tail entries store the
/// lowest admissible term. Throws for k = 0.
std::pair<ComplexBranchTable, ComplexBranchTable> build_fourier_tables(
    const FourierParams& params, Vec2 k);

struct FourierPath {
  std::complex<double> value{0.0, 0.0};
  std::complex<double> prob_weight{1.0, 0.0};  // product of p * (M * momentum factor)
  std::complex<double> coefficient{1.0, 0.0};  // product of raw coefficients
  int branches = 0;
};

/// One backward path; throws GuardError when a child momentum falls below
/// the infrared cutoff k_min.
FourierPath sample_fourier_path(const FourierParams& params, const ComplexExpr& init_f,
                                const ComplexExpr& init_phi, FourierSpecies species, Vec2 k,
                                double t, RngStream& s, double k_min);

struct FourierRunOptions {
  std::uint64_t n_samples = 10000;
  std::uint64_t master_seed = 0;
  int threads = 1;
  double k_min = 1e-3;
  int max_branches = -1;  // >= 0: deeper paths contribute 0 (Picard conditioning)
};

/// Complex Monte Carlo estimate of chi or zeta at (k, t). Initial data are
/// the transforms of the fields (F, Phi); leaves divide by gamma.
Estimate estimate_fourier(const FourierParams& params, const ComplexExpr& init_f,
                          const ComplexExpr& init_phi, FourierSpecies species, Vec2 k, double t,
                          const FourierRunOptions& options);

/// ok iff every declared sup bound is <= 1 (non-strict).
GuardCheck fourier_bound_check(const std::vector<double>& declared_caps);

}  // namespace solbranch
