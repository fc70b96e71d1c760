#include "solbranch/tokam_fourier.hpp"

#include <cmath>
#include <stdexcept>

#include "solbranch/runner.hpp"

namespace solbranch {

namespace {
constexpr double kTwoPi = 2.0 * M_PI;
}

double MajorizingKernel::operator()(Vec2 k) const { return conv_power(1, k); }

double MajorizingKernel::conv_power(int n, Vec2 k) const {
  const double var = scale * scale * n;
  const double k2 = k.x1 * k.x1 + k.x2 * k.x2;
  return std::pow(amplitude, n) * std::exp(-0.5 * k2 / var) / (kTwoPi * var);
}

const std::vector<std::string>& fourier_vars() {
  static const std::vector<std::string> vars{"k1", "k2"};
  return vars;
}

const std::vector<std::string>& fourier_source_vars() {
  static const std::vector<std::string> vars{"k1", "k2", "t"};
  return vars;
}

std::complex<double> ComplexExpr::eval(const std::vector<double>& bindings) const {
  return {eval_scalar(re, bindings), eval_scalar(im, bindings)};
}

ComplexExpr ComplexExpr::parse(const std::string& re_text, const std::string& im_text,
                               const std::vector<std::string>& vars) {
  return {parse_expression(re_text, vars), parse_expression(im_text, vars)};
}

std::vector<Vec2> sample_conditioned_momenta(RngStream& s, const MajorizingKernel& kernel, int n,
                                             Vec2 k) {
  std::vector<Vec2> eta(static_cast<size_t>(n));
  Vec2 sum{0.0, 0.0};
  for (auto& e : eta) {
    e = {kernel.scale * s.gaussian(), kernel.scale * s.gaussian()};
    sum = sum + e;
  }
  const Vec2 shift = (1.0 / n) * (k - sum);
  std::vector<Vec2> out;
  out.reserve(static_cast<size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) out.push_back(eta[static_cast<size_t>(i)] + shift);
  return out;
}

std::pair<ComplexBranchTable, ComplexBranchTable> build_fourier_tables(
    const FourierParams& params, Vec2 k) {
  using cd = std::complex<double>;
  const double k2 = k.x1 * k.x1 + k.x2 * k.x2;
  if (k2 == 0.0)
    throw std::invalid_argument("fourier tables: k = 0 makes rates and multipliers singular");
  const double lambda = params.sigma * std::exp(params.Lambda);
  const double gamma_k = params.kernel(k);
  const double gamma2_k = params.kernel.conv_power(2, k);

  // chi equation: Poisson-bracket pair with antisymmetric half-choices,
  // e^{-phi} convolution series, gradient-squared pair, source.
  const double c_a = gamma2_k / (kTwoPi * gamma_k * params.D * k2);
  const double c_b1 = lambda / (params.D * k2);  // lowest (n = 1) series term
  const double c_c = gamma2_k / (kTwoPi * gamma_k * k2);
  const std::vector<RawBranch<cd>> raw_chi{
      {"bracket+", cd(c_a, 0.0), 0.5, Arity::fixed, 2, 0},
      {"bracket-", cd(-c_a, 0.0), 0.5, Arity::fixed, 2, 0},
      {"series", cd(c_b1, 0.0), kTwoPi * lambda, Arity::poisson_tail, 0, 0},
      {"grad-sq-1", cd(-c_c, 0.0), 0.5 * params.D, Arity::fixed, 2, 0},
      {"grad-sq-2", cd(-c_c, 0.0), 0.5 * params.D, Arity::fixed, 2, 0},
      {"source", cd(1.0 / (params.D * k2), 0.0), kTwoPi, Arity::fixed, 0, 0},
  };

  // zeta equation: antisymmetrized bracket, series (with its own n = 0
  // replacement killing k != 0 paths), and the complex switch to chi.
  const double c_ap = gamma2_k / (kTwoPi * gamma_k * params.nu * k2 * k2);
  const double c_bp1 = -lambda / (params.nu * k2 * k2);
  const std::vector<RawBranch<cd>> raw_zeta{
      {"bracket", cd(c_ap, 0.0), 1.0 / kTwoPi, Arity::fixed, 2, 0},
      {"series", cd(c_bp1, 0.0), params.sigma, Arity::poisson_tail, 0, 0},
      {"chi-switch", cd(0.0, -params.g * k.x2 / (params.nu * k2 * k2)), params.g, Arity::fixed, 1,
       0},
  };

  return {make_branch_table(raw_chi), make_branch_table(raw_zeta)};
}

namespace {

using cd = std::complex<double>;

double sq(Vec2 v) { return v.x1 * v.x1 + v.x2 * v.x2; }

double factorial_d(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

struct PathWalker {
  const FourierParams& params;
  const ComplexExpr& init_f;
  const ComplexExpr& init_phi;
  RngStream& rng;
  double k_min;
  cd prob_weight{1.0, 0.0};
  cd coefficient{1.0, 0.0};
  int branches = 0;

  // Series coefficients of the expanded exponential, already divided by the
  // line's Duhamel rate factor.
  cd series_coefficient(FourierSpecies sp, Vec2 k, int n) const {
    if (n == 0) return {0.0, 0.0};  // the delta^2(k) replacement, zero off k = 0
    const double lambda = params.sigma * std::exp(params.Lambda);
    const double k2 = sq(k);
    const double gamma_n = params.kernel.conv_power(n, k);
    const double gamma_k = params.kernel(k);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double denom = sp == FourierSpecies::chi ? params.D * k2 : params.nu * k2 * k2;
    // chi carries -sigma e^Lambda Sum (-1)^n ..., zeta carries +sigma e^Lambda Sum
    const double overall = sp == FourierSpecies::chi ? -1.0 : 1.0;
    return {overall * lambda * sign * gamma_n /
                (factorial_d(n) * std::pow(kTwoPi, n - 1) * denom * gamma_k),
            0.0};
  }

  cd leaf_value(FourierSpecies sp, Vec2 k) const {
    const std::vector<double> bindings{k.x1, k.x2};
    const cd transform =
        sp == FourierSpecies::chi ? init_f.eval(bindings) : init_phi.eval(bindings);
    return transform / params.kernel(k);
  }

  void book(double probability, cd multiplier, cd raw) {
    prob_weight *= probability * multiplier;
    coefficient *= raw;
  }

  cd line(FourierSpecies sp, Vec2 k, double horizon) {
    if (k.norm() < k_min)
      throw GuardError(Guard::domain, "momentum below the infrared cutoff");
    const double rate = (sp == FourierSpecies::chi ? params.D : params.nu) * sq(k);
    const BranchTime bt = sample_branch_time_exponential(rng, rate, horizon);
    if (bt.reached_zero) {
      const double survive = std::exp(-rate * horizon);
      book(survive, {1.0, 0.0}, {survive, 0.0});
      return leaf_value(sp, k);
    }
    ++branches;
    const double remaining = horizon - bt.time;
    const auto tables = build_fourier_tables(params, k);
    const ComplexBranchTable& table = sp == FourierSpecies::chi ? tables.first : tables.second;
    const BranchEntry<cd>& entry = table.sample(rng);

    if (entry.tag == "source") {
      book(entry.probability, entry.multiplier, entry.coefficient);
      if (!params.source) return {0.0, 0.0};
      return entry.multiplier * params.source->eval({k.x1, k.x2, remaining}) / params.kernel(k);
    }
    if (entry.tag == "chi-switch") {
      book(entry.probability, entry.multiplier, entry.coefficient);
      return entry.multiplier * line(FourierSpecies::chi, k, remaining);
    }
    if (entry.arity == Arity::poisson_tail) {
      const int n = sample_poisson_tail(rng, entry.poisson_min);
      const double pn = poisson_tail_pmf(n, entry.poisson_min);
      const cd cn = series_coefficient(sp, k, n);
      const cd multiplier = cn / (entry.probability * pn);
      book(entry.probability * pn, multiplier, cn);
      if (n == 0) return {0.0, 0.0};  // kills the path off k = 0
      std::vector<Vec2> momenta = sample_conditioned_momenta(rng, params.kernel, n, k);
      Vec2 last = k;
      for (const Vec2& m : momenta) last = last - m;
      momenta.push_back(last);
      cd product{1.0, 0.0};
      for (const Vec2& m : momenta) product *= line(FourierSpecies::zeta, m, remaining);
      return multiplier * product;
    }

    // Pair branchings: one free momentum xi, partner k - xi; the sampled
    // momentum factor rides on the multiplier and the audit coefficient.
    const Vec2 xi = sample_conditioned_momenta(rng, params.kernel, 2, k)[0];
    const Vec2 partner = k - xi;
    double factor = 0.0;
    FourierSpecies first = FourierSpecies::zeta, second = FourierSpecies::zeta;
    if (entry.tag == "bracket+") {  // zeta(k - xi) chi(xi)
      factor = (k.x1 - xi.x1) * xi.x2;
      first = FourierSpecies::zeta;
      second = FourierSpecies::chi;
    } else if (entry.tag == "bracket-") {  // chi(k - xi) zeta(xi)
      factor = (k.x1 - xi.x1) * xi.x2;
      first = FourierSpecies::chi;
      second = FourierSpecies::zeta;
    } else if (entry.tag == "grad-sq-1") {
      factor = (k.x1 - xi.x1) * xi.x1;
      first = second = FourierSpecies::chi;
    } else if (entry.tag == "grad-sq-2") {
      factor = (k.x2 - xi.x2) * xi.x2;
      first = second = FourierSpecies::chi;
    } else if (entry.tag == "bracket") {  // zeta zeta with the antisymmetric factor
      factor = (k.x1 - xi.x1) * xi.x2 * (sq(xi) - sq(partner));
      first = second = FourierSpecies::zeta;
    }
    const cd multiplier = entry.multiplier * factor;
    book(entry.probability, multiplier, entry.coefficient * factor);
    return multiplier * line(first, partner, remaining) * line(second, xi, remaining);
  }
};

}  // namespace

FourierPath sample_fourier_path(const FourierParams& params, const ComplexExpr& init_f,
                                const ComplexExpr& init_phi, FourierSpecies species, Vec2 k,
                                double t, RngStream& s, double k_min) {
  PathWalker walker{params, init_f, init_phi, s, k_min, {1.0, 0.0}, {1.0, 0.0}, 0};
  FourierPath path;
  path.value = walker.line(species, k, t);
  path.prob_weight = walker.prob_weight;
  path.coefficient = walker.coefficient;
  path.branches = walker.branches;
  return path;
}

Estimate estimate_fourier(const FourierParams& params, const ComplexExpr& init_f,
                          const ComplexExpr& init_phi, FourierSpecies species, Vec2 k, double t,
                          const FourierRunOptions& options) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_fourier: t must be positive");
  if (!(params.D > 0.0) || !(params.nu > 0.0))
    throw std::invalid_argument("estimate_fourier: D and nu must be positive");
  if (k.norm() < options.k_min)
    throw std::invalid_argument("estimate_fourier: evaluation momentum below k_min");
  return run_paths(options.n_samples, options.threads,
                   [&](std::uint64_t i) -> PathOutcome {
                     RngStream stream = split_stream(options.master_seed, i);
                     try {
                       const FourierPath path = sample_fourier_path(
                           params, init_f, init_phi, species, k, t, stream, options.k_min);
                       if (options.max_branches >= 0 && path.branches > options.max_branches)
                         return {false, {0.0, 0.0}};
                       return {false, path.value};
                     } catch (const GuardError&) {
                       return {true, {0.0, 0.0}};
                     }
                   });
}

GuardCheck fourier_bound_check(const std::vector<double>& declared_caps) {
  double worst = 0.0;
  for (double cap : declared_caps) worst = std::max(worst, cap);
  return {worst <= 1.0, worst};
}

}  // namespace solbranch
