#include "solbranch/soledge.hpp"

#include <cmath>
#include <stdexcept>

#include "solbranch/quadrature.hpp"
#include "solbranch/runner.hpp"

namespace solbranch {

const std::vector<std::string>& soledge_vars() {
  static const std::vector<std::string> vars{"r", "theta"};
  return vars;
}

namespace {

double diffusivity(const SoledgeParams& p, Species sp) {
  return sp == Species::density ? p.D : p.nu;
}

PathNode make_leaf(const SoledgeParams& p, Species sp, double r_leaf, double horizon) {
  PathNode n;
  n.species = sp;
  n.r = r_leaf;
  n.horizon = horizon;
  n.is_leaf = true;
  n.weight = 1.0 / p.p_survive;
  n.probability = p.p_survive;
  n.coefficient = 1.0;  // free Duhamel term
  return n;
}

}  // namespace

PathNode build_soledge_tree(const SoledgeParams& params, Species species, double r, double t,
                            RngStream& s) {
  const BranchTime bt = sample_interrupt_uniform(s, params.p_survive, t);
  if (bt.reached_zero)
    return make_leaf(params, species, sample_gaussian_step(s, r, diffusivity(params, species), t),
                     t);

  const double tau = bt.time;
  const double r_int = sample_gaussian_step(s, r, diffusivity(params, species), tau);
  const double remaining = t - tau;

  // Conditional on the interrupt, probability * multiplier must recover the
  // per-line Duhamel coefficient -t/(q(1-p)) of each theta-derivative term.
  const double c = -t / (params.q * (1.0 - params.p_survive));

  PathNode node;
  node.species = species;
  node.r = r_int;
  node.horizon = t;
  node.is_leaf = false;

  if (species == Species::density) {
    const auto table = make_branch_table<double>({{"switch-to-momentum", c, 1.0}});
    const auto& entry = table.entries()[0];
    node.weight = entry.multiplier;
    node.probability = entry.probability;
    node.coefficient = entry.coefficient;
    node.children.push_back(build_soledge_tree(params, Species::momentum, r_int, remaining, s));
  } else {
    const auto table = make_branch_table<double>(
        {{"switch-to-density", c, 1.0}, {"pair-branch", c, 1.0}});
    const auto& entry = table.sample(s);
    node.weight = entry.multiplier;
    node.probability = entry.probability;
    node.coefficient = entry.coefficient;
    if (entry.tag == "switch-to-density") {
      node.children.push_back(build_soledge_tree(params, Species::density, r_int, remaining, s));
    } else {
      PathNode gamma_child =
          build_soledge_tree(params, Species::momentum, r_int, remaining, s);
      gamma_child.wrap = ChildWrap::square;
      PathNode density_child =
          build_soledge_tree(params, Species::density, r_int, remaining, s);
      density_child.wrap = ChildWrap::reciprocal;
      node.children.push_back(std::move(gamma_child));
      node.children.push_back(std::move(density_child));
    }
  }
  return node;
}

int soledge_tree_order(const PathNode& tree) {
  if (tree.is_leaf) return 0;
  int count = 1;
  for (const auto& child : tree.children) count += soledge_tree_order(child);
  return count;
}

namespace {

struct TreeEval {
  const Expr& init_density;
  const Expr& init_momentum;
  double theta;
  int order;
  double eps_div;
  double weight_product = 1.0;

  Jet1 value(const PathNode& node) {
    weight_product *= node.weight;
    if (node.is_leaf) {
      const std::vector<Jet1> bindings{Jet1::constant(node.r, order),
                                       Jet1::variable(theta, order)};
      return eval_jet(node.species == Species::density ? init_density : init_momentum, bindings,
                      eps_div);
    }
    Jet1 prod = wrapped(node.children[0]);
    for (size_t i = 1; i < node.children.size(); ++i) prod = prod * wrapped(node.children[i]);
    return derivative(prod);
  }

  Jet1 wrapped(const PathNode& child) {
    Jet1 v = value(child);
    switch (child.wrap) {
      case ChildWrap::none:
        return v;
      case ChildWrap::square:
        return v * v;
      case ChildWrap::reciprocal:
        return reciprocal(v, eps_div);
    }
    return v;
  }
};

}  // namespace

double evaluate_soledge_tree(const PathNode& tree, const Expr& init_density,
                             const Expr& init_momentum, double theta, int max_jet_order,
                             double eps_div) {
  const int order = soledge_tree_order(tree);
  if (order > max_jet_order)
    throw GuardError(Guard::order, "tree requires jet order above the configured cap");
  TreeEval eval{init_density, init_momentum, theta, order, eps_div};
  const Jet1 root = eval.value(tree);
  return root.value() * eval.weight_product;
}

namespace {

int count_interrupts(const PathNode& tree) { return soledge_tree_order(tree); }

Estimate run_species(const SoledgeParams& params, const Expr& init_density,
                     const Expr& init_momentum, Species species, double r, double theta, double t,
                     const SoledgeRunOptions& opt, std::uint64_t path_offset) {
  return run_paths(
      opt.n_samples, opt.threads,
      [&, species, path_offset](std::uint64_t i) -> PathOutcome {
        RngStream stream = split_stream(opt.master_seed, path_offset + i);
        const PathNode tree = build_soledge_tree(params, species, r, t, stream);
        if (opt.max_interrupts >= 0 && count_interrupts(tree) > opt.max_interrupts)
          return {false, 0.0};
        try {
          return {false, evaluate_soledge_tree(tree, init_density, init_momentum, theta,
                                               opt.max_jet_order, opt.eps_div)};
        } catch (const GuardError&) {
          return {true, 0.0};
        }
      });
}

}  // namespace

std::pair<Estimate, Estimate> estimate_soledge(const SoledgeParams& params,
                                               const Expr& init_density,
                                               const Expr& init_momentum, double r, double theta,
                                               double t, const SoledgeRunOptions& options) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_soledge: t must be positive");
  if (!(params.p_survive > 0.0 && params.p_survive < 1.0))
    throw std::invalid_argument("estimate_soledge: p_survive must lie in (0,1)");
  Estimate n = run_species(params, init_density, init_momentum, Species::density, r, theta, t,
                           options, 0);
  Estimate gamma = run_species(params, init_density, init_momentum, Species::momentum, r, theta,
                               t, options, options.n_samples);
  return {n, gamma};
}

std::pair<double, double> solve_chi1(const SoledgeParams& params, const Expr& init_density,
                                     const Expr& init_momentum, double r, double theta, double t,
                                     double rel_tol) {
  if (t < 0.0) throw std::invalid_argument("solve_chi1: t must be nonnegative");
  const auto scalar_at = [&](const Expr& e, double rr) {
    return eval_scalar(e, {rr, theta});
  };
  if (t == 0.0) return {scalar_at(init_density, r), scalar_at(init_momentum, r)};

  const double decay = std::exp(-t / params.eta);

  // Gamma decouples: relaxation toward Gamma0 plus the diffused initial data.
  const double heat_gamma = gaussian_expectation(
      [&](double rr) { return scalar_at(init_momentum, rr); }, r, std::sqrt(2.0 * params.nu * t));
  const double gamma = decay * heat_gamma + params.Gamma0 * (1.0 - decay);

  // N: free relaxation-diffusion term plus the -(1/q) dtheta Gamma coupling.
  // The two heat semigroups compose into one Gaussian of variance
  // 2 D (t - tau) + 2 nu tau; the relaxation factors combine into e^{-t/eta}.
  const double heat_density = gaussian_expectation(
      [&](double rr) { return scalar_at(init_density, rr); }, r, std::sqrt(2.0 * params.D * t));

  const auto dtheta_gamma0 = [&](double rr) {
    const std::vector<Jet1> bindings{Jet1::constant(rr, 1), Jet1::variable(theta, 1)};
    return extract_derivative(eval_jet(init_momentum, bindings), 1);
  };
  const auto integrand = [&](double tau) {
    const double var = 2.0 * params.D * (t - tau) + 2.0 * params.nu * tau;
    return gaussian_expectation(dtheta_gamma0, r, std::sqrt(var));
  };
  const double coupling = integrate(integrand, 0.0, t, rel_tol).value;

  const double density = decay * (heat_density - coupling / params.q);
  return {density, gamma};
}

GuardCheck soledge_convergence_guard(const SoledgeParams& params, double bound_M, double t) {
  const double v = t * bound_M / params.q;
  return {v < 1.0, v};
}

}  // namespace solbranch
