#include "solbranch/tokam_config.hpp"

#include <cmath>
#include <stdexcept>

#include "solbranch/runner.hpp"

namespace solbranch {

double TokamParams::branch_rate() const { return sigma * std::exp(Lambda); }

const std::vector<std::string>& tokam_vars() {
  static const std::vector<std::string> vars{"x1", "x2"};
  return vars;
}

const std::vector<std::string>& tokam_source_vars() {
  static const std::vector<std::string> vars{"x1", "x2", "t"};
  return vars;
}

namespace {

double factorial_d(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Per-j raw coefficients of the exponential-series branchings:
// -(-1)^j N(x)^j / j!, divided by h(x) on the vorticity side.
double series_coefficient(double n_norm, int j, double h_div) {
  const double sign = (j % 2 == 0) ? -1.0 : 1.0;  // -(-1)^j
  return sign * std::pow(n_norm, j) / factorial_d(j) / h_div;
}

}  // namespace

std::pair<RealBranchTable, RealBranchTable> build_tokam_tables(const TokamParams& params,
                                                               const KernelSampler& sampler,
                                                               Vec2 x) {
  const double lambda = params.branch_rate();
  const KernelNormalizations norms = sampler.normalizations(x);
  const double hx = sampler.weight()(x);
  if (!(hx > 0.0))
    throw GuardError(Guard::domain, "kernel weight vanishes at a branching point");

  // n-process: source, the two Poisson-bracket pieces, and the e^{-phi}
  // series with at least one kernel child. Entry coefficients of the series
  // refer to the smallest admissible child count.
  const std::vector<RawBranch<double>> raw_n{
      {"source", 1.0 / lambda, 1.0, Arity::fixed, 0, 0},
      {"bracket-1", -norms.n1 / lambda, 1.0, Arity::fixed, 2, 0},
      {"bracket-2", norms.n2 / lambda, 1.0, Arity::fixed, 2, 0},
      {"series", series_coefficient(norms.n, 1, 1.0), lambda, Arity::poisson_tail, 0, 1},
  };

  // Omega-process: kill constant, delta term, series from j = 2, the two
  // non-commuting bracket splits (derivative piece and log h piece), and the
  // interchange-drive term acting on log n.
  const double dlh1 = sampler.weight().dlog(x, 0);
  const double dlh2 = sampler.weight().dlog(x, 1);
  const std::vector<RawBranch<double>> raw_omega{
      {"kill", (1.0 - std::exp(params.Lambda)) / (std::exp(params.Lambda) * hx), params.sigma,
       Arity::fixed, 0, 0},
      {"delta", norms.n_delta / hx, lambda, Arity::fixed, 1, 0},
      {"series", series_coefficient(norms.n, 2, hx), lambda, Arity::poisson_tail, 0, 2},
      {"bracket-1-deriv", -norms.n1 / lambda, 0.5, Arity::fixed, 2, 0},
      {"bracket-1-logh", -norms.n1 * dlh2 / lambda, 0.5, Arity::fixed, 2, 0},
      {"bracket-2-deriv", norms.n2 / lambda, 0.5, Arity::fixed, 2, 0},
      {"bracket-2-logh", norms.n2 * dlh1 / lambda, 0.5, Arity::fixed, 2, 0},
      {"interchange", -params.g / (lambda * hx), params.g, Arity::fixed, 1, 0},
  };

  return {make_branch_table(raw_n), make_branch_table(raw_omega)};
}

namespace {

Vec2 gaussian_step_2d(RngStream& s, Vec2 x, double diffusivity, double dt) {
  return {sample_gaussian_step(s, x.x1, diffusivity, dt),
          sample_gaussian_step(s, x.x2, diffusivity, dt)};
}

struct TreeBuilder {
  const TokamParams& params;
  const KernelSampler& sampler;
  RngStream& rng;

  double diffusivity(TokamSpecies sp) const {
    return sp == TokamSpecies::density ? params.D : params.nu;
  }

  TokamNode kernel_child(Vec2 x, double remaining, KernelDensity which, double& sign_product,
                         double& audit_sign) {
    const KernelDraw draw = sampler.sample(rng, x, which);
    sign_product *= draw.sign;
    audit_sign *= draw.sign;
    return build(TokamSpecies::vorticity, draw.y, remaining);
  }

  TokamNode build(TokamSpecies species, Vec2 x, double t) {
    const double lambda = params.branch_rate();
    const BranchTime bt = sample_branch_time_exponential(rng, lambda, t);
    if (bt.reached_zero) {
      TokamNode leaf;
      leaf.species = species;
      leaf.kind = TokamNode::Kind::field_leaf;
      leaf.pos = gaussian_step_2d(rng, x, diffusivity(species), t);
      leaf.time = 0.0;
      leaf.probability = std::exp(-lambda * t);
      leaf.coefficient = leaf.probability;  // free Duhamel term, weight 1
      return leaf;
    }

    const Vec2 pos = gaussian_step_2d(rng, x, diffusivity(species), bt.time);
    const double remaining = t - bt.time;
    const auto tables = build_tokam_tables(params, sampler, pos);
    const RealBranchTable& table =
        species == TokamSpecies::density ? tables.first : tables.second;
    const BranchEntry<double>& entry = table.sample(rng);

    TokamNode node;
    node.species = species;
    node.kind = TokamNode::Kind::vertex;
    node.pos = pos;
    node.time = remaining;
    node.probability = entry.probability;
    node.weight = entry.multiplier;
    node.coefficient = entry.coefficient;

    double sign = 1.0, audit_sign = 1.0;
    if (species == TokamSpecies::density) {
      if (entry.tag == "source") {
        node.kind = TokamNode::Kind::source_leaf;
      } else if (entry.tag == "bracket-1" || entry.tag == "bracket-2") {
        TokamNode cont = build(TokamSpecies::density, pos, remaining);
        if (entry.tag == "bracket-1")
          cont.ops.d2 = 1;
        else
          cont.ops.d1 = 1;
        node.children.push_back(std::move(cont));
        node.children.push_back(kernel_child(
            pos, remaining,
            entry.tag == "bracket-1" ? KernelDensity::rho_1 : KernelDensity::rho_2, sign,
            audit_sign));
      } else {  // series
        const int j = sample_poisson_tail(rng, entry.poisson_min);
        const KernelNormalizations norms = sampler.normalizations(pos);
        const double cj = series_coefficient(norms.n, j, 1.0);
        const double pj = poisson_tail_pmf(j, entry.poisson_min);
        node.probability = entry.probability * pj;
        node.weight = cj / node.probability;
        node.coefficient = cj;
        node.children.push_back(build(TokamSpecies::density, pos, remaining));
        for (int i = 0; i < j; ++i)
          node.children.push_back(
              kernel_child(pos, remaining, KernelDensity::rho, sign, audit_sign));
      }
    } else {
      if (entry.tag == "kill") {
        node.kind = TokamNode::Kind::kill;
      } else if (entry.tag == "delta") {
        node.children.push_back(
            kernel_child(pos, remaining, KernelDensity::rho_delta, sign, audit_sign));
      } else if (entry.tag == "series") {
        const int j = sample_poisson_tail(rng, entry.poisson_min);
        const KernelNormalizations norms = sampler.normalizations(pos);
        const double hx = sampler.weight()(pos);
        const double cj = series_coefficient(norms.n, j, hx);
        const double pj = poisson_tail_pmf(j, entry.poisson_min);
        node.probability = entry.probability * pj;
        node.weight = cj / node.probability;
        node.coefficient = cj;
        for (int i = 0; i < j; ++i)
          node.children.push_back(
              kernel_child(pos, remaining, KernelDensity::rho, sign, audit_sign));
      } else if (entry.tag == "interchange") {
        TokamNode n_line = build(TokamSpecies::density, pos, remaining);
        n_line.ops.log_first = true;
        n_line.ops.d2 = 1;
        node.children.push_back(std::move(n_line));
      } else {  // the four bracket splits
        TokamNode cont = build(TokamSpecies::vorticity, pos, remaining);
        if (entry.tag == "bracket-1-deriv") cont.ops.d2 = 1;
        if (entry.tag == "bracket-2-deriv") cont.ops.d1 = 1;
        const KernelDensity density =
            (entry.tag == "bracket-1-deriv" || entry.tag == "bracket-1-logh")
                ? KernelDensity::rho_1
                : KernelDensity::rho_2;
        node.children.push_back(std::move(cont));
        node.children.push_back(kernel_child(pos, remaining, density, sign, audit_sign));
      }
    }
    node.weight *= sign;
    node.coefficient *= audit_sign;
    return node;
  }
};

}  // namespace

TokamNode build_tokam_tree(const TokamParams& params, const KernelSampler& sampler,
                           TokamSpecies species, Vec2 x, double t, RngStream& s) {
  TreeBuilder builder{params, sampler, s};
  return builder.build(species, x, t);
}

int tokam_tree_order(const TokamNode& tree) {
  int count = tree.ops.order();
  for (const auto& child : tree.children) count += tokam_tree_order(child);
  return count;
}

int tokam_tree_branches(const TokamNode& tree) {
  int count = tree.kind == TokamNode::Kind::field_leaf ? 0 : 1;
  for (const auto& child : tree.children) count += tokam_tree_branches(child);
  return count;
}

void tokam_audit_products(const TokamNode& tree, double& prob_weight, double& coefficient) {
  prob_weight *= tree.probability * tree.weight;
  coefficient *= tree.coefficient;
  for (const auto& child : tree.children) tokam_audit_products(child, prob_weight, coefficient);
}

namespace {

struct TokamEval {
  const TokamParams& params;
  const Expr& init_density;
  const Expr& init_vorticity;
  int order;
  double eps_div;
  double weight_product = 1.0;

  Jet2 value(const TokamNode& node) {
    weight_product *= node.weight;
    switch (node.kind) {
      case TokamNode::Kind::field_leaf: {
        const std::vector<Jet2> bindings{Jet2::variable(node.pos.x1, 0, order),
                                         Jet2::variable(node.pos.x2, 1, order)};
        return eval_jet(node.species == TokamSpecies::density ? init_density : init_vorticity,
                        bindings, eps_div);
      }
      case TokamNode::Kind::source_leaf: {
        if (!params.source) return Jet2::constant(0.0, order);
        const std::vector<Jet2> bindings{Jet2::variable(node.pos.x1, 0, order),
                                         Jet2::variable(node.pos.x2, 1, order),
                                         Jet2::constant(node.time, order)};
        return eval_jet(*params.source, bindings, eps_div);
      }
      case TokamNode::Kind::kill:
        return Jet2::constant(1.0, order);
      case TokamNode::Kind::vertex: {
        Jet2 prod = wrapped(node.children[0]);
        for (size_t i = 1; i < node.children.size(); ++i) prod = prod * wrapped(node.children[i]);
        return prod;
      }
    }
    throw std::logic_error("unreachable node kind");
  }

  Jet2 wrapped(const TokamNode& child) {
    Jet2 v = value(child);
    if (child.ops.log_first) v = log(v, eps_div);
    for (int i = 0; i < child.ops.d1; ++i) v = derivative(v, 0);
    for (int i = 0; i < child.ops.d2; ++i) v = derivative(v, 1);
    return v;
  }
};

}  // namespace

double evaluate_tokam_tree(const TokamNode& tree, const TokamParams& params,
                           const Expr& init_density, const Expr& init_vorticity,
                           int max_jet_order, double eps_div) {
  const int order = tokam_tree_order(tree);
  if (order > max_jet_order)
    throw GuardError(Guard::order, "tree requires jet order above the configured cap");
  TokamEval eval{params, init_density, init_vorticity, order, eps_div};
  const Jet2 root = eval.value(tree);
  return root.value() * eval.weight_product;
}

Estimate estimate_tokam(const TokamParams& params, const KernelSampler& sampler,
                        const Expr& init_density, const Expr& init_vorticity,
                        TokamSpecies species, Vec2 x, double t, const TokamRunOptions& options) {
  if (!(t > 0.0)) throw std::invalid_argument("estimate_tokam: t must be positive");
  if (!(params.branch_rate() > 0.0))
    throw std::invalid_argument("estimate_tokam: branching rate sigma e^Lambda must be positive");
  return run_paths(options.n_samples, options.threads,
                   [&](std::uint64_t i) -> PathOutcome {
                     RngStream stream = split_stream(options.master_seed, i);
                     try {
                       const TokamNode tree =
                           build_tokam_tree(params, sampler, species, x, t, stream);
                       if (options.max_branches >= 0 &&
                           tokam_tree_branches(tree) > options.max_branches)
                         return {false, 0.0};
                       return {false, evaluate_tokam_tree(tree, params, init_density,
                                                          init_vorticity, options.max_jet_order,
                                                          options.eps_div)};
                     } catch (const GuardError&) {
                       return {true, 0.0};
                     }
                   });
}

GuardCheck tokam_bound_check(const TokamParams& params, double t, double m_cap) {
  const double threshold = 1.0 / (1.0 - std::exp(-params.branch_rate() * t));
  return {m_cap <= threshold, m_cap};
}

}  // namespace solbranch
