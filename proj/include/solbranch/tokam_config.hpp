#pragma once

// Configuration-space TOKAM-2D stochastic solution: backward trees with
// exponential branching at rate sigma e^Lambda, kernel-normalized children,
// exponential-series branchings, and derivative/log operator labels resolved
// by shared-displacement 2D jets. The h and log h multiplier factors are
// evaluated at the branching coordinates; field leaves evaluate the initial
// expressions at their arrival points.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "solbranch/branch_table.hpp"
#include "solbranch/estimate.hpp"
#include "solbranch/expr.hpp"
#include "solbranch/kernel_sampler.hpp"
#include "solbranch/rng.hpp"
#include "solbranch/soledge.hpp"  // GuardCheck

namespace solbranch {

struct TokamParams {
  double sigma = 1.0;   // > 0
  double Lambda = 0.0;
  double D = 1.0;       // density diffusivity, > 0
  double nu = 1.0;      // vorticity diffusivity, > 0
  double g = 0.0;       // interchange drive, >= 0
  std::optional<Expr> source;  // S over (x1, x2, t); absent means 0

  double branch_rate() const;  // sigma e^Lambda
};

const std::vector<std::string>& tokam_vars();         // {"x1", "x2"}
const std::vector<std::string>& tokam_source_vars();  // {"x1", "x2", "t"}

enum class TokamSpecies { density, vorticity };  // n, Omega = Psi / h

/// Operator labels a parent applies to a child's subtree value.
struct TokamOps {
  int d1 = 0;
  int d2 = 0;
  bool log_first = false;
  int order() const { return d1 + d2; }
};

struct TokamNode {
  enum class Kind { field_leaf, source_leaf, kill, vertex };

  TokamSpecies species = TokamSpecies::density;
  Kind kind = Kind::field_leaf;
  Vec2 pos{};           // leaf arrival or branching coordinates
  double time = 0.0;    // remaining time after the event (0 at field leaves)
  TokamOps ops;         // applied by the parent
  double weight = 1.0;  // multiplier times sampled kernel signs
  double probability = 1.0;
  double coefficient = 1.0;  // raw Duhamel coefficient (signs included)
  std::vector<TokamNode> children;
};

/// Branch tables at position x, built from the raw Duhamel coefficients of
/// the rewritten integral equations. Weights mirror the published
/// denominators (3 + sigma e^Lambda and 2 + sigma + 2 sigma e^Lambda + g).
std::pair<RealBranchTable, RealBranchTable> build_tokam_tables(const TokamParams& params,
                                                               const KernelSampler& sampler,
                                                               Vec2 x);

TokamNode build_tokam_tree(const TokamParams& params, const KernelSampler& sampler,
                           TokamSpecies species, Vec2 x, double t, RngStream& s);

/// Total derivative-label count (the jet order the tree needs).
int tokam_tree_order(const TokamNode& tree);

/// Number of branching events (table draws) in the tree.
int tokam_tree_branches(const TokamNode& tree);

double evaluate_tokam_tree(const TokamNode& tree, const TokamParams& params,
                           const Expr& init_density, const Expr& init_vorticity,
                           int max_jet_order, double eps_div = kDefaultEpsDiv);

/// Multiplies (probability * weight) and coefficient over the tree; the two
/// agree to roundoff by construction, and diverge if any multiplier is
/// tampered with.
void tokam_audit_products(const TokamNode& tree, double& prob_weight, double& coefficient);

struct TokamRunOptions {
  std::uint64_t n_samples = 10000;
  std::uint64_t master_seed = 0;
  int threads = 1;
  int max_jet_order = 8;
  double eps_div = kDefaultEpsDiv;
  int max_branches = -1;  // >= 0: deeper trees contribute 0 (Picard conditioning)
};

Estimate estimate_tokam(const TokamParams& params, const KernelSampler& sampler,
                        const Expr& init_density, const Expr& init_vorticity,
                        TokamSpecies species, Vec2 x, double t, const TokamRunOptions& options);

/// Convergence bound of the branching estimate: ok iff
/// M_cap <= 1 / (1 - exp(-sigma e^Lambda t)).
GuardCheck tokam_bound_check(const TokamParams& params, double t, double m_cap);

}  // namespace solbranch
