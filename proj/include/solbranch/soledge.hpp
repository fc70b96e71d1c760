#pragma once

// Stochastic solution of the SOLEDGE-2D system: closed-form evaluation of
// the masked (linear relaxation) region, and the unmasked nonlinear system
// via backward branching trees with operator labels and backtracked jet
// evaluation. The line process diffuses only in r; every theta derivative
// is an operator label realized through shared-displacement jets.

#include <cstdint>
#include <utility>
#include <vector>

#include "solbranch/branch_table.hpp"
#include "solbranch/estimate.hpp"
#include "solbranch/expr.hpp"
#include "solbranch/rng.hpp"

namespace solbranch {

struct SoledgeParams {
  double q = 1.0;        // safety factor, > 0
  double D = 0.0;        // density diffusivity
  double nu = 0.0;       // momentum diffusivity
  double eta = 1.0;      // relaxation time (masked region only)
  double Gamma0 = 0.0;   // target momentum (masked region only)
  double p_survive = 0.5;
};

/// Variables of SOLEDGE initial-condition expressions.
const std::vector<std::string>& soledge_vars();  // {"r", "theta"}

enum class Species { density, momentum };  // N, Gamma

/// Operation a parent applies to a child's subtree value before combining.
enum class ChildWrap { none, square, reciprocal };

struct PathNode {
  Species species = Species::density;  // species of the line reaching this event
  double r = 0.0;                      // leaf arrival or interrupt position
  double horizon = 0.0;                // time-to-go of the line at its start
  bool is_leaf = true;
  ChildWrap wrap = ChildWrap::none;    // applied by the parent
  double weight = 1.0;                 // multiplier picked up at this event
  double probability = 1.0;            // probability of the decision made here
  double coefficient = 1.0;            // raw Duhamel coefficient it represents
  std::vector<PathNode> children;      // interior vertices apply d/dtheta to
                                       // the product of wrapped children
};

/// Backward sample tree started from species/(r, horizon). Positions are
/// drawn along the way; every interior vertex carries one d/dtheta label.
PathNode build_soledge_tree(const SoledgeParams& params, Species species, double r, double t,
                            RngStream& s);

/// Count of d/dtheta labels (= interior vertices).
int soledge_tree_order(const PathNode& tree);

/// Backtracked evaluation: leaves evaluate the species' initial expression
/// as a theta-jet at (r_leaf, theta + eps); wraps and vertex derivatives
/// combine jets; the result is the root jet value times the tree weight.
/// Throws GuardError when the jet-order cap or the division guard fires.
double evaluate_soledge_tree(const PathNode& tree, const Expr& init_density,
                             const Expr& init_momentum, double theta, int max_jet_order,
                             double eps_div = kDefaultEpsDiv);

struct SoledgeRunOptions {
  std::uint64_t n_samples = 10000;
  std::uint64_t master_seed = 0;
  int threads = 1;
  int max_jet_order = 8;
  double eps_div = kDefaultEpsDiv;
  int max_interrupts = -1;  // >= 0: trees with more interrupts contribute 0
                            // (depth-limited Picard conditioning)
};

/// Monte Carlo estimates of (N, Gamma) at (r, theta, t) for the chi = 0
/// nonlinear system. Rejected trees are counted, never zeroed.
std::pair<Estimate, Estimate> estimate_soledge(const SoledgeParams& params,
                                               const Expr& init_density,
                                               const Expr& init_momentum, double r, double theta,
                                               double t, const SoledgeRunOptions& options);

/// Closed-form solution of the masked (chi = 1) linear system, with the
/// Duhamel coupling integral evaluated by adaptive quadrature.
std::pair<double, double> solve_chi1(const SoledgeParams& params, const Expr& init_density,
                                     const Expr& init_momentum, double r, double theta, double t,
                                     double rel_tol = 1e-8);

struct GuardCheck {
  bool ok = true;
  double value = 0.0;  // the tested quantity (t*M/q here)
};

/// Worst-case convergence bound of the tree expansion: ok iff t*M/q < 1.
GuardCheck soledge_convergence_guard(const SoledgeParams& params, double bound_M, double t);

}  // namespace solbranch
