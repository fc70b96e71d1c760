#pragma once

// Matched (probability, multiplier) tables built from raw Duhamel
// coefficients. The construction enforces sum(p) = 1 and p*M = coefficient
// exactly, which is the identity that keeps the tree estimator unbiased
// regardless of how the published tables are normalized.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "solbranch/rng.hpp"

namespace solbranch {

/// How many children an entry spawns.
enum class Arity { fixed, poisson_tail };

template <typename T>
struct RawBranch {
  std::string tag;
  T coefficient;       // raw Duhamel coefficient of this term
  double weight;       // importance weight, >= 0; p_i = w_i / sum(w)
  Arity arity = Arity::fixed;
  int n_children = 0;  // fixed arity only
  int poisson_min = 0; // poisson-tail only: smallest admissible child count
};

template <typename T>
struct BranchEntry {
  std::string tag;
  double probability = 0.0;
  T coefficient{};
  T multiplier{};      // coefficient / probability
  Arity arity = Arity::fixed;
  int n_children = 0;
  int poisson_min = 0;
};

/// Normalization of the truncated-factorial law: sum_{j>=min_j} 1/j!
/// (= e, e-1, e-2 for min_j = 0, 1, 2).
inline double poisson_tail_norm(int min_j) {
  double z = 0.0, term = 1.0;
  for (int j = 0; j <= 170; ++j) {
    if (j >= min_j) z += term;
    term /= (j + 1);
  }
  return z;
}

/// P(j) = (1/j!) / poisson_tail_norm(min_j), j >= min_j.
inline double poisson_tail_pmf(int j, int min_j) {
  if (j < min_j) return 0.0;
  double inv_fact = 1.0;
  for (int i = 2; i <= j; ++i) inv_fact /= i;
  return inv_fact / poisson_tail_norm(min_j);
}

/// Exact inverse-CDF draw from the truncated-factorial law; the cumulative
/// walk stops once the residual mass drops below 1e-15.
inline int sample_poisson_tail(RngStream& s, int min_j) {
  const double u = s.uniform();
  const double z = poisson_tail_norm(min_j);
  double inv_fact = 1.0;
  for (int i = 2; i <= min_j; ++i) inv_fact /= i;
  double cum = 0.0;
  int j = min_j;
  for (;;) {
    cum += inv_fact / z;
    if (u < cum || 1.0 - cum < 1e-15) return j;
    ++j;
    inv_fact /= j;
  }
}

template <typename T>
class BranchTable {
 public:
  explicit BranchTable(std::vector<BranchEntry<T>> entries) : entries_(std::move(entries)) {}

  const std::vector<BranchEntry<T>>& entries() const { return entries_; }

  const BranchEntry<T>& sample(RngStream& s) const {
    const double u = s.uniform();
    double cum = 0.0;
    for (const auto& e : entries_) {
      cum += e.probability;
      if (u < cum) return e;
    }
    return entries_.back();
  }

 private:
  std::vector<BranchEntry<T>> entries_;
};

template <typename T>
BranchTable<T> make_branch_table(const std::vector<RawBranch<T>>& raw) {
  double total = 0.0;
  for (const auto& r : raw) {
    if (r.weight < 0.0) throw std::invalid_argument("branch table: negative weight");
    total += r.weight;
  }
  if (!(total > 0.0)) throw std::invalid_argument("branch table: zero total weight");

  std::vector<BranchEntry<T>> entries;
  entries.reserve(raw.size());
  for (const auto& r : raw) {
    if (r.weight == 0.0) {
      if (std::abs(r.coefficient) != 0.0)
        throw std::invalid_argument("branch table: entry '" + r.tag +
                                    "' has zero weight but nonzero coefficient");
      continue;  // dropped
    }
    BranchEntry<T> e;
    e.tag = r.tag;
    e.probability = r.weight / total;
    e.coefficient = r.coefficient;
    e.multiplier = r.coefficient / e.probability;
    e.arity = r.arity;
    e.n_children = r.n_children;
    e.poisson_min = r.poisson_min;
    entries.push_back(std::move(e));
  }
  return BranchTable<T>(std::move(entries));
}

using RealBranchTable = BranchTable<double>;
using ComplexBranchTable = BranchTable<std::complex<double>>;

}  // namespace solbranch
