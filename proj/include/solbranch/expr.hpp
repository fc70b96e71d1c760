#pragma once

// Closed-form expression trees for initial conditions, sources and weights.
// Parsed once, then evaluated on scalars or on jets (exact derivatives).

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "solbranch/jet.hpp"

namespace solbranch {

class ParseError : public std::runtime_error {
 public:
  ParseError(int column, const std::string& msg)
      : std::runtime_error(msg + " (column " + std::to_string(column) + ")"),
        column(column) {}
  int column;  // 1-based
};

struct Expr {
  enum class Kind { number, variable, negate, add, sub, mul, div, pow, call };

  Kind kind = Kind::number;
  double number = 0.0;
  int var = -1;          // index into the declared variable set
  std::string fn;        // call name: sin cos exp log sqrt powi
  long powi_exponent = 0;
  std::vector<Expr> children;

  bool operator==(const Expr& other) const;
};

/// Parse `text` over the declared variable set. Standard precedence
/// (^ above unary minus above * / above + -), ^ right-associative.
/// Rejections carry a 1-based column.
Expr parse_expression(const std::string& text, const std::vector<std::string>& allowed_vars);

/// Round-trips: parse(to_string(e)) is structurally identical to e.
std::string to_string(const Expr& e, const std::vector<std::string>& var_names);

double eval_scalar(const Expr& e, const std::vector<double>& bindings,
                   double eps_div = kDefaultEpsDiv);
Jet1 eval_jet(const Expr& e, const std::vector<Jet1>& bindings,
              double eps_div = kDefaultEpsDiv);
Jet2 eval_jet(const Expr& e, const std::vector<Jet2>& bindings,
              double eps_div = kDefaultEpsDiv);

}  // namespace solbranch
