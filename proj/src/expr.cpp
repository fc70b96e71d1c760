#include "solbranch/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace solbranch {

bool Expr::operator==(const Expr& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::number:
      return number == other.number;
    case Kind::variable:
      return var == other.var;
    case Kind::call:
      if (fn != other.fn || powi_exponent != other.powi_exponent) return false;
      break;
    default:
      break;
  }
  if (children.size() != other.children.size()) return false;
  for (size_t i = 0; i < children.size(); ++i)
    if (!(children[i] == other.children[i])) return false;
  return true;
}

namespace {

struct Parser {
  const std::string& text;
  const std::vector<std::string>& vars;
  size_t pos = 0;

  [[noreturn]] void fail(size_t at, const std::string& msg) const {
    throw ParseError(static_cast<int>(at) + 1, msg);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  Expr parse() {
    Expr e = sum();
    skip_ws();
    if (pos != text.size()) fail(pos, "unexpected trailing input");
    return e;
  }

  Expr sum() {
    Expr e = product();
    for (;;) {
      if (eat('+')) {
        Expr r;
        r.kind = Expr::Kind::add;
        r.children = {std::move(e), product()};
        e = std::move(r);
      } else if (eat('-')) {
        Expr r;
        r.kind = Expr::Kind::sub;
        r.children = {std::move(e), product()};
        e = std::move(r);
      } else {
        return e;
      }
    }
  }

  Expr product() {
    Expr e = unary();
    for (;;) {
      if (eat('*')) {
        Expr r;
        r.kind = Expr::Kind::mul;
        r.children = {std::move(e), unary()};
        e = std::move(r);
      } else if (eat('/')) {
        Expr r;
        r.kind = Expr::Kind::div;
        r.children = {std::move(e), unary()};
        e = std::move(r);
      } else {
        return e;
      }
    }
  }

  Expr unary() {
    if (eat('-')) {
      Expr r;
      r.kind = Expr::Kind::negate;
      r.children = {unary()};
      return r;
    }
    return power();
  }

  // Right-associative, binds above unary minus: 2^3^2 = 2^(3^2), -2^2 = -(2^2).
  Expr power() {
    Expr base = atom();
    if (eat('^')) {
      Expr r;
      r.kind = Expr::Kind::pow;
      r.children = {std::move(base), unary()};
      return r;
    }
    return base;
  }

  Expr atom() {
    skip_ws();
    if (pos >= text.size()) fail(pos, "unexpected end of input");
    const char c = text[pos];
    if (c == '(') {
      ++pos;
      Expr e = sum();
      if (!eat(')')) fail(pos, "expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(pos, std::string("unexpected character '") + c + "'");
  }

  Expr number() {
    const size_t start = pos;
    const char* begin = text.c_str() + pos;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) fail(start, "malformed number");
    pos += static_cast<size_t>(end - begin);
    Expr e;
    e.kind = Expr::Kind::number;
    e.number = v;
    return e;
  }

  Expr identifier() {
    const size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    const std::string name = text.substr(start, pos - start);

    if (peek() == '(') {
      if (name == "powi") return powi_call(start);
      if (name != "sin" && name != "cos" && name != "exp" && name != "log" && name != "sqrt")
        fail(start, "unknown function '" + name + "'");
      eat('(');
      Expr e;
      e.kind = Expr::Kind::call;
      e.fn = name;
      e.children = {sum()};
      if (!eat(')')) fail(pos, "expected ')' after call argument");
      return e;
    }

    for (size_t i = 0; i < vars.size(); ++i) {
      if (vars[i] == name) {
        Expr e;
        e.kind = Expr::Kind::variable;
        e.var = static_cast<int>(i);
        return e;
      }
    }
    fail(start, "unknown identifier '" + name + "'");
  }

  Expr powi_call(size_t start) {
    eat('(');
    Expr e;
    e.kind = Expr::Kind::call;
    e.fn = "powi";
    e.children = {sum()};
    if (!eat(',')) fail(pos, "powi takes two arguments");
    skip_ws();
    const size_t expo_at = pos;
    bool neg = eat('-');
    skip_ws();
    if (pos >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos])))
      fail(expo_at, "powi exponent must be an integer literal");
    long v = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      v = v * 10 + (text[pos] - '0');
      ++pos;
    }
    e.powi_exponent = neg ? -v : v;
    if (!eat(')')) fail(pos, "expected ')' after powi exponent");
    (void)start;
    return e;
  }
};

int precedence(Expr::Kind k) {
  switch (k) {
    case Expr::Kind::add:
    case Expr::Kind::sub:
      return 1;
    case Expr::Kind::mul:
    case Expr::Kind::div:
      return 2;
    case Expr::Kind::negate:
      return 3;
    case Expr::Kind::pow:
      return 4;
    default:
      return 5;
  }
}

void print(const Expr& e, const std::vector<std::string>& names, std::string& out) {
  auto child = [&](const Expr& c, bool needs_paren) {
    if (needs_paren) out += '(';
    print(c, names, out);
    if (needs_paren) out += ')';
  };
  switch (e.kind) {
    case Expr::Kind::number: {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.17g", e.number);
      out += buf;
      break;
    }
    case Expr::Kind::variable:
      out += names[static_cast<size_t>(e.var)];
      break;
    case Expr::Kind::negate:
      out += '-';
      child(e.children[0], precedence(e.children[0].kind) < precedence(e.kind));
      break;
    case Expr::Kind::add:
    case Expr::Kind::sub: {
      child(e.children[0], precedence(e.children[0].kind) < 1);
      out += e.kind == Expr::Kind::add ? " + " : " - ";
      child(e.children[1], precedence(e.children[1].kind) <= 1);
      break;
    }
    case Expr::Kind::mul:
    case Expr::Kind::div: {
      child(e.children[0], precedence(e.children[0].kind) < 2);
      out += e.kind == Expr::Kind::mul ? "*" : "/";
      child(e.children[1], precedence(e.children[1].kind) <= 2);
      break;
    }
    case Expr::Kind::pow: {
      child(e.children[0], precedence(e.children[0].kind) <= 4);
      out += '^';
      child(e.children[1], precedence(e.children[1].kind) < 4);
      break;
    }
    case Expr::Kind::call: {
      out += e.fn;
      out += '(';
      print(e.children[0], names, out);
      if (e.fn == "powi") {
        out += ", ";
        out += std::to_string(e.powi_exponent);
      }
      out += ')';
      break;
    }
  }
}

// Shared evaluation skeleton; Ops adapts scalar doubles and jets.
template <typename T, typename Ops>
T eval_impl(const Expr& e, const std::vector<T>& bindings, const Ops& ops) {
  switch (e.kind) {
    case Expr::Kind::number:
      return ops.constant(e.number);
    case Expr::Kind::variable:
      return bindings.at(static_cast<size_t>(e.var));
    case Expr::Kind::negate:
      return ops.neg(eval_impl(e.children[0], bindings, ops));
    case Expr::Kind::add:
      return ops.add(eval_impl(e.children[0], bindings, ops),
                     eval_impl(e.children[1], bindings, ops));
    case Expr::Kind::sub:
      return ops.sub(eval_impl(e.children[0], bindings, ops),
                     eval_impl(e.children[1], bindings, ops));
    case Expr::Kind::mul:
      return ops.mul(eval_impl(e.children[0], bindings, ops),
                     eval_impl(e.children[1], bindings, ops));
    case Expr::Kind::div:
      return ops.div(eval_impl(e.children[0], bindings, ops),
                     eval_impl(e.children[1], bindings, ops));
    case Expr::Kind::pow: {
      const Expr& rhs = e.children[1];
      const T base = eval_impl(e.children[0], bindings, ops);
      // Integer exponents stay exact (and sign-safe) as repeated products.
      if (rhs.kind == Expr::Kind::number && rhs.number == std::floor(rhs.number) &&
          std::abs(rhs.number) <= 1e9)
        return ops.powi(base, static_cast<long>(rhs.number));
      if (rhs.kind == Expr::Kind::negate && rhs.children[0].kind == Expr::Kind::number &&
          rhs.children[0].number == std::floor(rhs.children[0].number) &&
          std::abs(rhs.children[0].number) <= 1e9)
        return ops.powi(base, -static_cast<long>(rhs.children[0].number));
      return ops.pow(base, eval_impl(rhs, bindings, ops));
    }
    case Expr::Kind::call: {
      const T a = eval_impl(e.children[0], bindings, ops);
      if (e.fn == "sin") return ops.sin(a);
      if (e.fn == "cos") return ops.cos(a);
      if (e.fn == "exp") return ops.exp(a);
      if (e.fn == "log") return ops.log(a);
      if (e.fn == "sqrt") return ops.sqrt(a);
      return ops.powi(a, e.powi_exponent);  // powi
    }
  }
  throw std::logic_error("unreachable expression kind");
}

struct ScalarOps {
  double eps_div;
  double constant(double v) const { return v; }
  double neg(double a) const { return -a; }
  double add(double a, double b) const { return a + b; }
  double sub(double a, double b) const { return a - b; }
  double mul(double a, double b) const { return a * b; }
  double div(double a, double b) const {
    if (std::abs(b) < eps_div)
      throw GuardError(Guard::division, "scalar division by near-zero value");
    return a / b;
  }
  double sin(double a) const { return std::sin(a); }
  double cos(double a) const { return std::cos(a); }
  double exp(double a) const { return std::exp(a); }
  double log(double a) const {
    if (!(a > eps_div)) throw GuardError(Guard::domain, "log of non-positive value");
    return std::log(a);
  }
  double sqrt(double a) const {
    if (a < 0.0) throw GuardError(Guard::domain, "sqrt of negative value");
    return std::sqrt(a);
  }
  double pow(double a, double b) const {
    if (!(a > 0.0)) throw GuardError(Guard::domain, "pow with non-positive base");
    return std::pow(a, b);
  }
  double powi(double a, long n) const {
    if (n < 0) return 1.0 / powi(a, -n);
    double r = 1.0, base = a;
    for (long e = n; e > 0; e >>= 1) {
      if (e & 1) r *= base;
      if (e > 1) base *= base;
    }
    return r;
  }
};

template <typename J>
struct JetOps {
  double eps_div;
  int order;
  J constant(double v) const { return J::constant(v, order); }
  J neg(const J& a) const { return -a; }
  J add(const J& a, const J& b) const { return a + b; }
  J sub(const J& a, const J& b) const { return a - b; }
  J mul(const J& a, const J& b) const { return a * b; }
  J div(const J& a, const J& b) const { return solbranch::div(a, b, eps_div); }
  J sin(const J& a) const { return solbranch::sin(a); }
  J cos(const J& a) const { return solbranch::cos(a); }
  J exp(const J& a) const { return solbranch::exp(a); }
  J log(const J& a) const { return solbranch::log(a, eps_div); }
  J sqrt(const J& a) const { return solbranch::sqrt(a, eps_div); }
  J pow(const J& a, const J& b) const { return solbranch::exp(b * solbranch::log(a, eps_div)); }
  J powi(const J& a, long n) const { return solbranch::powi(a, n, eps_div); }
};

}  // namespace

Expr parse_expression(const std::string& text, const std::vector<std::string>& allowed_vars) {
  Parser p{text, allowed_vars};
  return p.parse();
}

std::string to_string(const Expr& e, const std::vector<std::string>& var_names) {
  std::string out;
  print(e, var_names, out);
  return out;
}

double eval_scalar(const Expr& e, const std::vector<double>& bindings, double eps_div) {
  return eval_impl(e, bindings, ScalarOps{eps_div});
}

Jet1 eval_jet(const Expr& e, const std::vector<Jet1>& bindings, double eps_div) {
  const int order = bindings.empty() ? 0 : bindings.front().order();
  return eval_impl(e, bindings, JetOps<Jet1>{eps_div, order});
}

Jet2 eval_jet(const Expr& e, const std::vector<Jet2>& bindings, double eps_div) {
  const int order = bindings.empty() ? 0 : bindings.front().order();
  return eval_impl(e, bindings, JetOps<Jet2>{eps_div, order});
}

}  // namespace solbranch
