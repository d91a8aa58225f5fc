#include "alg/expr.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>

namespace alg {

struct Expr::Node {
  ExprKind kind = ExprKind::Constant;
  double value = 0.0;                 // Constant
  int exponent = 0;                   // Pow
  std::string name;                   // Variable
  std::shared_ptr<const Node> a;      // lhs / unary child / Pow base
  std::shared_ptr<const Node> b;      // rhs
};

namespace {

bool is_binary(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return true;
    default:
      return false;
  }
}

bool is_unary(ExprKind k) {
  switch (k) {
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      return true;
    default:
      return false;
  }
}

}  // namespace

EvalEnv::EvalEnv(std::span<const std::string> names,
                 std::span<const double> values)
    : names_(names), values_(values) {
  if (names.size() != values.size()) {
    throw ShapeError("EvalEnv: " + std::to_string(names.size()) +
                     " names vs " + std::to_string(values.size()) +
                     " values");
  }
}

double EvalEnv::lookup(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return values_[i];
  }
  throw EvalError("unbound variable", std::string(name));
}

Expr::Expr() {
  // Shared singleton: default expressions are the constant 0.
  static const Expr zero = constant(0.0);
  node_ = zero.node_;
}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Constant;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::add(Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Add;
  n->a = std::move(lhs.node_);
  n->b = std::move(rhs.node_);
  return Expr(std::move(n));
}

Expr Expr::sub(Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Sub;
  n->a = std::move(lhs.node_);
  n->b = std::move(rhs.node_);
  return Expr(std::move(n));
}

Expr Expr::mul(Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Mul;
  n->a = std::move(lhs.node_);
  n->b = std::move(rhs.node_);
  return Expr(std::move(n));
}

Expr Expr::div(Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Div;
  n->a = std::move(lhs.node_);
  n->b = std::move(rhs.node_);
  return Expr(std::move(n));
}

Expr Expr::pow(Expr base, int exponent) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pow;
  n->a = std::move(base.node_);
  n->exponent = exponent;
  return Expr(std::move(n));
}

Expr Expr::neg(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Neg;
  n->a = std::move(operand.node_);
  return Expr(std::move(n));
}

Expr Expr::sin(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Sin;
  n->a = std::move(operand.node_);
  return Expr(std::move(n));
}

Expr Expr::cos(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Cos;
  n->a = std::move(operand.node_);
  return Expr(std::move(n));
}

Expr Expr::exp(Expr operand) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Exp;
  n->a = std::move(operand.node_);
  return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }

bool Expr::is_constant(double value) const {
  return node_->kind == ExprKind::Constant && node_->value == value;
}

double Expr::value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Expr Expr::lhs() const { return Expr(node_->a); }
Expr Expr::rhs() const { return Expr(node_->b); }
Expr Expr::child() const { return Expr(node_->a); }
int Expr::exponent() const { return node_->exponent; }

std::size_t Expr::node_count() const {
  std::size_t n = 1;
  if (is_binary(node_->kind)) {
    n += lhs().node_count() + rhs().node_count();
  } else if (is_unary(node_->kind) || node_->kind == ExprKind::Pow) {
    n += child().node_count();
  }
  return n;
}

// ---------------------------------------------------------------------------
// Building operators with local folding.

Expr operator+(const Expr& a, const Expr& b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
    return Expr::constant(a.value() + b.value());
  }
  if (a.is_constant(0.0)) return b;
  if (b.is_constant(0.0)) return a;
  return Expr::add(a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
    return Expr::constant(a.value() - b.value());
  }
  if (b.is_constant(0.0)) return a;
  if (a.is_constant(0.0)) return -b;
  return Expr::sub(a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant) {
    return Expr::constant(a.value() * b.value());
  }
  if (a.is_constant(0.0) || b.is_constant(0.0)) return Expr::constant(0.0);
  if (a.is_constant(1.0)) return b;
  if (b.is_constant(1.0)) return a;
  return Expr::mul(a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (a.kind() == ExprKind::Constant && b.kind() == ExprKind::Constant &&
      b.value() != 0.0) {
    return Expr::constant(a.value() / b.value());
  }
  if (b.is_constant(1.0)) return a;
  return Expr::div(a, b);
}

Expr operator-(const Expr& a) {
  if (a.kind() == ExprKind::Constant) return Expr::constant(-a.value());
  if (a.kind() == ExprKind::Neg) return a.child();
  return Expr::neg(a);
}

Expr pow(const Expr& base, int exponent) {
  if (exponent == 0) return Expr::constant(1.0);
  if (exponent == 1) return base;
  return Expr::pow(base, exponent);
}

Expr sin(const Expr& a) { return Expr::sin(a); }
Expr cos(const Expr& a) { return Expr::cos(a); }
Expr exp(const Expr& a) { return Expr::exp(a); }

// ---------------------------------------------------------------------------
// Evaluation.

namespace {

// Exact repeated multiplication keeps integer powers deterministic.
double ipow(double base, int n) {
  double result = 1.0;
  double acc = base;
  for (int k = n; k > 0; k >>= 1) {
    if (k & 1) result *= acc;
    if (k > 1) acc *= acc;
  }
  return result;
}

}  // namespace

double eval(const Expr& e, const EvalEnv& env) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e.value();
    case ExprKind::Variable:
      return env.lookup(e.name());
    case ExprKind::Add:
      return eval(e.lhs(), env) + eval(e.rhs(), env);
    case ExprKind::Sub:
      return eval(e.lhs(), env) - eval(e.rhs(), env);
    case ExprKind::Mul:
      return eval(e.lhs(), env) * eval(e.rhs(), env);
    case ExprKind::Div: {
      double den = eval(e.rhs(), env);
      if (den == 0.0) throw EvalError("division by zero", to_string(e));
      return eval(e.lhs(), env) / den;
    }
    case ExprKind::Pow: {
      double base = eval(e.child(), env);
      int k = e.exponent();
      if (k >= 0) return ipow(base, k);
      if (base == 0.0) {
        throw EvalError("zero raised to a negative power", to_string(e));
      }
      return 1.0 / ipow(base, -k);
    }
    case ExprKind::Neg:
      return -eval(e.child(), env);
    case ExprKind::Sin:
      return std::sin(eval(e.child(), env));
    case ExprKind::Cos:
      return std::cos(eval(e.child(), env));
    case ExprKind::Exp:
      return std::exp(eval(e.child(), env));
  }
  throw Error("eval: unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Differentiation.

Expr diff(const Expr& e, std::string_view variable) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return Expr::constant(0.0);
    case ExprKind::Variable:
      return Expr::constant(e.name() == variable ? 1.0 : 0.0);
    case ExprKind::Add:
      return diff(e.lhs(), variable) + diff(e.rhs(), variable);
    case ExprKind::Sub:
      return diff(e.lhs(), variable) - diff(e.rhs(), variable);
    case ExprKind::Mul:
      return diff(e.lhs(), variable) * e.rhs() +
             e.lhs() * diff(e.rhs(), variable);
    case ExprKind::Div:
      // (a/b)' = (a'b - ab') / b^2
      return (diff(e.lhs(), variable) * e.rhs() -
              e.lhs() * diff(e.rhs(), variable)) /
             pow(e.rhs(), 2);
    case ExprKind::Pow:
      // (b^k)' = k b^(k-1) b'
      return Expr::constant(double(e.exponent())) *
             pow(e.child(), e.exponent() - 1) * diff(e.child(), variable);
    case ExprKind::Neg:
      return -diff(e.child(), variable);
    case ExprKind::Sin:
      return cos(e.child()) * diff(e.child(), variable);
    case ExprKind::Cos:
      return -(sin(e.child()) * diff(e.child(), variable));
    case ExprKind::Exp:
      return exp(e.child()) * diff(e.child(), variable);
  }
  throw Error("diff: unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Structural equality, simplification, substitution.

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ExprKind::Constant:
      return a.value() == b.value();
    case ExprKind::Variable:
      return a.name() == b.name();
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
      return structurally_equal(a.lhs(), b.lhs()) &&
             structurally_equal(a.rhs(), b.rhs());
    case ExprKind::Pow:
      return a.exponent() == b.exponent() &&
             structurally_equal(a.child(), b.child());
    case ExprKind::Neg:
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp:
      return structurally_equal(a.child(), b.child());
  }
  return false;
}

Expr simplify(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Constant:
    case ExprKind::Variable:
      return e;
    case ExprKind::Add: {
      Expr a = simplify(e.lhs());
      Expr b = simplify(e.rhs());
      // a + (-a) and (-a) + a fold to 0.
      if (b.kind() == ExprKind::Neg && structurally_equal(a, b.child())) {
        return Expr::constant(0.0);
      }
      if (a.kind() == ExprKind::Neg && structurally_equal(a.child(), b)) {
        return Expr::constant(0.0);
      }
      return a + b;
    }
    case ExprKind::Sub: {
      Expr a = simplify(e.lhs());
      Expr b = simplify(e.rhs());
      if (structurally_equal(a, b)) return Expr::constant(0.0);
      return a - b;
    }
    case ExprKind::Mul:
      return simplify(e.lhs()) * simplify(e.rhs());
    case ExprKind::Div: {
      Expr a = simplify(e.lhs());
      Expr b = simplify(e.rhs());
      return a / b;
    }
    case ExprKind::Pow:
      return pow(simplify(e.child()), e.exponent());
    case ExprKind::Neg:
      return -simplify(e.child());
    case ExprKind::Sin: {
      Expr c = simplify(e.child());
      if (c.kind() == ExprKind::Constant) {
        return Expr::constant(std::sin(c.value()));
      }
      return Expr::sin(std::move(c));
    }
    case ExprKind::Cos: {
      Expr c = simplify(e.child());
      if (c.kind() == ExprKind::Constant) {
        return Expr::constant(std::cos(c.value()));
      }
      return Expr::cos(std::move(c));
    }
    case ExprKind::Exp: {
      Expr c = simplify(e.child());
      if (c.kind() == ExprKind::Constant) {
        return Expr::constant(std::exp(c.value()));
      }
      return Expr::exp(std::move(c));
    }
  }
  throw Error("simplify: unreachable expression kind");
}

Expr substitute(const Expr& e,
                std::span<const std::pair<std::string, Expr>> bindings) {
  switch (e.kind()) {
    case ExprKind::Constant:
      return e;
    case ExprKind::Variable: {
      for (const auto& [name, replacement] : bindings) {
        if (name == e.name()) return replacement;
      }
      return e;
    }
    case ExprKind::Add:
      return Expr::add(substitute(e.lhs(), bindings),
                       substitute(e.rhs(), bindings));
    case ExprKind::Sub:
      return Expr::sub(substitute(e.lhs(), bindings),
                       substitute(e.rhs(), bindings));
    case ExprKind::Mul:
      return Expr::mul(substitute(e.lhs(), bindings),
                       substitute(e.rhs(), bindings));
    case ExprKind::Div:
      return Expr::div(substitute(e.lhs(), bindings),
                       substitute(e.rhs(), bindings));
    case ExprKind::Pow:
      return Expr::pow(substitute(e.child(), bindings), e.exponent());
    case ExprKind::Neg:
      return Expr::neg(substitute(e.child(), bindings));
    case ExprKind::Sin:
      return Expr::sin(substitute(e.child(), bindings));
    case ExprKind::Cos:
      return Expr::cos(substitute(e.child(), bindings));
    case ExprKind::Exp:
      return Expr::exp(substitute(e.child(), bindings));
  }
  throw Error("substitute: unreachable expression kind");
}

// ---------------------------------------------------------------------------
// Printing.

std::string format_real(double value) {
  // Shortest form among %.15g / %.16g / %.17g that scans back exactly.
  char buf[64];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) break;
  }
  return buf;
}

namespace {

// Precedence levels: additive 1, multiplicative 2, unary 3, power 4,
// atoms 5.  A child is parenthesized when its level is lower than the
// context requires.
void print_node(const Expr& e, int min_level, std::string& out) {
  switch (e.kind()) {
    case ExprKind::Constant: {
      double v = e.value();
      if (v < 0.0) {
        // Render through unary minus so the token stream stays inside the
        // grammar (numbers are unsigned there).
        bool parens = 3 < min_level;
        if (parens) out += '(';
        out += '-';
        out += format_real(-v);
        if (parens) out += ')';
      } else {
        out += format_real(v);
      }
      return;
    }
    case ExprKind::Variable:
      out += e.name();
      return;
    case ExprKind::Add: {
      bool parens = 1 < min_level;
      if (parens) out += '(';
      print_node(e.lhs(), 1, out);
      out += " + ";
      print_node(e.rhs(), 2, out);  // "a + b - c" would reparse differently
      if (parens) out += ')';
      return;
    }
    case ExprKind::Sub: {
      bool parens = 1 < min_level;
      if (parens) out += '(';
      print_node(e.lhs(), 1, out);
      out += " - ";
      print_node(e.rhs(), 2, out);
      if (parens) out += ')';
      return;
    }
    case ExprKind::Mul: {
      bool parens = 2 < min_level;
      if (parens) out += '(';
      print_node(e.lhs(), 2, out);
      out += " * ";
      print_node(e.rhs(), 3, out);
      if (parens) out += ')';
      return;
    }
    case ExprKind::Div: {
      bool parens = 2 < min_level;
      if (parens) out += '(';
      print_node(e.lhs(), 2, out);
      out += " / ";
      print_node(e.rhs(), 3, out);
      if (parens) out += ')';
      return;
    }
    case ExprKind::Neg: {
      bool parens = 3 < min_level;
      if (parens) out += '(';
      out += '-';
      print_node(e.child(), 3, out);
      if (parens) out += ')';
      return;
    }
    case ExprKind::Pow: {
      bool parens = 4 < min_level;
      if (parens) out += '(';
      print_node(e.child(), 5, out);
      out += '^';
      if (e.exponent() < 0) {
        out += '(';
        out += std::to_string(e.exponent());
        out += ')';
      } else {
        out += std::to_string(e.exponent());
      }
      if (parens) out += ')';
      return;
    }
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Exp: {
      out += e.kind() == ExprKind::Sin   ? "sin"
             : e.kind() == ExprKind::Cos ? "cos"
                                         : "exp";
      out += '(';
      print_node(e.child(), 1, out);
      out += ')';
      return;
    }
  }
}

}  // namespace

std::string to_string(const Expr& e) {
  std::string out;
  print_node(e, 1, out);
  return out;
}

std::vector<std::string> free_variables(const Expr& e) {
  std::set<std::string> seen;
  // Iterative walk to avoid building intermediate vectors.
  std::vector<Expr> stack{e};
  while (!stack.empty()) {
    Expr top = stack.back();
    stack.pop_back();
    switch (top.kind()) {
      case ExprKind::Constant:
        break;
      case ExprKind::Variable:
        seen.insert(top.name());
        break;
      case ExprKind::Add:
      case ExprKind::Sub:
      case ExprKind::Mul:
      case ExprKind::Div:
        stack.push_back(top.lhs());
        stack.push_back(top.rhs());
        break;
      case ExprKind::Pow:
      case ExprKind::Neg:
      case ExprKind::Sin:
      case ExprKind::Cos:
      case ExprKind::Exp:
        stack.push_back(top.child());
        break;
    }
  }
  return {seen.begin(), seen.end()};
}

}  // namespace alg
