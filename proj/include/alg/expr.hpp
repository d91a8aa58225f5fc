#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "alg/errors.hpp"

namespace alg {

enum class ExprKind {
  Constant,
  Variable,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // integer exponent only
  Neg,
  Sin,
  Cos,
  Exp,
};

// Name/value bindings used during evaluation.  Non-owning view: the caller
// keeps the name and value arrays alive for the duration of the eval call.
class EvalEnv {
 public:
  EvalEnv(std::span<const std::string> names, std::span<const double> values);

  // Throws EvalError if the name is not bound.
  double lookup(std::string_view name) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::span<const std::string> names_;
  std::span<const double> values_;
};

// Immutable symbolic expression.  Cheap to copy (shared subtrees), safe to
// evaluate concurrently from many threads.
class Expr {
 public:
  Expr();  // the constant 0

  // Raw structural factories: build exactly the requested node.
  static Expr constant(double value);
  static Expr variable(std::string name);
  static Expr add(Expr lhs, Expr rhs);
  static Expr sub(Expr lhs, Expr rhs);
  static Expr mul(Expr lhs, Expr rhs);
  static Expr div(Expr lhs, Expr rhs);
  static Expr pow(Expr base, int exponent);
  static Expr neg(Expr operand);
  static Expr sin(Expr operand);
  static Expr cos(Expr operand);
  static Expr exp(Expr operand);

  ExprKind kind() const;
  bool is_constant(double value) const;  // Constant node with this exact value

  double value() const;            // pre: kind() == Constant
  const std::string& name() const; // pre: kind() == Variable
  Expr lhs() const;                // pre: binary node
  Expr rhs() const;                // pre: binary node
  Expr child() const;              // pre: unary node or Pow base
  int exponent() const;            // pre: kind() == Pow

  std::size_t node_count() const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

// Building operators.  These fold locally (constants, 0/1 identities) so
// derived computations do not drown in trivial nodes; they never change the
// value of the expression they denote.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, int exponent);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);

// Exact numeric evaluation.  Throws EvalError on division by zero, zero
// raised to a negative power, or an unbound variable.
double eval(const Expr& e, const EvalEnv& env);

// Exact partial derivative with respect to the named variable.
Expr diff(const Expr& e, std::string_view variable);

// Value-preserving cleanup: folds constants, eliminates 0/1 identities,
// cancels syntactically equal summands.  Idempotent.
Expr simplify(const Expr& e);

// Capture-free substitution of variables by expressions.
Expr substitute(const Expr& e,
                std::span<const std::pair<std::string, Expr>> bindings);

// Precedence-aware printing.  parse_expr(to_string(e)) evaluates identically
// to e at every point.
std::string to_string(const Expr& e);

// Shortest decimal form that scans back to exactly the same double.
std::string format_real(double value);

bool structurally_equal(const Expr& a, const Expr& b);

// Sorted, de-duplicated names of the variables appearing in e.
std::vector<std::string> free_variables(const Expr& e);

// Recursive-descent parser over the documented grammar.  Every identifier
// must be one of `coords` (sin/cos/exp are reserved function names).
Expr parse_expr(std::string_view text, std::span<const std::string> coords);

}  // namespace alg
