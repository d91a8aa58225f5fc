#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "alg/check.hpp"
#include "alg/expr_matrix.hpp"
#include "alg/fields.hpp"

namespace alg {

class Algebroid;
using AlgebroidPtr = std::shared_ptr<const Algebroid>;

// Section of the bundle: fiber components over the base coordinates,
// expressed in the standard frame e_1..e_m.
struct Section {
  AlgebroidPtr parent;
  std::vector<Expr> components;

  Section() = default;
  Section(AlgebroidPtr parent, std::vector<Expr> components);

  Point eval_at(const Point& base_point) const;
};

// Bracket rule attached to a construction: takes two component lists over
// the base chart, returns the bracket's components.
using BracketRule = std::function<std::vector<Expr>(
    std::span<const Expr>, std::span<const Expr>)>;

// Anchored vector bundle over a chart with a bilinear, antisymmetric bracket
// on sections.  The two defining axioms are not assumed; they are checked
// numerically by the verifiers below.
class Algebroid : public std::enable_shared_from_this<Algebroid> {
 public:
  Algebroid(std::string label, Chart base, int fiber_dim, ExprMatrix anchor,
            BracketRule bracket);

  const std::string& label() const { return label_; }
  const Chart& base() const { return base_; }
  int fiber_dim() const { return fiber_dim_; }
  // n x m matrix over the base coordinates; column k is the anchor image of
  // the frame section e_k.
  const ExprMatrix& anchor() const { return anchor_; }

  std::vector<Expr> bracket_components(std::span<const Expr> s1,
                                       std::span<const Expr> s2) const;

 private:
  std::string label_;
  Chart base_;
  int fiber_dim_;
  ExprMatrix anchor_;
  BracketRule bracket_;
};

AlgebroidPtr make_algebroid(std::string label, Chart base, int fiber_dim,
                            ExprMatrix anchor, BracketRule bracket);

Section bracket(const Section& s1, const Section& s2);

// The vector field rho(s) on the base.
VectorField anchor_apply(const Algebroid& a, const Section& s);

// Derivative of a base function along the anchor image of s.
Expr anchor_derivative(const Algebroid& a, std::span<const Expr> s,
                       const Expr& f);

Section frame_section(AlgebroidPtr a, int index);
Section make_section(AlgebroidPtr a, std::vector<Expr> components);

// Tangent algebroid: E = TM, identity anchor, coordinate Lie bracket.
AlgebroidPtr tangent_algebroid(Chart chart);

// Antisymmetric structure functions C^k_{ij} over the base chart,
// k, i, j in 0..m-1.
class StructureFunctions {
 public:
  StructureFunctions(int fiber_dim);
  int fiber_dim() const { return m_; }
  // set stores the value and its negation at the transposed slot.
  void set(int k, int i, int j, Expr value);
  const Expr& at(int k, int i, int j) const;

 private:
  int m_;
  std::vector<Expr> values_;
};

// General algebroid presented by anchor columns and structure functions:
//   [s1, s2]^k = sum_ij s1^i s2^j C^k_ij + rho(s1)(s2^k) - rho(s2)(s1^k).
// Antisymmetry of the bracket holds by construction; the axioms do not, and
// stay the verifiers' business.
AlgebroidPtr structure_algebroid(std::string label, Chart base,
                                 ExprMatrix anchor,
                                 StructureFunctions structure);

// Axiom 1: rho([s1,s2]_E) = [rho(s1), rho(s2)] as vector fields, sampled.
CheckReport verify_anchor_homomorphism(const Algebroid& a, const Section& s1,
                                       const Section& s2,
                                       const SampleSpec& spec, double tol,
                                       Exec exec = Exec::Parallel);

// Axiom 2 (Leibniz): [s1, g s2]_E = g [s1,s2]_E + rho(s1)(g) s2, sampled.
CheckReport verify_leibniz(const Algebroid& a, const Section& s1,
                           const Section& s2, const Expr& g,
                           const SampleSpec& spec, double tol,
                           Exec exec = Exec::Parallel);

// Jacobi defect [[s1,s2],s3] + [[s2,s3],s1] + [[s3,s1],s2] as a section.
Section jacobi_residual(const Section& s1, const Section& s2,
                        const Section& s3);

// Max-norm of the Jacobi defect over sampled points.
CheckReport verify_jacobi(const Section& s1, const Section& s2,
                          const Section& s3, const SampleSpec& spec,
                          double tol, Exec exec = Exec::Parallel);

}  // namespace alg
