#pragma once

#include <string>
#include <utility>
#include <vector>

#include "alg/check.hpp"
#include "alg/fields.hpp"
#include "alg/tower.hpp"

namespace alg {

// Jet calculus for one scalar unknown u of two independent variables x, y.
// Everything is desk-scale: prolongation and contact forms cap at order 3.

// Symmetrized derivative multi-index: p derivatives in x, q in y.
struct JetIndex {
  int p = 0;
  int q = 0;

  int order() const { return p + q; }
  bool operator==(const JetIndex& other) const {
    return p == other.p && q == other.q;
  }
};

// "u" for the empty index, otherwise "u_" + p copies of 'x' + q of 'y'.
std::string jet_coordinate_name(const JetIndex& j);

// Chart x, y, u, then u_J for 1 <= |J| <= order, indices ordered by order
// and x-count within an order.  Coordinate count is 2 + (n+1)(n+2)/2.
struct JetChart {
  int order = 0;
  Chart chart;

  explicit JetChart(int order);

  // All indices 0 <= |J| <= order in chart order, starting with (0,0).
  std::vector<JetIndex> indices() const;
  // Chart slot of u_J.
  int position(const JetIndex& j) const;
};

// d/d(direction) treating u and its derivatives as functions of (x, y):
// the coordinate partial plus sum of u_{J + direction} d/du_J.  Direction 0
// is x, 1 is y.  The result lives one order higher.
Expr total_derivative(const JetChart& source, const Expr& e, int direction);

// First-order system u_x = phi(x,y,u), u_y = psi(x,y,u).
struct PDESystem1 {
  Expr phi;
  Expr psi;
};

// Validates that both right-hand sides only use x, y, u.
PDESystem1 make_pde_system(Expr phi, Expr psi);

// Closed-form cross-derivative obstruction
//   dpsi/dx + phi dpsi/du - dphi/dy - psi dphi/du
// over (x, y, u); the system has solutions through every point iff it
// vanishes identically.
Expr integrability_residual(const PDESystem1& s);

// The same obstruction computed as D_x psi - D_y phi with u_x, u_y
// substituted by phi, psi; agrees with integrability_residual everywhere.
Expr integrability_residual_total_form(const PDESystem1& s);

// The two fields X = d/dx + phi d/du, Y = d/dy + psi d/du spanning the
// system's rank-2 distribution on (x, y, u).
std::pair<VectorField, VectorField> system_fields(const PDESystem1& s);

// Max-norm of [X, Y] at samples.  The bracket's only possibly nonzero
// component is along d/du and equals the closed-form obstruction; the two
// are compared at every sample and a mismatch marks the report failed.
CheckReport involutivity_check(const PDESystem1& s, const SampleSpec& spec,
                               double tol, Exec exec = Exec::Parallel);

// Characteristic Q = c - a u_x - b u_y of the field a d/dx + b d/dy
// + c d/du, over the order-1 jet chart.
Expr characteristic(const VectorField& v);

// Prolongs a field on (x, y, u) to the order-n jet chart by the recursion
//   eta^{J,k} = D_k eta^J - u_{J,x} D_k a - u_{J,y} D_k b,  eta^{()} = c.
// The order-0 truncation is the input field.  Requires 0 <= n <= 3.
VectorField prolong(const VectorField& v, int order);

// Residual of prolong([V, W]) - [prolong(V), prolong(W)] at jet samples.
CheckReport prolong_bracket_check(const VectorField& v, const VectorField& w,
                                  int order, const SampleSpec& spec,
                                  double tol, Exec exec = Exec::Parallel);

// One-form du_J - u_{Jx} dx - u_{Jy} dy on the order-n jet chart.
struct ContactForm {
  JetIndex index;
  std::vector<Expr> coefficients;  // one per jet chart coordinate
};

// The contact ideal's generators theta_J for |J| <= order - 1.  Requires
// 1 <= order <= 3.
std::vector<ContactForm> cartan_contact_forms(int order);

// <form, field> as an expression over the jet chart.
Expr contact_pairing(const ContactForm& form, const VectorField& field);

// Truncated total-derivative direction on the order-n jet chart: the
// coordinate direction plus u_{J + direction} d/du_J for |J| < n (the top
// order has no lift inside the chart).
VectorField total_derivative_lift(int order, int direction);

// Jet charts of orders 0..max_order with truncation steps, coarsest first:
// the finite stages of the infinite jet space.
ProjectiveSystem jet_system(int max_order);

}  // namespace alg
