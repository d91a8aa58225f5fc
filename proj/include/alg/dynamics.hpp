#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "alg/algebroid.hpp"
#include "alg/tower.hpp"

namespace alg {

// Chart of the bundle's total space: the base coordinates followed by the
// fiber coordinates e1..em.  Rejects base charts that already use a fiber
// coordinate name.
Chart total_chart(const Algebroid& a);

// Second-order-type dynamics on an anchored bundle.  Only the acceleration
// components are free data; the base velocity is forced to anchor(x) * e, so
// the trajectory's base point always moves with the anchor image of its own
// fiber vector, and projecting the induced total-space field back to the
// bundle is the identity.
struct Semispray {
  AlgebroidPtr parent;
  Chart total;                     // base coords then e1..em
  std::vector<Expr> acceleration;  // m components over the total chart

  // (anchor(x) e, acceleration(x, e)) as a field on the total chart.
  VectorField total_field() const;
};

Semispray make_semispray(AlgebroidPtr a, std::vector<Expr> acceleration);

// Sampled trajectory through the total space, split into base and fiber
// parts per node.  Node times are strictly increasing.
struct CurveNode {
  double t = 0.0;
  Point base;
  Point fiber;
};

struct DiscreteCurve {
  std::vector<CurveNode> nodes;
  double step = 0.0;
  // Set when evaluation failed mid-trajectory; nodes keep the prefix
  // computed before the failure.
  std::optional<std::string> error;
};

// Fixed-step fourth-order Runge-Kutta trajectory of the semispray's total
// field from (x0, e0); the final step is shortened to land on t_end.
DiscreteCurve integrate(const Semispray& s, const Point& x0, const Point& e0,
                        double t_end, double step);

// Same integrator for an arbitrary field on the bundle's total chart (used
// to exercise fields that are not semisprays).
DiscreteCurve integrate_field(const Algebroid& a, const VectorField& total,
                              const Point& x0, const Point& e0, double t_end,
                              double step);

// Plain numeric table "t  base coords...  fiber coords..." with one row per
// node, for external plotting.
std::string curve_table(const Algebroid& a, const DiscreteCurve& c);

// Central-difference admissibility defect: over the interior nodes,
// max-norm of  d/dt base(t)  -  anchor(base(t)) * fiber(t).  One residual
// per interior node; second-order differencing bounds the attainable
// accuracy at O(step^2).
CheckReport admissibility_residual(const Algebroid& a, const DiscreteCurve& c,
                                   double tol);

// Residual of S(x, lambda e) - lambda * Th_lambda(S(x, e)) where h_lambda
// scales the fiber by lambda; sprays proper pass for every lambda.
CheckReport homogeneity_check(const Semispray& s,
                              std::span<const double> lambdas,
                              const SampleSpec& spec, double tol,
                              Exec exec = Exec::Parallel);

// Per-level semisprays that commute with the tower's bundle morphisms on
// total spaces.
struct LimitSemispray {
  std::vector<Semispray> levels;
  TowerReport compatibility;
};

// Checks T(Phi) . S_high = S_low . Phi at samples for every level pair,
// where Phi(x, e) = (delta(x), F(x) e) is the total-space bundle morphism.
// Throws ValidationError naming the offending pair when a residual exceeds
// tol.
LimitSemispray tower_semispray(const AlgebroidTower& tower,
                               std::vector<Semispray> levels,
                               const SampleSpec& spec, double tol,
                               Exec exec = Exec::Parallel);

// Integrates every level from the initial condition obtained by pushing
// (top_base, top_fiber) down through the tower's morphisms.
std::vector<DiscreteCurve> integrate_levels(const AlgebroidTower& tower,
                                            const LimitSemispray& s,
                                            const Point& top_base,
                                            const Point& top_fiber,
                                            double t_end, double step);

}  // namespace alg
