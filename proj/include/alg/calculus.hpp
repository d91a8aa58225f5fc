#pragma once

#include <vector>

#include "alg/algebroid.hpp"

namespace alg {

// Strictly increasing q-element subsets of {0..m-1}, lexicographic.
std::vector<std::vector<int>> increasing_multi_indices(int m, int q);
int multi_index_position(const std::vector<int>& index, int m);

// Alternating q-form on the fibers with function coefficients: one component
// per increasing multi-index over the standard frame.  Degree is capped at 3.
struct AlgebroidForm {
  AlgebroidPtr parent;
  int degree = 0;
  std::vector<Expr> components;  // C(m, degree) entries; 1 entry if degree 0

  AlgebroidForm() = default;
  AlgebroidForm(AlgebroidPtr parent, int degree, std::vector<Expr> components);
};

AlgebroidForm zero_form(AlgebroidPtr parent, int degree);

// omega(s_1, ..., s_q) as a function on the base: sum over increasing I of
// omega_I * det[s_a^{I_b}].
Expr eval_form(const AlgebroidForm& omega, std::span<const Section> args);

// Same contraction on raw component tables (used for pullbacks, where the
// coefficients were already moved to another chart).
Expr contract_components(const std::vector<Expr>& components, int fiber_dim,
                         int degree,
                         std::span<const std::vector<Expr>> args);

// L_s omega: degree 0 is the anchor derivative; higher degrees differentiate
// the evaluation and subtract the bracket insertions.
AlgebroidForm lie_derivative(const Section& s, const AlgebroidForm& omega);

// Degree-raising differential attached to the anchor and bracket:
//   (d f)_k      = sum_i rho^i_k d_i f
//   (d w)(s_0..s_q) = sum_a (-1)^a L_{s_a}(w(..no a..))
//                   + sum_{a<b} (-1)^{a+b} w([s_a,s_b], ..no a, no b..)
AlgebroidForm exterior_derivative(const AlgebroidForm& omega);

AlgebroidForm interior_product(const Section& s, const AlgebroidForm& omega);

// Bundle morphism source -> target covering a base map: fiber_map(x) sends
// the fiber over x linearly into the fiber over base_map(x).
struct BundleMorphism {
  AlgebroidPtr source;
  AlgebroidPtr target;
  SmoothMap base_map;    // source base chart -> target base chart
  ExprMatrix fiber_map;  // target_fiber_dim x source_fiber_dim, over source coords

  BundleMorphism() = default;
  BundleMorphism(AlgebroidPtr source, AlgebroidPtr target, SmoothMap base_map,
                 ExprMatrix fiber_map);
};

// The tangent lift of a base map between tangent algebroids.
BundleMorphism tangent_morphism(AlgebroidPtr source, AlgebroidPtr target,
                                const SmoothMap& base_map);

// (psi^* w')_x(s_1...s_q) = w'_{f(x)}(psi s_1, ..., psi s_q).
AlgebroidForm pullback(const BundleMorphism& psi, const AlgebroidForm& omega);

// Checks d after pullback == pullback after d on the supplied test forms
// (the defining property of an algebroid morphism).
CheckReport verify_morphism(const BundleMorphism& psi,
                            std::span<const AlgebroidForm> test_forms,
                            const SampleSpec& spec, double tol,
                            Exec exec = Exec::Parallel);

// d(d omega) == 0 on randomly generated polynomial 0- and 1-forms.
CheckReport d_squared_check(AlgebroidPtr a, int forms_per_degree,
                            const SampleSpec& spec, double tol,
                            Exec exec = Exec::Parallel);

// Random polynomial section / form generators (deterministic given the rng).
Expr random_polynomial(Rng& rng, const Chart& chart, int degree);
Section random_section(Rng& rng, AlgebroidPtr a, int degree);
AlgebroidForm random_form(Rng& rng, AlgebroidPtr a, int form_degree,
                          int poly_degree);

}  // namespace alg
