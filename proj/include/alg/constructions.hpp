#pragma once

#include <string>
#include <vector>

#include "alg/algebroid.hpp"

namespace alg {

// A construction gate failed: the input does not satisfy the property the
// construction needs (involutivity, Lie-algebra realization, ...).  Carries
// the sampled evidence.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& message, CheckReport report)
      : Error(message + " (max residual " +
              std::to_string(report.max_residual) + " over " +
              std::to_string(report.samples) + " samples, tol " +
              std::to_string(report.tol) + ")"),
        report_(std::move(report)) {}

  const CheckReport& report() const { return report_; }

 private:
  CheckReport report_;
};

// (1,1)-tensor field on a chart: a square matrix of coefficient expressions.
struct NijenhuisTensor {
  Chart chart;
  ExprMatrix matrix;  // dim x dim over the chart coordinates

  NijenhuisTensor() = default;
  NijenhuisTensor(Chart chart, ExprMatrix matrix);
};

// Antisymmetric (2,0)-tensor field (bivector).  The constructor requires
// P + P^T to simplify to zero entry by entry.
struct PoissonTensor {
  Chart chart;
  ExprMatrix matrix;  // dim x dim, antisymmetric

  PoissonTensor() = default;
  PoissonTensor(Chart chart, ExprMatrix matrix);
};

// Tangent bundle with the deformed bracket
//   [X,Y]_N = [NX, Y] + [X, NY] - N([X, Y])
// and anchor N.  The axioms hold exactly when the torsion of N vanishes;
// that is the verifiers' business, not an assumption.
AlgebroidPtr nijenhuis_algebroid(const NijenhuisTensor& n);

// T(X,Y) = [NX,NY] - N([NX,Y]) - N([X,NY]) + N(N([X,Y])).  Vanishing torsion
// is exactly the condition making the deformed bracket above a Lie bracket
// compatible with the anchor N.
VectorField nijenhuis_torsion(const NijenhuisTensor& n, const VectorField& x,
                              const VectorField& y);

// Block-diagonal tensor on the chart (x1, y1, ..., xp, yp): block k is
// (x_k^2 + y_k^2) times the 2x2 identity.  Torsion-free for every p.
NijenhuisTensor harmonic_oscillator_tensor(int pairs);

// Residual of [X_a, X_b] - sum_c closure^c_{ab} X_c over sampled points:
// whether the frame closes under the Lie bracket with the claimed
// coefficients.
CheckReport involutivity_check(const std::vector<VectorField>& frame,
                               const StructureFunctions& closure,
                               const SampleSpec& spec, double tol,
                               Exec exec = Exec::Parallel);

// Subbundle of the tangent bundle spanned by a frame of vector fields; the
// anchor is the inclusion (columns = frame components) and the bracket comes
// from the closure coefficients.  Throws ValidationError when the frame does
// not close.
AlgebroidPtr distribution_algebroid(std::string label, Chart base,
                                    const std::vector<VectorField>& frame,
                                    StructureFunctions closure,
                                    const SampleSpec& spec, double tol,
                                    Exec exec = Exec::Parallel);

// Cotangent bundle of a bivector: sections are coefficient rows of 1-forms,
// the anchor sends alpha to P(alpha, .), and
//   {alpha, beta}_P = L_{P beta}(alpha) - L_{P alpha}(beta) + d<beta, P alpha>
// with the classical Lie derivative and de Rham differential on the chart.
AlgebroidPtr poisson_cotangent_algebroid(const PoissonTensor& p);

// Residual of [gen_i, gen_j] - sum_k constants^k_{ij} gen_k at samples:
// whether the generators realize the claimed Lie algebra on the chart.
CheckReport realization_check(const std::vector<VectorField>& generators,
                              const StructureFunctions& constants,
                              const SampleSpec& spec, double tol,
                              Exec exec = Exec::Parallel);

// Trivial bundle M x R^k for a k-dimensional Lie algebra acting on the
// chart: anchor columns are the infinitesimal generators, the bracket has
// constant coefficients.  Throws ValidationError when the generators do not
// realize the constants; ShapeError when a coefficient is not constant.
AlgebroidPtr action_algebroid(std::string label, Chart base,
                              const std::vector<VectorField>& generators,
                              StructureFunctions constants,
                              const SampleSpec& spec, double tol,
                              Exec exec = Exec::Parallel);

}  // namespace alg
