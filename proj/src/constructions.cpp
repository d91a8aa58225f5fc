#include "alg/constructions.hpp"

#include <utility>

#include "alg/errors.hpp"

namespace alg {

namespace {

void require_square(const Chart& chart, const ExprMatrix& matrix,
                    const char* what) {
  if (matrix.rows() != chart.dim() || matrix.cols() != chart.dim()) {
    throw ShapeError(std::string(what) + ": matrix must be " +
                     std::to_string(chart.dim()) + " x " +
                     std::to_string(chart.dim()));
  }
  for (int r = 0; r < matrix.rows(); ++r) {
    for (int c = 0; c < matrix.cols(); ++c) {
      for (const std::string& v : free_variables(matrix.at(r, c))) {
        if (chart.index_of(v) < 0) {
          throw ShapeError(std::string(what) + ": entry uses '" + v +
                           "', which is not a chart coordinate");
        }
      }
    }
  }
}

std::vector<Expr> lie_bracket_components(const Chart& chart,
                                         std::span<const Expr> x,
                                         std::span<const Expr> y) {
  VectorField vx(chart, std::vector<Expr>(x.begin(), x.end()));
  VectorField vy(chart, std::vector<Expr>(y.begin(), y.end()));
  return lie_bracket(vx, vy).components;
}

// (L_X alpha)_i = sum_j (X^j d_j alpha_i + alpha_j d_i X^j), the classical
// coordinate formula for the Lie derivative of a 1-form.
std::vector<Expr> covector_lie_derivative(const Chart& chart,
                                          std::span<const Expr> x,
                                          std::span<const Expr> alpha) {
  const int n = chart.dim();
  std::vector<Expr> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    Expr acc = Expr::constant(0.0);
    for (int j = 0; j < n; ++j) {
      acc = acc + x[j] * diff(alpha[i], chart.coords[j]) +
            alpha[j] * diff(x[j], chart.coords[i]);
    }
    out.push_back(acc);
  }
  return out;
}

CheckReport frame_closure_check(const char* name,
                                const std::vector<VectorField>& frame,
                                const StructureFunctions& closure,
                                const SampleSpec& spec, double tol,
                                Exec exec) {
  if (frame.empty()) throw ShapeError(std::string(name) + ": empty frame");
  const Chart& chart = frame.front().chart;
  const int k = int(frame.size());
  if (closure.fiber_dim() != k) {
    throw ShapeError(std::string(name) + ": coefficient table is for " +
                     std::to_string(closure.fiber_dim()) + " fields, got " +
                     std::to_string(k));
  }
  for (const VectorField& f : frame) {
    if (!(f.chart == chart)) {
      throw ShapeError(std::string(name) + ": frame fields on mixed charts");
    }
  }
  std::vector<Expr> defects;
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      std::vector<Expr> br = lie_bracket(frame[a], frame[b]).components;
      for (int i = 0; i < chart.dim(); ++i) {
        Expr acc = br[i];
        for (int c = 0; c < k; ++c) {
          acc = acc - closure.at(c, a, b) * frame[c].components[i];
        }
        defects.push_back(acc);
      }
    }
  }
  auto residual = [chart, defects](const Point& p) {
    EvalEnv env = chart.bind(p);
    double worst = 0.0;
    for (const Expr& d : defects) {
      worst = std::max(worst, std::abs(eval(d, env)));
    }
    return worst;
  };
  return run_check(name, spec, chart.dim(), residual, tol, exec);
}

}  // namespace

NijenhuisTensor::NijenhuisTensor(Chart chart_, ExprMatrix matrix_)
    : chart(std::move(chart_)), matrix(std::move(matrix_)) {
  require_square(chart, matrix, "NijenhuisTensor");
}

PoissonTensor::PoissonTensor(Chart chart_, ExprMatrix matrix_)
    : chart(std::move(chart_)), matrix(std::move(matrix_)) {
  require_square(chart, matrix, "PoissonTensor");
  for (int r = 0; r < matrix.rows(); ++r) {
    for (int c = 0; c < matrix.cols(); ++c) {
      Expr sum = simplify(Expr::add(matrix.at(r, c), matrix.at(c, r)));
      if (!sum.is_constant(0.0)) {
        throw ShapeError("PoissonTensor: entries (" + std::to_string(r) +
                         "," + std::to_string(c) +
                         ") and transpose do not cancel");
      }
    }
  }
}

AlgebroidPtr nijenhuis_algebroid(const NijenhuisTensor& n) {
  Chart chart = n.chart;
  ExprMatrix matrix = n.matrix;
  BracketRule rule = [chart, matrix](std::span<const Expr> x,
                                     std::span<const Expr> y) {
    std::vector<Expr> nx = matvec(matrix, x);
    std::vector<Expr> ny = matvec(matrix, y);
    std::vector<Expr> t1 = lie_bracket_components(chart, nx, y);
    std::vector<Expr> t2 = lie_bracket_components(chart, x, ny);
    std::vector<Expr> t3 =
        matvec(matrix, lie_bracket_components(chart, x, y));
    std::vector<Expr> out;
    out.reserve(t1.size());
    for (std::size_t i = 0; i < t1.size(); ++i) {
      out.push_back(t1[i] + t2[i] - t3[i]);
    }
    return out;
  };
  return make_algebroid("deformed_tangent", chart, chart.dim(), n.matrix,
                        std::move(rule));
}

VectorField nijenhuis_torsion(const NijenhuisTensor& n, const VectorField& x,
                              const VectorField& y) {
  const Chart& chart = n.chart;
  if (!(x.chart == chart) || !(y.chart == chart)) {
    throw ShapeError("nijenhuis_torsion: fields on a different chart");
  }
  std::vector<Expr> nx = matvec(n.matrix, x.components);
  std::vector<Expr> ny = matvec(n.matrix, y.components);
  std::vector<Expr> t1 = lie_bracket_components(chart, nx, ny);
  std::vector<Expr> t2 =
      matvec(n.matrix, lie_bracket_components(chart, nx, y.components));
  std::vector<Expr> t3 =
      matvec(n.matrix, lie_bracket_components(chart, x.components, ny));
  std::vector<Expr> t4 = matvec(
      n.matrix,
      matvec(n.matrix, lie_bracket_components(chart, x.components,
                                              y.components)));
  std::vector<Expr> out;
  out.reserve(t1.size());
  for (std::size_t i = 0; i < t1.size(); ++i) {
    out.push_back(t1[i] - t2[i] - t3[i] + t4[i]);
  }
  return VectorField(chart, std::move(out));
}

NijenhuisTensor harmonic_oscillator_tensor(int pairs) {
  if (pairs < 1) {
    throw ShapeError("harmonic_oscillator_tensor: need at least one pair");
  }
  std::vector<std::string> names;
  names.reserve(2 * std::size_t(pairs));
  for (int k = 1; k <= pairs; ++k) {
    names.push_back("x" + std::to_string(k));
    names.push_back("y" + std::to_string(k));
  }
  Chart chart(std::move(names));
  ExprMatrix matrix(2 * pairs, 2 * pairs);
  for (int k = 0; k < pairs; ++k) {
    Expr xk = Expr::variable(chart.coords[2 * k]);
    Expr yk = Expr::variable(chart.coords[2 * k + 1]);
    Expr radius2 = xk * xk + yk * yk;
    matrix.at(2 * k, 2 * k) = radius2;
    matrix.at(2 * k + 1, 2 * k + 1) = radius2;
  }
  return NijenhuisTensor(std::move(chart), std::move(matrix));
}

CheckReport involutivity_check(const std::vector<VectorField>& frame,
                               const StructureFunctions& closure,
                               const SampleSpec& spec, double tol, Exec exec) {
  return frame_closure_check("involutivity", frame, closure, spec, tol, exec);
}

AlgebroidPtr distribution_algebroid(std::string label, Chart base,
                                    const std::vector<VectorField>& frame,
                                    StructureFunctions closure,
                                    const SampleSpec& spec, double tol,
                                    Exec exec) {
  for (const VectorField& f : frame) {
    if (!(f.chart == base)) {
      throw ShapeError("distribution_algebroid: frame not on the base chart");
    }
  }
  CheckReport gate = involutivity_check(frame, closure, spec, tol, exec);
  if (!gate.pass) {
    throw ValidationError(
        "distribution_algebroid: the frame does not close under the bracket "
        "with the stated coefficients",
        std::move(gate));
  }
  const int k = int(frame.size());
  ExprMatrix anchor(base.dim(), k);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < base.dim(); ++r) {
      anchor.at(r, c) = frame[c].components[r];
    }
  }
  return structure_algebroid(std::move(label), std::move(base),
                             std::move(anchor), std::move(closure));
}

AlgebroidPtr poisson_cotangent_algebroid(const PoissonTensor& p) {
  Chart chart = p.chart;
  ExprMatrix matrix = p.matrix;
  // The anchor contracts a covector through the FIRST slot of the bivector,
  // alpha -> P(alpha, .), i.e. the transpose of the coefficient matrix.
  // This is the one contraction for which the bracket below satisfies the
  // Leibniz axiom (the other slot flips the sign of the derivation term).
  const int dim = chart.dim();
  ExprMatrix sharp(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int k = 0; k < dim; ++k) {
      sharp.at(i, k) = p.matrix.at(k, i);
    }
  }
  BracketRule rule = [chart, matrix](std::span<const Expr> alpha,
                                     std::span<const Expr> beta) {
    const int n = chart.dim();
    std::vector<Expr> p_alpha = matvec(matrix, alpha);
    std::vector<Expr> p_beta = matvec(matrix, beta);
    std::vector<Expr> lhs =
        covector_lie_derivative(chart, p_beta, alpha);
    std::vector<Expr> rhs =
        covector_lie_derivative(chart, p_alpha, beta);
    Expr pairing = Expr::constant(0.0);
    for (int i = 0; i < n; ++i) pairing = pairing + beta[i] * p_alpha[i];
    std::vector<Expr> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
      out.push_back(lhs[i] - rhs[i] + diff(pairing, chart.coords[i]));
    }
    return out;
  };
  return make_algebroid("cotangent_poisson", chart, chart.dim(),
                        std::move(sharp), std::move(rule));
}

CheckReport realization_check(const std::vector<VectorField>& generators,
                              const StructureFunctions& constants,
                              const SampleSpec& spec, double tol, Exec exec) {
  return frame_closure_check("realization", generators, constants, spec, tol,
                             exec);
}

AlgebroidPtr action_algebroid(std::string label, Chart base,
                              const std::vector<VectorField>& generators,
                              StructureFunctions constants,
                              const SampleSpec& spec, double tol, Exec exec) {
  const int k = int(generators.size());
  for (const VectorField& g : generators) {
    if (!(g.chart == base)) {
      throw ShapeError("action_algebroid: generator not on the base chart");
    }
  }
  for (int kk = 0; kk < k; ++kk) {
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) {
        if (constants.at(kk, i, j).kind() != ExprKind::Constant) {
          throw ShapeError(
              "action_algebroid: structure coefficients must be constants");
        }
      }
    }
  }
  CheckReport gate = realization_check(generators, constants, spec, tol, exec);
  if (!gate.pass) {
    throw ValidationError(
        "action_algebroid: the generators do not realize the stated "
        "structure constants",
        std::move(gate));
  }
  ExprMatrix anchor(base.dim(), k);
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < base.dim(); ++r) {
      anchor.at(r, c) = generators[c].components[r];
    }
  }
  return structure_algebroid(std::move(label), std::move(base),
                             std::move(anchor), std::move(constants));
}

}  // namespace alg
