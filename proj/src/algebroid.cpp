#include "alg/algebroid.hpp"

#include <utility>

#include "alg/errors.hpp"

namespace alg {

Section::Section(AlgebroidPtr parent_, std::vector<Expr> components_)
    : parent(std::move(parent_)), components(std::move(components_)) {
  if (!parent) throw ShapeError("Section: null algebroid");
  if (int(components.size()) != parent->fiber_dim()) {
    throw ShapeError("Section: " + std::to_string(components.size()) +
                     " components in a fiber of dimension " +
                     std::to_string(parent->fiber_dim()));
  }
  for (const Expr& c : components) {
    for (const std::string& v : free_variables(c)) {
      if (parent->base().index_of(v) < 0) {
        throw ShapeError("Section: component uses '" + v +
                         "', which is not a base coordinate");
      }
    }
  }
}

Point Section::eval_at(const Point& base_point) const {
  EvalEnv env = parent->base().bind(base_point);
  Point out(components.size());
  for (std::size_t i = 0; i < components.size(); ++i) {
    out[int(i)] = eval(components[i], env);
  }
  return out;
}

Algebroid::Algebroid(std::string label, Chart base, int fiber_dim,
                     ExprMatrix anchor, BracketRule bracket)
    : label_(std::move(label)),
      base_(std::move(base)),
      fiber_dim_(fiber_dim),
      anchor_(std::move(anchor)),
      bracket_(std::move(bracket)) {
  if (fiber_dim_ <= 0) throw ShapeError("Algebroid: fiber dim must be positive");
  if (anchor_.rows() != base_.dim() || anchor_.cols() != fiber_dim_) {
    throw ShapeError("Algebroid: anchor must be " +
                     std::to_string(base_.dim()) + " x " +
                     std::to_string(fiber_dim_) + ", got " +
                     std::to_string(anchor_.rows()) + " x " +
                     std::to_string(anchor_.cols()));
  }
  if (!bracket_) throw ShapeError("Algebroid: missing bracket rule");
}

std::vector<Expr> Algebroid::bracket_components(std::span<const Expr> s1,
                                                std::span<const Expr> s2) const {
  if (int(s1.size()) != fiber_dim_ || int(s2.size()) != fiber_dim_) {
    throw ShapeError("bracket: component count mismatch");
  }
  std::vector<Expr> out = bracket_(s1, s2);
  if (int(out.size()) != fiber_dim_) {
    throw ShapeError("bracket rule returned wrong component count");
  }
  return out;
}

AlgebroidPtr make_algebroid(std::string label, Chart base, int fiber_dim,
                            ExprMatrix anchor, BracketRule bracket) {
  return std::make_shared<const Algebroid>(std::move(label), std::move(base),
                                           fiber_dim, std::move(anchor),
                                           std::move(bracket));
}

Section bracket(const Section& s1, const Section& s2) {
  if (!s1.parent || s1.parent != s2.parent) {
    throw ShapeError("bracket: sections of different algebroids");
  }
  return Section(s1.parent,
                 s1.parent->bracket_components(s1.components, s2.components));
}

VectorField anchor_apply(const Algebroid& a, const Section& s) {
  return VectorField(a.base(), matvec(a.anchor(), s.components));
}

Expr anchor_derivative(const Algebroid& a, std::span<const Expr> s,
                       const Expr& f) {
  std::vector<Expr> rho_s = matvec(a.anchor(), s);
  Expr acc = Expr::constant(0.0);
  for (int i = 0; i < a.base().dim(); ++i) {
    acc = acc + rho_s[i] * diff(f, a.base().coords[i]);
  }
  return acc;
}

Section frame_section(AlgebroidPtr a, int index) {
  if (!a) throw ShapeError("frame_section: null algebroid");
  if (index < 0 || index >= a->fiber_dim()) {
    throw ShapeError("frame_section: index out of range");
  }
  std::vector<Expr> comps(a->fiber_dim(), Expr::constant(0.0));
  comps[index] = Expr::constant(1.0);
  return Section(std::move(a), std::move(comps));
}

Section make_section(AlgebroidPtr a, std::vector<Expr> components) {
  return Section(std::move(a), std::move(components));
}

AlgebroidPtr tangent_algebroid(Chart chart) {
  const int n = chart.dim();
  Chart chart_copy = chart;
  BracketRule rule = [chart_copy](std::span<const Expr> s1,
                                  std::span<const Expr> s2) {
    std::vector<Expr> out;
    out.reserve(chart_copy.dim());
    for (int k = 0; k < chart_copy.dim(); ++k) {
      Expr acc = Expr::constant(0.0);
      for (int i = 0; i < chart_copy.dim(); ++i) {
        const std::string& xi = chart_copy.coords[i];
        acc = acc + s1[i] * diff(s2[k], xi) - s2[i] * diff(s1[k], xi);
      }
      out.push_back(acc);
    }
    return out;
  };
  return make_algebroid("tangent", std::move(chart), n,
                        ExprMatrix::identity(n), std::move(rule));
}

StructureFunctions::StructureFunctions(int fiber_dim)
    : m_(fiber_dim),
      values_(std::size_t(fiber_dim) * fiber_dim * fiber_dim,
              Expr::constant(0.0)) {
  if (fiber_dim <= 0) {
    throw ShapeError("StructureFunctions: fiber dim must be positive");
  }
}

void StructureFunctions::set(int k, int i, int j, Expr value) {
  if (i == j) {
    throw ShapeError("StructureFunctions: diagonal entries are zero");
  }
  values_[(std::size_t(k) * m_ + i) * m_ + j] = value;
  values_[(std::size_t(k) * m_ + j) * m_ + i] = -value;
}

const Expr& StructureFunctions::at(int k, int i, int j) const {
  return values_[(std::size_t(k) * m_ + i) * m_ + j];
}

AlgebroidPtr structure_algebroid(std::string label, Chart base,
                                 ExprMatrix anchor,
                                 StructureFunctions structure) {
  const int m = structure.fiber_dim();
  if (anchor.cols() != m) {
    throw ShapeError("structure_algebroid: anchor has " +
                     std::to_string(anchor.cols()) + " columns for fiber " +
                     std::to_string(m));
  }
  Chart base_copy = base;
  ExprMatrix anchor_copy = anchor;
  BracketRule rule = [base_copy, anchor_copy, structure,
                      m](std::span<const Expr> s1, std::span<const Expr> s2) {
    std::vector<Expr> rho_s1 = matvec(anchor_copy, s1);
    std::vector<Expr> rho_s2 = matvec(anchor_copy, s2);
    std::vector<Expr> out;
    out.reserve(m);
    for (int k = 0; k < m; ++k) {
      Expr acc = Expr::constant(0.0);
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < m; ++j) {
          acc = acc + s1[i] * s2[j] * structure.at(k, i, j);
        }
      }
      for (int t = 0; t < base_copy.dim(); ++t) {
        const std::string& xt = base_copy.coords[t];
        acc = acc + rho_s1[t] * diff(s2[k], xt) - rho_s2[t] * diff(s1[k], xt);
      }
      out.push_back(acc);
    }
    return out;
  };
  return make_algebroid(std::move(label), std::move(base), m,
                        std::move(anchor), std::move(rule));
}

CheckReport verify_anchor_homomorphism(const Algebroid& a, const Section& s1,
                                       const Section& s2,
                                       const SampleSpec& spec, double tol,
                                       Exec exec) {
  Section br = Section(s1.parent,
                       a.bracket_components(s1.components, s2.components));
  VectorField lhs = anchor_apply(a, br);
  VectorField rhs = lie_bracket(anchor_apply(a, s1), anchor_apply(a, s2));
  const Chart& chart = a.base();
  auto residual = [&chart, lhs, rhs](const Point& p) {
    return (lhs.eval_at(p) - rhs.eval_at(p)).lpNorm<Eigen::Infinity>();
  };
  return run_check("anchor_homomorphism", spec, chart.dim(), residual, tol,
                   exec);
}

CheckReport verify_leibniz(const Algebroid& a, const Section& s1,
                           const Section& s2, const Expr& g,
                           const SampleSpec& spec, double tol, Exec exec) {
  const int m = a.fiber_dim();
  std::vector<Expr> g_s2;
  g_s2.reserve(m);
  for (const Expr& c : s2.components) g_s2.push_back(g * c);

  std::vector<Expr> lhs = a.bracket_components(s1.components, g_s2);
  std::vector<Expr> br = a.bracket_components(s1.components, s2.components);
  Expr dg = anchor_derivative(a, s1.components, g);

  std::vector<Expr> residual_comps;
  residual_comps.reserve(m);
  for (int k = 0; k < m; ++k) {
    residual_comps.push_back(lhs[k] - g * br[k] - dg * s2.components[k]);
  }
  const Chart& chart = a.base();
  auto residual = [&chart, residual_comps](const Point& p) {
    EvalEnv env = chart.bind(p);
    double worst = 0.0;
    for (const Expr& c : residual_comps) {
      worst = std::max(worst, std::abs(eval(c, env)));
    }
    return worst;
  };
  return run_check("leibniz", spec, chart.dim(), residual, tol, exec);
}

Section jacobi_residual(const Section& s1, const Section& s2,
                        const Section& s3) {
  Section a = bracket(bracket(s1, s2), s3);
  Section b = bracket(bracket(s2, s3), s1);
  Section c = bracket(bracket(s3, s1), s2);
  std::vector<Expr> comps;
  comps.reserve(a.components.size());
  for (std::size_t k = 0; k < a.components.size(); ++k) {
    comps.push_back(a.components[k] + b.components[k] + c.components[k]);
  }
  return Section(s1.parent, std::move(comps));
}

CheckReport verify_jacobi(const Section& s1, const Section& s2,
                          const Section& s3, const SampleSpec& spec,
                          double tol, Exec exec) {
  Section defect = jacobi_residual(s1, s2, s3);
  const Chart& chart = s1.parent->base();
  auto residual = [defect](const Point& p) {
    return defect.eval_at(p).lpNorm<Eigen::Infinity>();
  };
  return run_check("jacobi", spec, chart.dim(), residual, tol, exec);
}

}  // namespace alg
