#include "alg/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

#include "alg/constructions.hpp"
#include "alg/errors.hpp"

namespace alg {

namespace {

std::vector<Expr> fiber_variables(const Chart& total, int base_dim) {
  std::vector<Expr> vars;
  vars.reserve(total.dim() - base_dim);
  for (int k = base_dim; k < total.dim(); ++k) {
    vars.push_back(Expr::variable(total.coords[k]));
  }
  return vars;
}

Point concat(const Point& a, const Point& b) {
  Point out(a.size() + b.size());
  out << a, b;
  return out;
}

// Total-space bundle morphism Phi(x, e) = (delta(x), F(x) e) between the
// total charts of two levels.
SmoothMap total_morphism(const BundleMorphism& psi, const Chart& fine_total,
                         const Chart& coarse_total, int fine_base_dim) {
  std::vector<Expr> comps = psi.base_map.components;
  std::vector<Expr> evars = fiber_variables(fine_total, fine_base_dim);
  for (Expr& c : matvec(psi.fiber_map, evars)) comps.push_back(std::move(c));
  return SmoothMap(fine_total, coarse_total, std::move(comps));
}

}  // namespace

Chart total_chart(const Algebroid& a) {
  std::vector<std::string> names = a.base().coords;
  for (int k = 1; k <= a.fiber_dim(); ++k) {
    std::string fiber_name = "e" + std::to_string(k);
    if (a.base().index_of(fiber_name) >= 0) {
      throw ShapeError("total_chart: base coordinate '" + fiber_name +
                       "' collides with a fiber coordinate name");
    }
    names.push_back(std::move(fiber_name));
  }
  return Chart(std::move(names));
}

VectorField Semispray::total_field() const {
  std::vector<Expr> comps =
      matvec(parent->anchor(), fiber_variables(total, parent->base().dim()));
  comps.insert(comps.end(), acceleration.begin(), acceleration.end());
  return VectorField(total, std::move(comps));
}

Semispray make_semispray(AlgebroidPtr a, std::vector<Expr> acceleration) {
  if (!a) throw ShapeError("make_semispray: null algebroid");
  if (int(acceleration.size()) != a->fiber_dim()) {
    throw ShapeError("make_semispray: expected " +
                     std::to_string(a->fiber_dim()) +
                     " acceleration components, got " +
                     std::to_string(acceleration.size()));
  }
  Chart total = total_chart(*a);
  return Semispray{std::move(a), std::move(total), std::move(acceleration)};
}

DiscreteCurve integrate_field(const Algebroid& a, const VectorField& total,
                              const Point& x0, const Point& e0, double t_end,
                              double step) {
  const int n = a.base().dim();
  const int m = a.fiber_dim();
  if (int(x0.size()) != n || int(e0.size()) != m) {
    throw ShapeError("integrate: initial condition does not match the "
                     "bundle's dimensions");
  }
  if (total.chart.dim() != n + m) {
    throw ShapeError("integrate: field does not live on the total chart");
  }
  Curve raw = flow(total, concat(x0, e0), t_end, step);
  DiscreteCurve out;
  out.step = step;
  out.nodes.reserve(raw.times.size());
  for (std::size_t i = 0; i < raw.times.size(); ++i) {
    out.nodes.push_back(
        {raw.times[i], raw.states[i].head(n), raw.states[i].tail(m)});
  }
  if (raw.aborted) {
    out.error = "evaluation failed at t=" + format_real(raw.aborted->time) +
                ": " + raw.aborted->message;
  }
  return out;
}

DiscreteCurve integrate(const Semispray& s, const Point& x0, const Point& e0,
                        double t_end, double step) {
  return integrate_field(*s.parent, s.total_field(), x0, e0, t_end, step);
}

std::string curve_table(const Algebroid& a, const DiscreteCurve& c) {
  std::ostringstream out;
  out << "# t";
  for (const std::string& name : a.base().coords) out << ' ' << name;
  for (int k = 1; k <= a.fiber_dim(); ++k) out << " e" << k;
  out << '\n';
  for (const CurveNode& node : c.nodes) {
    out << format_real(node.t);
    for (int i = 0; i < node.base.size(); ++i) {
      out << ' ' << format_real(node.base[i]);
    }
    for (int i = 0; i < node.fiber.size(); ++i) {
      out << ' ' << format_real(node.fiber[i]);
    }
    out << '\n';
  }
  return out.str();
}

CheckReport admissibility_residual(const Algebroid& a, const DiscreteCurve& c,
                                   double tol) {
  if (c.nodes.size() < 3) {
    throw ShapeError("admissibility_residual: need at least 3 nodes for "
                     "central differences");
  }
  CheckReport rep;
  rep.name = "admissibility";
  rep.tol = tol;
  try {
    for (std::size_t i = 1; i + 1 < c.nodes.size(); ++i) {
      const CurveNode& prev = c.nodes[i - 1];
      const CurveNode& node = c.nodes[i];
      const CurveNode& next = c.nodes[i + 1];
      Point velocity = (next.base - prev.base) / (next.t - prev.t);
      EvalEnv env = a.base().bind(node.base);
      Point anchored = eval(a.anchor(), env) * node.fiber;
      rep.residuals.push_back(
          (velocity - anchored).lpNorm<Eigen::Infinity>());
    }
  } catch (const Error& err) {
    rep.error = err.what();
  }
  rep.samples = int(rep.residuals.size());
  for (std::size_t i = 0; i < rep.residuals.size(); ++i) {
    rep.max_residual = std::max(rep.max_residual, rep.residuals[i]);
  }
  std::vector<int> order(rep.residuals.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::sort(order.begin(), order.end(), [&rep](int lhs, int rhs) {
    return rep.residuals[lhs] > rep.residuals[rhs];
  });
  for (std::size_t i = 0; i < order.size() && i < 5; ++i) {
    const CurveNode& node = c.nodes[std::size_t(order[i]) + 1];
    rep.worst.push_back(
        {order[i], concat(node.base, node.fiber), rep.residuals[order[i]]});
  }
  rep.pass = !rep.error && rep.max_residual <= tol;
  return rep;
}

CheckReport homogeneity_check(const Semispray& s,
                              std::span<const double> lambdas,
                              const SampleSpec& spec, double tol, Exec exec) {
  if (lambdas.empty()) {
    throw ShapeError("homogeneity_check: no scaling values supplied");
  }
  for (double lambda : lambdas) {
    if (lambda == 0.0) {
      throw ShapeError("homogeneity_check: scaling values must be nonzero");
    }
  }
  const int n = s.parent->base().dim();
  const int m = s.parent->fiber_dim();
  VectorField field = s.total_field();
  std::vector<CheckReport> parts;
  parts.reserve(lambdas.size());
  for (double lambda : lambdas) {
    // bind e -> lambda e, then compare with the fiber-scaled field pushed
    // forward by h_lambda: base rows pick up lambda, fiber rows lambda^2
    std::vector<std::pair<std::string, Expr>> binds;
    binds.reserve(m);
    for (int k = 0; k < m; ++k) {
      const std::string& name = s.total.coords[n + k];
      binds.emplace_back(name,
                         Expr::constant(lambda) * Expr::variable(name));
    }
    std::vector<Expr> deltas;
    deltas.reserve(n + m);
    for (int i = 0; i < n + m; ++i) {
      double scale = i < n ? lambda : lambda * lambda;
      deltas.push_back(substitute(field.components[i], binds) -
                       Expr::constant(scale) * field.components[i]);
    }
    auto residual = [&chart = s.total, deltas](const Point& p) {
      EvalEnv env = chart.bind(p);
      double worst = 0.0;
      for (const Expr& d : deltas) {
        worst = std::max(worst, std::abs(eval(d, env)));
      }
      return worst;
    };
    parts.push_back(run_check("homogeneity_lambda_" + format_real(lambda),
                              spec, s.total.dim(), residual, tol, exec));
  }
  return merge_reports("homogeneity", parts);
}

LimitSemispray tower_semispray(const AlgebroidTower& tower,
                               std::vector<Semispray> levels,
                               const SampleSpec& spec, double tol, Exec exec) {
  const int count = int(tower.levels.size());
  if (int(levels.size()) != count) {
    throw ShapeError("tower_semispray: expected one semispray per level");
  }
  for (int i = 0; i < count; ++i) {
    if (levels[i].parent.get() != tower.levels[i].get()) {
      throw ShapeError("tower_semispray: level " + std::to_string(i) +
                       " semispray does not ride the tower's bundle");
    }
  }
  TowerReport out;
  for (int high = 1; high < count; ++high) {
    for (int low = 0; low < high; ++low) {
      SmoothMap phi =
          total_morphism(tower.morphism(low, high), levels[high].total,
                         levels[low].total, tower.base.levels[high].dim());
      CheckReport report = f_related(phi, levels[high].total_field(),
                                     levels[low].total_field(), spec, tol,
                                     exec);
      report.name = "semispray_" + std::to_string(low) + "_" +
                    std::to_string(high);
      out.entries.push_back(
          {low, high, "semispray_compatibility", std::move(report)});
    }
  }
  out.pass = true;
  for (const TowerReport::Entry& e : out.entries) {
    out.pass = out.pass && e.report.pass;
    out.max_residual = std::max(out.max_residual, e.report.max_residual);
  }
  for (const TowerReport::Entry& e : out.entries) {
    if (!e.report.pass) {
      throw ValidationError("tower_semispray: levels " +
                                std::to_string(e.low) + " and " +
                                std::to_string(e.high) +
                                " do not commute with the bundle morphism",
                            e.report);
    }
  }
  return LimitSemispray{std::move(levels), std::move(out)};
}

std::vector<DiscreteCurve> integrate_levels(const AlgebroidTower& tower,
                                            const LimitSemispray& s,
                                            const Point& top_base,
                                            const Point& top_fiber,
                                            double t_end, double step) {
  const int count = int(tower.levels.size());
  if (int(s.levels.size()) != count) {
    throw ShapeError("integrate_levels: semispray family does not match the "
                     "tower");
  }
  const Chart& fine = tower.base.levels[count - 1];
  if (int(top_base.size()) != fine.dim() ||
      int(top_fiber.size()) != tower.levels[count - 1]->fiber_dim()) {
    throw ShapeError("integrate_levels: initial condition does not match "
                     "the finest level");
  }
  std::vector<DiscreteCurve> curves;
  curves.reserve(count);
  for (int i = 0; i < count; ++i) {
    Point x0 = top_base;
    Point e0 = top_fiber;
    if (i < count - 1) {
      BundleMorphism psi = tower.morphism(i, count - 1);
      x0 = psi.base_map.eval_at(top_base);
      e0 = eval(psi.fiber_map, fine.bind(top_base)) * top_fiber;
    }
    curves.push_back(integrate(s.levels[i], x0, e0, t_end, step));
  }
  return curves;
}

}  // namespace alg
