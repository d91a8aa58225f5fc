#include "alg/fields.hpp"

#include <cmath>
#include <set>

#include "alg/errors.hpp"

namespace alg {

Chart::Chart(std::vector<std::string> names) : coords(std::move(names)) {
  if (coords.empty()) throw ShapeError("Chart: needs at least one coordinate");
  std::set<std::string> unique(coords.begin(), coords.end());
  if (unique.size() != coords.size()) {
    throw ShapeError("Chart: coordinate names must be distinct");
  }
  for (const std::string& c : coords) {
    if (c.empty()) throw ShapeError("Chart: empty coordinate name");
  }
}

Chart Chart::numbered(const std::string& stem, int n) {
  std::vector<std::string> names;
  names.reserve(n);
  for (int i = 1; i <= n; ++i) names.push_back(stem + std::to_string(i));
  return Chart(std::move(names));
}

int Chart::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < coords.size(); ++i) {
    if (coords[i] == name) return int(i);
  }
  return -1;
}

EvalEnv Chart::bind(const Point& p) const {
  if (int(p.size()) != dim()) {
    throw ShapeError("Chart::bind: point of dimension " +
                     std::to_string(p.size()) + " on a chart of dimension " +
                     std::to_string(dim()));
  }
  return EvalEnv(coords, {p.data(), std::size_t(p.size())});
}

VectorField::VectorField(Chart chart_, std::vector<Expr> components_)
    : chart(std::move(chart_)), components(std::move(components_)) {
  if (int(components.size()) != chart.dim()) {
    throw ShapeError("VectorField: " + std::to_string(components.size()) +
                     " components on a chart of dimension " +
                     std::to_string(chart.dim()));
  }
}

Point VectorField::eval_at(const Point& p) const {
  EvalEnv env = chart.bind(p);
  Point out(chart.dim());
  for (int i = 0; i < chart.dim(); ++i) out[i] = eval(components[i], env);
  return out;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  if (!(x.chart == y.chart)) {
    throw ShapeError("lie_bracket: fields live on different charts");
  }
  const int n = x.chart.dim();
  std::vector<Expr> comps;
  comps.reserve(n);
  for (int k = 0; k < n; ++k) {
    Expr acc = Expr::constant(0.0);
    for (int i = 0; i < n; ++i) {
      const std::string& xi = x.chart.coords[i];
      acc = acc + x.components[i] * diff(y.components[k], xi) -
            y.components[i] * diff(x.components[k], xi);
    }
    comps.push_back(acc);
  }
  return VectorField(x.chart, std::move(comps));
}

SmoothMap::SmoothMap(Chart source_, Chart target_,
                     std::vector<Expr> components_)
    : source(std::move(source_)),
      target(std::move(target_)),
      components(std::move(components_)) {
  if (int(components.size()) != target.dim()) {
    throw ShapeError("SmoothMap: " + std::to_string(components.size()) +
                     " components for a target of dimension " +
                     std::to_string(target.dim()));
  }
  for (const Expr& c : components) {
    for (const std::string& v : free_variables(c)) {
      if (source.index_of(v) < 0) {
        throw ShapeError("SmoothMap: component uses '" + v +
                         "', which is not a source coordinate");
      }
    }
  }
}

SmoothMap SmoothMap::identity(const Chart& chart) {
  std::vector<Expr> comps;
  comps.reserve(chart.dim());
  for (const std::string& c : chart.coords) comps.push_back(Expr::variable(c));
  return SmoothMap(chart, chart, std::move(comps));
}

Point SmoothMap::eval_at(const Point& p) const {
  EvalEnv env = source.bind(p);
  Point out(target.dim());
  for (int i = 0; i < target.dim(); ++i) out[i] = eval(components[i], env);
  return out;
}

std::vector<std::pair<std::string, Expr>> SmoothMap::bindings() const {
  std::vector<std::pair<std::string, Expr>> out;
  out.reserve(target.dim());
  for (int i = 0; i < target.dim(); ++i) {
    out.emplace_back(target.coords[i], components[i]);
  }
  return out;
}

SmoothMap compose(const SmoothMap& g, const SmoothMap& f) {
  if (!(g.source == f.target)) {
    throw ShapeError("compose: inner map target differs from outer source");
  }
  auto binds = f.bindings();
  std::vector<Expr> comps;
  comps.reserve(g.components.size());
  for (const Expr& c : g.components) comps.push_back(substitute(c, binds));
  return SmoothMap(f.source, g.target, std::move(comps));
}

ExprMatrix jacobian_matrix(const SmoothMap& map) {
  ExprMatrix out(map.target.dim(), map.source.dim());
  for (int r = 0; r < map.target.dim(); ++r) {
    for (int c = 0; c < map.source.dim(); ++c) {
      out.at(r, c) = diff(map.components[r], map.source.coords[c]);
    }
  }
  return out;
}

Eigen::MatrixXd jacobian(const SmoothMap& map, const Point& p) {
  ExprMatrix jm = jacobian_matrix(map);
  EvalEnv env = map.source.bind(p);
  return eval(jm, env);
}

CheckReport f_related(const SmoothMap& map, const VectorField& x,
                      const VectorField& y, const SampleSpec& spec, double tol,
                      Exec exec) {
  if (!(x.chart == map.source)) {
    throw ShapeError("f_related: X must live on the source chart");
  }
  if (!(y.chart == map.target)) {
    throw ShapeError("f_related: Y must live on the target chart");
  }
  ExprMatrix jm = jacobian_matrix(map);
  auto residual = [&map, &x, &y, jm](const Point& p) {
    EvalEnv env = map.source.bind(p);
    Eigen::MatrixXd tfp = eval(jm, env);
    Point xp = x.eval_at(p);
    Point fp = map.eval_at(p);
    Point yfp = y.eval_at(fp);
    return (tfp * xp - yfp).lpNorm<Eigen::Infinity>();
  };
  return run_check("f_related", spec, map.source.dim(), residual, tol, exec);
}

Curve flow(const VectorField& field, const Point& start, double t_end,
           double step) {
  if (step <= 0.0) throw ShapeError("flow: step must be positive");
  if (t_end < 0.0) throw ShapeError("flow: negative end time");
  Curve curve;
  curve.step = step;
  const int n_steps = int(std::ceil(t_end / step - 1e-12));
  Point state = start;
  double t = 0.0;
  curve.times.push_back(t);
  curve.states.push_back(state);
  auto deriv = [&field](const Point& p) { return field.eval_at(p); };
  for (int i = 0; i < n_steps; ++i) {
    double h = std::min(step, t_end - t);
    try {
      Point k1 = deriv(state);
      Point k2 = deriv(state + 0.5 * h * k1);
      Point k3 = deriv(state + 0.5 * h * k2);
      Point k4 = deriv(state + h * k3);
      state = state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    } catch (const std::exception& ex) {
      curve.aborted = Curve::Failure{t, ex.what()};
      return curve;
    }
    t += h;
    curve.times.push_back(t);
    curve.states.push_back(state);
  }
  return curve;
}

}  // namespace alg
