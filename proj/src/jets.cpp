#include "alg/jets.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "alg/errors.hpp"

namespace alg {

namespace {

JetIndex bumped(const JetIndex& j, int direction) {
  return direction == 0 ? JetIndex{j.p + 1, j.q} : JetIndex{j.p, j.q + 1};
}

Expr jet_variable(const JetIndex& j) {
  return Expr::variable(jet_coordinate_name(j));
}

void require_direction(int direction) {
  if (direction != 0 && direction != 1) {
    throw ShapeError("jet direction must be 0 (x) or 1 (y)");
  }
}

void require_base_template(const VectorField& v, const char* who) {
  static const Chart base = JetChart(0).chart;
  if (!(v.chart == base)) {
    throw ShapeError(std::string(who) +
                     ": field must be a d/dx + b d/dy + c d/du with "
                     "coefficients over (x, y, u)");
  }
}

}  // namespace

std::string jet_coordinate_name(const JetIndex& j) {
  if (j.p == 0 && j.q == 0) return "u";
  std::string name = "u_";
  name.append(std::size_t(j.p), 'x');
  name.append(std::size_t(j.q), 'y');
  return name;
}

JetChart::JetChart(int order) : order(order) {
  if (order < 0) throw ShapeError("JetChart: order must be >= 0");
  std::vector<std::string> names = {"x", "y"};
  for (int k = 0; k <= order; ++k) {
    for (int p = k; p >= 0; --p) {
      names.push_back(jet_coordinate_name({p, k - p}));
    }
  }
  chart = Chart(std::move(names));
}

std::vector<JetIndex> JetChart::indices() const {
  std::vector<JetIndex> out;
  for (int k = 0; k <= order; ++k) {
    for (int p = k; p >= 0; --p) out.push_back({p, k - p});
  }
  return out;
}

int JetChart::position(const JetIndex& j) const {
  if (j.p < 0 || j.q < 0 || j.order() > order) {
    throw ShapeError("JetChart: index " + jet_coordinate_name(j) +
                     " is outside this chart");
  }
  return 2 + j.order() * (j.order() + 1) / 2 + (j.order() - j.p);
}

Expr total_derivative(const JetChart& source, const Expr& e, int direction) {
  require_direction(direction);
  for (const std::string& name : free_variables(e)) {
    if (source.chart.index_of(name) < 0) {
      throw ShapeError("total_derivative: expression uses '" + name +
                       "', not a coordinate of the order-" +
                       std::to_string(source.order) + " jet chart");
    }
  }
  Expr out = diff(e, direction == 0 ? "x" : "y");
  for (const JetIndex& j : source.indices()) {
    out = out + jet_variable(bumped(j, direction)) *
                    diff(e, jet_coordinate_name(j));
  }
  return out;
}

PDESystem1 make_pde_system(Expr phi, Expr psi) {
  static const Chart base = JetChart(0).chart;
  for (const Expr* side : {&phi, &psi}) {
    for (const std::string& name : free_variables(*side)) {
      if (base.index_of(name) < 0) {
        throw ShapeError("make_pde_system: right-hand sides must only use "
                         "x, y, u (found '" + name + "')");
      }
    }
  }
  return PDESystem1{std::move(phi), std::move(psi)};
}

Expr integrability_residual(const PDESystem1& s) {
  return diff(s.psi, "x") + s.phi * diff(s.psi, "u") - diff(s.phi, "y") -
         s.psi * diff(s.phi, "u");
}

Expr integrability_residual_total_form(const PDESystem1& s) {
  JetChart base(0);
  Expr mixed = total_derivative(base, s.psi, 0) -
               total_derivative(base, s.phi, 1);
  std::vector<std::pair<std::string, Expr>> binds = {{"u_x", s.phi},
                                                     {"u_y", s.psi}};
  return substitute(mixed, binds);
}

std::pair<VectorField, VectorField> system_fields(const PDESystem1& s) {
  Chart base = JetChart(0).chart;
  VectorField x(base, {Expr::constant(1.0), Expr::constant(0.0), s.phi});
  VectorField y(base, {Expr::constant(0.0), Expr::constant(1.0), s.psi});
  return {std::move(x), std::move(y)};
}

CheckReport involutivity_check(const PDESystem1& s, const SampleSpec& spec,
                               double tol, Exec exec) {
  auto [x, y] = system_fields(s);
  VectorField br = lie_bracket(x, y);
  Expr obstruction = integrability_residual(s);
  const Chart chart = x.chart;
  auto residual = [&br](const Point& p) {
    return br.eval_at(p).lpNorm<Eigen::Infinity>();
  };
  CheckReport rep =
      run_check("involutivity", spec, chart.dim(), residual, tol, exec);
  // the bracket has only a d/du component and it must equal the closed-form
  // obstruction; a mismatch means the two derivations disagree
  double worst_gap = 0.0;
  for (const Point& p : sample_points(spec, chart.dim())) {
    EvalEnv env = chart.bind(p);
    double via_bracket = br.eval_at(p).lpNorm<Eigen::Infinity>();
    double via_formula = std::abs(eval(obstruction, env));
    worst_gap = std::max(worst_gap, std::abs(via_bracket - via_formula));
  }
  if (worst_gap > 1e-12) {
    rep.error = "bracket norm disagrees with the closed-form obstruction by " +
                format_real(worst_gap);
    rep.pass = false;
  }
  return rep;
}

Expr characteristic(const VectorField& v) {
  require_base_template(v, "characteristic");
  return v.components[2] - v.components[0] * Expr::variable("u_x") -
         v.components[1] * Expr::variable("u_y");
}

VectorField prolong(const VectorField& v, int order) {
  require_base_template(v, "prolong");
  if (order < 0 || order > 3) {
    throw ShapeError("prolong: order must be between 0 and 3");
  }
  const Expr& a = v.components[0];
  const Expr& b = v.components[1];
  JetChart target(order);
  std::vector<Expr> eta;  // one per index, in chart order
  eta.push_back(v.components[2]);
  for (const JetIndex& j : target.indices()) {
    if (j.order() == 0) continue;
    // recurse from the previous index along x when possible, else along y
    JetIndex prev = j.p > 0 ? JetIndex{j.p - 1, j.q} : JetIndex{0, j.q - 1};
    int dir = j.p > 0 ? 0 : 1;
    JetChart source(j.order() - 1);
    const Expr& prev_eta = eta[std::size_t(source.position(prev)) - 2];
    Expr next = total_derivative(source, prev_eta, dir) -
                jet_variable(bumped(prev, 0)) * total_derivative(source, a,
                                                                 dir) -
                jet_variable(bumped(prev, 1)) * total_derivative(source, b,
                                                                 dir);
    eta.push_back(std::move(next));
  }
  std::vector<Expr> comps = {a, b};
  for (Expr& e : eta) comps.push_back(std::move(e));
  return VectorField(target.chart, std::move(comps));
}

CheckReport prolong_bracket_check(const VectorField& v, const VectorField& w,
                                  int order, const SampleSpec& spec,
                                  double tol, Exec exec) {
  VectorField direct = prolong(lie_bracket(v, w), order);
  VectorField composed = lie_bracket(prolong(v, order), prolong(w, order));
  auto residual = [&direct, &composed](const Point& p) {
    return (direct.eval_at(p) - composed.eval_at(p))
        .lpNorm<Eigen::Infinity>();
  };
  return run_check("prolongation_bracket", spec, direct.chart.dim(), residual,
                   tol, exec);
}

std::vector<ContactForm> cartan_contact_forms(int order) {
  if (order < 1 || order > 3) {
    throw ShapeError("cartan_contact_forms: order must be between 1 and 3");
  }
  JetChart target(order);
  std::vector<ContactForm> forms;
  for (const JetIndex& j : target.indices()) {
    if (j.order() > order - 1) continue;
    std::vector<Expr> coeffs(std::size_t(target.chart.dim()));
    coeffs[std::size_t(target.position(j))] = Expr::constant(1.0);
    coeffs[0] = -jet_variable(bumped(j, 0));
    coeffs[1] = -jet_variable(bumped(j, 1));
    forms.push_back({j, std::move(coeffs)});
  }
  return forms;
}

Expr contact_pairing(const ContactForm& form, const VectorField& field) {
  if (form.coefficients.size() != field.components.size()) {
    throw ShapeError("contact_pairing: form and field live on different "
                     "charts");
  }
  Expr out;
  for (std::size_t i = 0; i < form.coefficients.size(); ++i) {
    out = out + form.coefficients[i] * field.components[i];
  }
  return out;
}

VectorField total_derivative_lift(int order, int direction) {
  require_direction(direction);
  if (order < 1 || order > 3) {
    throw ShapeError("total_derivative_lift: order must be between 1 and 3");
  }
  JetChart target(order);
  std::vector<Expr> comps(std::size_t(target.chart.dim()));
  comps[std::size_t(direction)] = Expr::constant(1.0);
  for (const JetIndex& j : target.indices()) {
    if (j.order() >= order) continue;
    comps[std::size_t(target.position(j))] = jet_variable(bumped(j, direction));
  }
  return VectorField(target.chart, std::move(comps));
}

ProjectiveSystem jet_system(int max_order) {
  if (max_order < 0) throw ShapeError("jet_system: order must be >= 0");
  std::vector<Chart> charts;
  for (int k = 0; k <= max_order; ++k) charts.push_back(JetChart(k).chart);
  std::vector<SmoothMap> steps;
  for (int k = 0; k + 1 <= max_order; ++k) {
    std::vector<Expr> comps;
    comps.reserve(charts[k].coords.size());
    for (const std::string& name : charts[k].coords) {
      comps.push_back(Expr::variable(name));
    }
    steps.emplace_back(charts[k + 1], charts[k], std::move(comps));
  }
  return ProjectiveSystem(std::move(charts), std::move(steps));
}

}  // namespace alg
