#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alg/check.hpp"
#include "alg/expr.hpp"
#include "alg/expr_matrix.hpp"

namespace alg {

// Ordered coordinate names on an open subset of R^n.
struct Chart {
  std::vector<std::string> coords;

  Chart() = default;
  explicit Chart(std::vector<std::string> names);
  // Convenience: "x" with indices 1..n -> x1, ..., xn.
  static Chart numbered(const std::string& stem, int n);

  int dim() const { return int(coords.size()); }
  int index_of(const std::string& name) const;  // -1 if absent
  EvalEnv bind(const Point& p) const;           // p must have size dim()
  bool operator==(const Chart& other) const { return coords == other.coords; }
};

// Vector field on a chart: one component expression per coordinate.
struct VectorField {
  Chart chart;
  std::vector<Expr> components;

  VectorField() = default;
  VectorField(Chart chart, std::vector<Expr> components);

  Point eval_at(const Point& p) const;
};

// [X,Y]^k = sum_i X^i d_i Y^k - Y^i d_i X^k.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

// Smooth map between charts, one target component per target coordinate,
// each over the source coordinates.
struct SmoothMap {
  Chart source;
  Chart target;
  std::vector<Expr> components;

  SmoothMap() = default;
  SmoothMap(Chart source, Chart target, std::vector<Expr> components);
  static SmoothMap identity(const Chart& chart);

  Point eval_at(const Point& p) const;
  // Bindings target-coordinate -> component expression, for pullbacks.
  std::vector<std::pair<std::string, Expr>> bindings() const;
};

// g after f (source of g must be the target of f).
SmoothMap compose(const SmoothMap& g, const SmoothMap& f);

// Entry (r, c) = d component_r / d source_c.
ExprMatrix jacobian_matrix(const SmoothMap& map);
Eigen::MatrixXd jacobian(const SmoothMap& map, const Point& p);

// max-norm residual of Tf(X(p)) - Y(f(p)) over sampled points: tests whether
// X and Y are f-related.
CheckReport f_related(const SmoothMap& map, const VectorField& x,
                      const VectorField& y, const SampleSpec& spec, double tol,
                      Exec exec = Exec::Parallel);

// Fixed-step fourth-order Runge-Kutta trajectory.
struct Curve {
  std::vector<double> times;
  std::vector<Point> states;
  double step = 0.0;
  // Set when evaluation failed mid-trajectory; the curve keeps the points
  // computed before the failure.
  struct Failure {
    double time;
    std::string message;
  };
  std::optional<Failure> aborted;
};

Curve flow(const VectorField& field, const Point& start, double t_end,
           double step);

}  // namespace alg
