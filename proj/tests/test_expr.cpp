#include <cmath>
#include <string>
#include <vector>

#include "alg/expr.hpp"
#include "alg/fields.hpp"
#include "doctest.h"
#include "support/oracles.hpp"
#include "support/random_expr.hpp"

using namespace alg;

namespace {

const std::vector<std::string> kXY = {"x1", "y1"};

double eval_at(const Expr& e, const std::vector<std::string>& coords,
               std::initializer_list<double> values) {
  std::vector<double> v(values);
  return eval(e, EvalEnv(coords, v));
}

}  // namespace

TEST_CASE("parse builds the expected tree") {
  Expr e = parse_expr("x1^2 + y1^2", kXY);
  REQUIRE(e.kind() == ExprKind::Add);
  CHECK(e.lhs().kind() == ExprKind::Pow);
  CHECK(e.lhs().child().kind() == ExprKind::Variable);
  CHECK(e.lhs().child().name() == "x1");
  CHECK(e.lhs().exponent() == 2);
  CHECK(e.rhs().kind() == ExprKind::Pow);
  CHECK(e.rhs().child().name() == "y1");
}

TEST_CASE("evaluation of a sum of squares") {
  Expr e = parse_expr("x1^2 + y1^2", kXY);
  CHECK(eval_at(e, kXY, {3.0, 4.0}) == 25.0);
}

TEST_CASE("precedence and unary minus") {
  CHECK(eval_at(parse_expr("2 + 3 * 4", kXY), kXY, {0, 0}) == 14.0);
  CHECK(eval_at(parse_expr("-x1^2", kXY), kXY, {3, 0}) == -9.0);
  CHECK(eval_at(parse_expr("(2 + 3) * 4", kXY), kXY, {0, 0}) == 20.0);
  CHECK(eval_at(parse_expr("2 - 3 - 4", kXY), kXY, {0, 0}) == -5.0);
  CHECK(eval_at(parse_expr("16 / 4 / 2", kXY), kXY, {0, 0}) == 2.0);
  CHECK(eval_at(parse_expr("x1^-2", kXY), kXY, {2, 0}) == 0.25);
  CHECK(eval_at(parse_expr("x1^(-2)", kXY), kXY, {2, 0}) == 0.25);
  CHECK(eval_at(parse_expr("1e2 + 1.5e-2", kXY), kXY, {0, 0}) ==
        doctest::Approx(100.015).epsilon(1e-14));
}

TEST_CASE("parser rejects bad input") {
  CHECK_THROWS_AS(parse_expr("x1 +", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("x1 + qq", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("x1^2.5", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("x1^y1", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("sin x1", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("(x1", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("", kXY), ParseError);
  CHECK_THROWS_AS(parse_expr("x1 y1", kXY), ParseError);

  try {
    parse_expr("x1 + qq", kXY);
    FAIL("expected ParseError");
  } catch (const ParseError& err) {
    CHECK(err.position() == 5);
    CHECK(std::string(err.what()).find("qq") != std::string::npos);
  }
}

TEST_CASE("division by zero carries the offending subexpression") {
  Expr e = parse_expr("1 / (x1 - x1)", kXY);
  try {
    eval_at(e, kXY, {1.0, 2.0});
    FAIL("expected EvalError");
  } catch (const EvalError& err) {
    CHECK(err.subexpression().find("x1 - x1") != std::string::npos);
  }
  Expr zero_neg_pow = parse_expr("x1^-1", kXY);
  CHECK_THROWS_AS(eval_at(zero_neg_pow, kXY, {0.0, 0.0}), EvalError);
}

TEST_CASE("unbound variable raises") {
  Expr e = Expr::variable("zz");
  CHECK_THROWS_AS(eval_at(e, kXY, {0.0, 0.0}), EvalError);
}

TEST_CASE("derivative of a sum of squares") {
  Expr e = parse_expr("x1^2 + y1^2", kXY);
  Expr d = diff(e, "x1");
  // 2 * x1 up to trivial shape
  CHECK(eval_at(d, kXY, {3.0, 4.0}) == 6.0);
  CHECK(eval_at(d, kXY, {-0.5, 9.0}) == -1.0);
  Expr expected = Expr::mul(Expr::constant(2.0), Expr::variable("x1"));
  CHECK(structurally_equal(simplify(d), simplify(expected)));
}

TEST_CASE("chain rule through sin") {
  const std::vector<std::string> coords = {"x1", "x2"};
  Expr e = parse_expr("sin(x1 * x2)", coords);
  Expr d = diff(e, "x1");
  // cos(x1*x2) * x2
  std::vector<double> p = {0.7, -1.3};
  double expected = std::cos(0.7 * -1.3) * -1.3;
  CHECK(eval(d, EvalEnv(coords, p)) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("simplify folds constants and identities") {
  Expr e = parse_expr("0 * x1 + 1 * y1", kXY);
  CHECK(structurally_equal(simplify(e), Expr::variable("y1")));
  CHECK(structurally_equal(simplify(parse_expr("2 * 3", kXY)),
                           Expr::constant(6.0)));
  CHECK(structurally_equal(simplify(parse_expr("x1 - x1", kXY)),
                           Expr::constant(0.0)));
  CHECK(structurally_equal(simplify(parse_expr("x1 + -x1", kXY)),
                           Expr::constant(0.0)));
  CHECK(structurally_equal(simplify(parse_expr("x1^1", kXY)),
                           Expr::variable("x1")));
  CHECK(structurally_equal(simplify(parse_expr("x1 / 1", kXY)),
                           Expr::variable("x1")));
}

TEST_CASE("simplify is idempotent and value-preserving on random expressions") {
  Rng rng(2024);
  Chart chart({"x1", "y1"});
  for (int trial = 0; trial < 200; ++trial) {
    Expr e = testsupport::random_expr(rng, kXY, 4);
    Expr s = simplify(e);
    CHECK(structurally_equal(simplify(s), s));
    for (int k = 0; k < 5; ++k) {
      Point p(2);
      p << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
      double ve = eval(e, chart.bind(p));
      double vs = eval(s, chart.bind(p));
      CHECK(ve == doctest::Approx(vs).epsilon(1e-12));
    }
  }
}

TEST_CASE("print then parse evaluates identically") {
  Rng rng(77);
  Chart chart({"x1", "y1"});
  for (int trial = 0; trial < 300; ++trial) {
    Expr e = testsupport::random_expr(rng, kXY, 4);
    Expr round = parse_expr(to_string(e), kXY);
    for (int k = 0; k < 4; ++k) {
      Point p(2);
      p << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
      // bit-for-bit: printing must not lose constant precision
      CHECK(eval(e, chart.bind(p)) == eval(round, chart.bind(p)));
    }
  }
}

TEST_CASE("negative exponents survive the print/parse loop") {
  Expr e = Expr::pow(Expr::variable("x1"), -3);
  Expr round = parse_expr(to_string(e), kXY);
  CHECK(eval_at(round, kXY, {2.0, 0.0}) == 0.125);
}

TEST_CASE("symbolic derivative matches central finite differences") {
  Rng rng(914);
  Chart chart({"x1", "y1", "z1"});
  const std::vector<std::string> coords = chart.coords;
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Expr e = testsupport::random_expr(rng, coords, 4);
    for (int v = 0; v < 3; ++v) {
      Expr d = diff(e, coords[v]);
      for (int k = 0; k < 3; ++k) {
        Point p(3);
        p << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0),
            rng.uniform(-1.0, 1.0);
        double analytic = eval(d, chart.bind(p));
        double fd = testsupport::central_fd(e, chart, v, p);
        CHECK(std::abs(analytic - fd) <= 1e-5 * (1.0 + std::abs(analytic)));
        ++checked;
      }
    }
  }
  CHECK(checked == 900);
}

TEST_CASE("substitution composes expressions") {
  const std::vector<std::string> ab = {"a", "b"};
  Expr e = parse_expr("a^2 + b", ab);
  std::vector<std::pair<std::string, Expr>> binds = {
      {"a", parse_expr("x1 + y1", kXY)},
      {"b", parse_expr("x1 * y1", kXY)},
  };
  Expr g = substitute(e, binds);
  // (x1+y1)^2 + x1*y1 at (2,3) = 25 + 6
  CHECK(eval_at(g, kXY, {2.0, 3.0}) == 31.0);
}

TEST_CASE("free variables are sorted and deduplicated") {
  Expr e = parse_expr("y1 * x1 + sin(y1)", kXY);
  auto vars = free_variables(e);
  REQUIRE(vars.size() == 2);
  CHECK(vars[0] == "x1");
  CHECK(vars[1] == "y1");
}

TEST_CASE("format_real round-trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, -2.5e300, 3.0, 0.0}) {
    CHECK(std::strtod(format_real(v).c_str(), nullptr) == v);
  }
}
