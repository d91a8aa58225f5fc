#include <cmath>

#include "alg/tower.hpp"
#include "doctest.h"
#include "support/random_expr.hpp"

using namespace alg;

namespace {

// Truncation system R^2 <- R^4 <- R^6 over numbered coordinates.
ProjectiveSystem truncation_system() {
  std::vector<Chart> charts = {Chart::numbered("x", 2), Chart::numbered("x", 4),
                               Chart::numbered("x", 6)};
  std::vector<SmoothMap> steps;
  for (int k = 0; k + 1 < 3; ++k) {
    std::vector<Expr> comps;
    for (int i = 0; i < charts[k].dim(); ++i) {
      comps.push_back(Expr::variable(charts[k + 1].coords[i]));
    }
    steps.emplace_back(charts[k + 1], charts[k], std::move(comps));
  }
  return ProjectiveSystem(std::move(charts), std::move(steps));
}

// Coherent random family of sections over a truncation-shaped tower: the
// coarsest level is random, finer levels extend it with fresh components.
std::vector<Section> random_family(const AlgebroidTower& tower, Rng& rng) {
  std::vector<Section> out;
  for (int k = 0; k < tower.level_count(); ++k) {
    const Chart& chart = tower.base.levels[k];
    std::vector<Expr> comps;
    if (k == 0) {
      for (int i = 0; i < tower.levels[0]->fiber_dim(); ++i) {
        comps.push_back(random_polynomial(rng, chart, 2));
      }
    } else {
      auto binds = tower.base.steps[k - 1].bindings();
      for (const Expr& c : out.back().components) {
        comps.push_back(substitute(c, binds));
      }
      for (int i = int(comps.size()); i < tower.levels[k]->fiber_dim(); ++i) {
        comps.push_back(random_polynomial(rng, chart, 2));
      }
    }
    out.emplace_back(tower.levels[k], std::move(comps));
  }
  return out;
}

double entry_residual(const TowerReport& report, int low, int high,
                      const std::string& condition, bool* found = nullptr) {
  for (const TowerReport::Entry& e : report.entries) {
    if (e.low == low && e.high == high && e.condition == condition) {
      if (found) *found = true;
      return e.report.max_residual;
    }
  }
  if (found) *found = false;
  return -1.0;
}

}  // namespace

TEST_CASE("bonding maps compose through every intermediate level") {
  ProjectiveSystem sys = truncation_system();
  CHECK(sys.level_count() == 3);
  // identity on the diagonal
  SmoothMap self = sys.bonding(1, 1);
  Point p(4);
  p << 1.0, 2.0, 3.0, 4.0;
  CHECK((self.eval_at(p) - p).norm() == 0.0);
  // two-step truncation keeps the leading block
  SmoothMap two = sys.bonding(0, 2);
  Point q(6);
  q << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  Point dropped = two.eval_at(q);
  CHECK(dropped[0] == 1.0);
  CHECK(dropped[1] == 2.0);
  CHECK(dropped.size() == 2);
  CHECK_THROWS_AS(sys.bonding(2, 0), ShapeError);

  // mismatched step charts are rejected at construction
  std::vector<Chart> charts = {Chart::numbered("x", 2),
                               Chart::numbered("x", 3)};
  std::vector<SmoothMap> bad_steps = {SmoothMap::identity(charts[0])};
  CHECK_THROWS_AS(ProjectiveSystem(charts, bad_steps), ShapeError);
}

TEST_CASE("threads are exactly the families the bonding maps accept") {
  ProjectiveSystem sys = truncation_system();
  Thread good;
  good.points = {Point(2), Point(4), Point(6)};
  good.points[0] << 1, 2;
  good.points[1] << 1, 2, 3, 4;
  good.points[2] << 1, 2, 3, 4, 5, 6;
  CHECK(validate_thread(sys, good, 1e-12));

  Thread bad = good;
  bad.points[1][0] = 9.0;
  CHECK_FALSE(validate_thread(sys, bad, 1e-12));

  Thread short_thread;
  short_thread.points = {Point(2)};
  CHECK_THROWS_AS(validate_thread(sys, short_thread, 1e-12), ShapeError);

  // a single-level system is vacuously coherent
  ProjectiveSystem trivial({Chart::numbered("x", 2)}, {});
  Thread single;
  single.points = {Point(2)};
  single.points[0] << 7.0, -3.0;
  CHECK(validate_thread(trivial, single, 0.0));

  // pushing any finest point down yields a thread
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    Point top(6);
    for (int i = 0; i < 6; ++i) top[i] = rng.uniform(-2.0, 2.0);
    CHECK(validate_thread(sys, thread_from_top(sys, top), 1e-12));
  }
}

TEST_CASE("identity tower verifies with zero residuals") {
  AlgebroidTower tower = identity_tower(Chart::numbered("x", 2), 3);
  SampleSpec spec{-2.0, 2.0, 30, 5};
  TowerReport report = verify_system(tower, spec, 1e-12);
  CHECK(report.pass);
  CHECK(report.max_residual == 0.0);
  CHECK(report.entries.size() == 9);  // 3 pairs x 3 conditions
}

TEST_CASE("deformed tangent tower: every compatibility condition holds at "
          "depth three") {
  AlgebroidTower tower = nijenhuis_tower(3);
  CHECK(tower.level_count() == 3);
  CHECK(tower.levels[1]->fiber_dim() == 4);
  SampleSpec spec{-1.5, 1.5, 40, 11};
  TowerReport report = verify_system(tower, spec, 1e-9);
  CHECK(report.pass);
  for (const TowerReport::Entry& e : report.entries) {
    INFO(e.condition, " ", e.low, "->", e.high);
    CHECK(e.report.max_residual <= 1e-9);
  }
}

TEST_CASE("tensor blocks commute with the truncation, frozen at a point") {
  AlgebroidTower tower = nijenhuis_tower(2);
  BundleMorphism psi = tower.morphism(0, 1);
  SmoothMap delta = tower.base.bonding(0, 1);
  // rho_0 . f at (1,2,0,1): tensor block (x1^2+y1^2) = 5 on the surviving
  // pair, times the truncation — the 2 x 4 matrix [5 I | 0]
  ExprMatrix lhs = mul(substitute(tower.levels[0]->anchor(), delta.bindings()),
                       psi.fiber_map);
  ExprMatrix rhs =
      mul(jacobian_matrix(delta), tower.levels[1]->anchor());
  Point p(4);
  p << 1.0, 2.0, 0.0, 1.0;
  EvalEnv env = tower.base.levels[1].bind(p);
  Eigen::MatrixXd expected(2, 4);
  expected << 5, 0, 0, 0, 0, 5, 0, 0;
  CHECK((eval(lhs, env) - expected).norm() == 0.0);
  CHECK((eval(rhs, env) - expected).norm() == 0.0);
}

TEST_CASE("scaling one fiber step breaks anchor compatibility where the "
          "step sits") {
  AlgebroidTower broken = scale_step_fiber(nijenhuis_tower(3), 0, 2.0);
  SampleSpec spec{-1.5, 1.5, 40, 11};
  TowerReport report = verify_system(broken, spec, 1e-9);
  CHECK_FALSE(report.pass);
  bool found = false;
  double residual = entry_residual(report, 0, 1, "anchor_compatibility",
                                   &found);
  CHECK(found);
  CHECK(residual > 0.1);
  // the untouched pair further up stays clean
  CHECK(entry_residual(report, 1, 2, "anchor_compatibility") <= 1e-9);
}

TEST_CASE("corank-one tower of constant distributions verifies exactly") {
  AlgebroidTower tower = corank1_tower(3);
  CHECK(tower.base.levels[0].dim() == 3);
  CHECK(tower.base.levels[2].dim() == 7);
  CHECK(tower.levels[0]->fiber_dim() == 2);
  SampleSpec spec{-2.0, 2.0, 30, 13};
  TowerReport report = verify_system(tower, spec, 1e-12);
  CHECK(report.pass);
  CHECK(report.max_residual == 0.0);

  // the mean coordinate survives every truncation
  for (int high = 1; high < 3; ++high) {
    SmoothMap delta = tower.base.bonding(0, high);
    Expr mean_low = Expr::variable("a0");
    Expr moved = substitute(mean_low, delta.bindings());
    CHECK(structurally_equal(moved, Expr::variable("a0")));
  }
}

TEST_CASE("limit sections accept coherent families and reject a mismatch in "
          "a killed coordinate") {
  SampleSpec spec{-2.0, 2.0, 40, 17};

  AlgebroidTower id_tower = identity_tower(Chart::numbered("x", 2), 3);
  std::vector<Section> units;
  for (int k = 0; k < 3; ++k) {
    units.push_back(make_section(id_tower.levels[k],
                                 {Expr::constant(1.0), Expr::constant(1.0)}));
  }
  LimitSectionResult id_result = limit_section(id_tower, units, spec, 1e-12);
  CHECK(id_result.section.has_value());
  CHECK(id_result.coherence.max_residual == 0.0);

  AlgebroidTower tower = nijenhuis_tower(2);
  std::vector<Section> frames;
  frames.push_back(make_section(tower.levels[0],
                                {Expr::constant(1.0), Expr::constant(0.0)}));
  frames.push_back(make_section(tower.levels[1],
                                {Expr::constant(1.0), Expr::constant(0.0),
                                 Expr::constant(0.0), Expr::constant(0.0)}));
  LimitSectionResult accepted = limit_section(tower, frames, spec, 1e-9);
  CHECK(accepted.section.has_value());

  // evaluation along a thread returns the per-level fiber vectors
  Point top(4);
  top << 0.5, -2.0, 0.3, 0.7;
  Thread thread = thread_from_top(tower.base, top);
  std::vector<Point> values = accepted.section->eval_at(thread);
  REQUIRE(values.size() == 2);
  CHECK(values[0][0] == 1.0);
  CHECK(values[1].size() == 4);
  CHECK(values[1][3] == 0.0);

  // perturbing the fine section by a killed coordinate breaks coherence
  std::vector<Section> torn = frames;
  torn[1] = make_section(tower.levels[1],
                         {parse_expr("1 + x2", tower.base.levels[1].coords),
                          Expr::constant(0.0), Expr::constant(0.0),
                          Expr::constant(0.0)});
  LimitSectionResult rejected = limit_section(tower, torn, spec, 1e-9);
  CHECK_FALSE(rejected.section.has_value());
  CHECK(rejected.coherence.max_residual > 0.5);

  // wrong parentage is a shape error, not a residual
  std::vector<Section> foreign = frames;
  auto other = nijenhuis_tower(2);
  foreign[0] = make_section(other.levels[0],
                            {Expr::constant(1.0), Expr::constant(0.0)});
  CHECK_THROWS_AS(limit_section(tower, foreign, spec, 1e-9), ShapeError);
}

TEST_CASE("levelwise bracket of coherent families stays coherent and "
          "matches the hand expansion") {
  AlgebroidTower tower = nijenhuis_tower(2);
  SampleSpec spec{-2.0, 2.0, 40, 19};
  std::vector<Section> first;
  std::vector<Section> second;
  for (int k = 0; k < 2; ++k) {
    int m = tower.levels[k]->fiber_dim();
    std::vector<Expr> e1(m, Expr::constant(0.0));
    std::vector<Expr> e2(m, Expr::constant(0.0));
    e1[0] = Expr::constant(1.0);
    e2[1] = Expr::constant(1.0);
    first.push_back(make_section(tower.levels[k], std::move(e1)));
    second.push_back(make_section(tower.levels[k], std::move(e2)));
  }
  LimitSection ls1 = *limit_section(tower, first, spec, 1e-9).section;
  LimitSection ls2 = *limit_section(tower, second, spec, 1e-9).section;

  LimitSection br = limit_bracket(tower, ls1, ls2);
  LimitSectionResult reaccepted =
      limit_section(tower, br.levels, spec, 1e-9);
  CHECK(reaccepted.section.has_value());

  // level 0 bracket is (-2 y1, 2 x1), worked by hand
  Point p(2);
  p << 0.5, -2.0;
  Point v = br.levels[0].eval_at(p);
  CHECK(v[0] == 4.0);
  CHECK(v[1] == 1.0);

  // antisymmetry: [s, s] vanishes levelwise
  LimitSection self = limit_bracket(tower, ls1, ls1);
  for (const Section& s : self.levels) {
    Point q = Point::Zero(s.parent->base().dim());
    CHECK(s.eval_at(q).norm() == 0.0);
  }
}

TEST_CASE("brackets of random coherent families are accepted as limit "
          "sections") {
  SampleSpec spec{-1.5, 1.5, 50, 23};
  Rng rng(29);
  for (AlgebroidTower tower : {nijenhuis_tower(3), corank1_tower(3)}) {
    std::vector<Section> f1 = random_family(tower, rng);
    std::vector<Section> f2 = random_family(tower, rng);
    LimitSectionResult r1 = limit_section(tower, f1, spec, 1e-9);
    LimitSectionResult r2 = limit_section(tower, f2, spec, 1e-9);
    REQUIRE(r1.section.has_value());
    REQUIRE(r2.section.has_value());
    LimitSection br = limit_bracket(tower, *r1.section, *r2.section);
    LimitSectionResult reaccepted =
        limit_section(tower, br.levels, spec, 1e-8);
    CHECK(reaccepted.section.has_value());
  }
}

TEST_CASE("multiplying a coherent bracket by a coherent function keeps it "
          "coherent") {
  AlgebroidTower tower = nijenhuis_tower(3);
  SampleSpec spec{-1.5, 1.5, 40, 31};
  Rng rng(37);
  const int low = 0;
  const int high = 2;
  auto [s1_low, s1_high] = coherent_section_pair(tower, low, high, rng);
  auto [s2_low, s2_high] = coherent_section_pair(tower, low, high, rng);
  Expr g_low = random_polynomial(rng, tower.base.levels[low], 2);
  SmoothMap delta = tower.base.bonding(low, high);
  Expr g_high = substitute(g_low, delta.bindings());
  BundleMorphism psi = tower.morphism(low, high);

  std::vector<Expr> high_br = tower.levels[high]->bracket_components(
      s1_high.components, s2_high.components);
  for (Expr& c : high_br) c = g_high * c;
  std::vector<Expr> lhs = matvec(psi.fiber_map, high_br);

  std::vector<Expr> low_br = tower.levels[low]->bracket_components(
      s1_low.components, s2_low.components);
  auto binds = delta.bindings();
  std::vector<Expr> rhs;
  for (const Expr& c : low_br) rhs.push_back(substitute(g_low * c, binds));

  const Chart& fine = tower.base.levels[high];
  double worst = 0.0;
  for (const Point& p : sample_points(spec, fine.dim())) {
    EvalEnv env = fine.bind(p);
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      worst = std::max(worst,
                       std::abs(eval(lhs[i], env) - eval(rhs[i], env)));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("coherent pair generation requires truncation shape") {
  // a square bonding map is not a truncation
  Chart coarse({"x1"});
  Chart fine({"x1", "x2"});
  SmoothMap squared(fine, coarse, {parse_expr("x1^2", fine.coords)});
  ExprMatrix fiber(1, 2);
  fiber.at(0, 0) = parse_expr("2 * x1", fine.coords);
  AlgebroidTower tower(
      ProjectiveSystem({coarse, fine}, {squared}),
      {tangent_algebroid(coarse), tangent_algebroid(fine)}, {fiber});
  Rng rng(41);
  CHECK_THROWS_AS(coherent_section_pair(tower, 0, 1, rng), ShapeError);
}

TEST_CASE("matrix tuples commuting with the bonding maps form a group") {
  std::vector<Eigen::MatrixXd> lambdas = {Eigen::MatrixXd::Zero(2, 4),
                                          Eigen::MatrixXd::Zero(4, 6)};
  lambdas[0].leftCols(2) = Eigen::MatrixXd::Identity(2, 2);
  lambdas[1].leftCols(4) = Eigen::MatrixXd::Identity(4, 4);

  auto diag = [](std::initializer_list<double> values) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(long(values.size()),
                                              long(values.size()));
    int i = 0;
    for (double v : values) m(i, i) = v, ++i;
    return m;
  };

  std::vector<Eigen::MatrixXd> identity = {
      Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(4, 4),
      Eigen::MatrixXd::Identity(6, 6)};
  CHECK(h0_membership(identity, lambdas));

  std::vector<Eigen::MatrixXd> doubled = {diag({2, 2}), diag({2, 2, 2, 2}),
                                          diag({2, 2, 2, 2, 2, 2})};
  CHECK(h0_membership(doubled, lambdas));

  // scaling only the coarse level cannot commute with the truncation
  std::vector<Eigen::MatrixXd> mismatched = {
      2.0 * Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(4, 4),
      Eigen::MatrixXd::Identity(6, 6)};
  CHECK_FALSE(h0_membership(mismatched, lambdas));

  // blocks must agree with the projected leading blocks
  std::vector<Eigen::MatrixXd> nested = {
      diag({2, 0.5}), diag({2, 0.5, 4, 4}), diag({2, 0.5, 4, 4, 8, 8})};
  CHECK(h0_membership(nested, lambdas));

  // closed under product and inverse
  std::vector<Eigen::MatrixXd> product;
  std::vector<Eigen::MatrixXd> inverse;
  for (std::size_t k = 0; k < nested.size(); ++k) {
    product.push_back(nested[k] * doubled[k]);
    inverse.push_back(nested[k].inverse());
  }
  CHECK(h0_membership(product, lambdas));
  CHECK(h0_membership(inverse, lambdas));

  // singular tuples are outside the group
  std::vector<Eigen::MatrixXd> singular = {diag({1, 0}), diag({1, 0, 1, 1}),
                                           diag({1, 0, 1, 1, 1, 1})};
  CHECK_FALSE(h0_membership(singular, lambdas));

  std::vector<Eigen::MatrixXd> wrong_shape = {Eigen::MatrixXd::Identity(3, 3),
                                              Eigen::MatrixXd::Identity(4, 4),
                                              Eigen::MatrixXd::Identity(6, 6)};
  CHECK_THROWS_AS(h0_membership(wrong_shape, lambdas), ShapeError);
  CHECK_THROWS_AS(h0_membership({}, lambdas), ShapeError);
}
