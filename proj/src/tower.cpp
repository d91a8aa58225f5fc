#include "alg/tower.hpp"

#include <algorithm>
#include <limits>
#include <utility>

#include "alg/constructions.hpp"
#include "alg/errors.hpp"

namespace alg {

namespace {

std::string pair_tag(const std::string& stem, int low, int high) {
  return stem + "_" + std::to_string(low) + "_" + std::to_string(high);
}

// Max |entry| of a symbolic matrix over the sampled box of a chart.
CheckReport matrix_residual_check(std::string name, const Chart& chart,
                                  const ExprMatrix& lhs, const ExprMatrix& rhs,
                                  const SampleSpec& spec, double tol,
                                  Exec exec) {
  std::vector<Expr> deltas;
  deltas.reserve(std::size_t(lhs.rows()) * lhs.cols());
  for (int r = 0; r < lhs.rows(); ++r) {
    for (int c = 0; c < lhs.cols(); ++c) {
      deltas.push_back(lhs.at(r, c) - rhs.at(r, c));
    }
  }
  auto residual = [chart, deltas](const Point& p) {
    EvalEnv env = chart.bind(p);
    double worst = 0.0;
    for (const Expr& d : deltas) {
      worst = std::max(worst, std::abs(eval(d, env)));
    }
    return worst;
  };
  return run_check(std::move(name), spec, chart.dim(), residual, tol, exec);
}

CheckReport components_residual_check(std::string name, const Chart& chart,
                                      const std::vector<Expr>& lhs,
                                      const std::vector<Expr>& rhs,
                                      const SampleSpec& spec, double tol,
                                      Exec exec) {
  std::vector<Expr> deltas;
  deltas.reserve(lhs.size());
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    deltas.push_back(lhs[i] - rhs[i]);
  }
  auto residual = [chart, deltas](const Point& p) {
    EvalEnv env = chart.bind(p);
    double worst = 0.0;
    for (const Expr& d : deltas) {
      worst = std::max(worst, std::abs(eval(d, env)));
    }
    return worst;
  };
  return run_check(std::move(name), spec, chart.dim(), residual, tol, exec);
}

// Constant truncation fiber matrix [I | 0] of the given shape.
ExprMatrix truncation_fiber(int rows, int cols) {
  ExprMatrix f(rows, cols);
  for (int r = 0; r < rows; ++r) f.at(r, r) = Expr::constant(1.0);
  return f;
}

SmoothMap truncation_map(const Chart& fine, const Chart& coarse) {
  std::vector<Expr> comps;
  comps.reserve(coarse.coords.size());
  for (int k = 0; k < coarse.dim(); ++k) {
    comps.push_back(Expr::variable(fine.coords[k]));
  }
  return SmoothMap(fine, coarse, std::move(comps));
}

}  // namespace

ProjectiveSystem::ProjectiveSystem(std::vector<Chart> levels_,
                                   std::vector<SmoothMap> steps_)
    : levels(std::move(levels_)), steps(std::move(steps_)) {
  if (levels.empty()) {
    throw ShapeError("ProjectiveSystem: need at least one level");
  }
  if (steps.size() + 1 != levels.size()) {
    throw ShapeError("ProjectiveSystem: " + std::to_string(levels.size()) +
                     " levels need " + std::to_string(levels.size() - 1) +
                     " step maps, got " + std::to_string(steps.size()));
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (!(steps[i].source == levels[i + 1]) ||
        !(steps[i].target == levels[i])) {
      throw ShapeError("ProjectiveSystem: step " + std::to_string(i) +
                       " does not map level " + std::to_string(i + 1) +
                       " onto level " + std::to_string(i));
    }
  }
}

SmoothMap ProjectiveSystem::bonding(int low, int high) const {
  if (low < 0 || high >= level_count() || low > high) {
    throw ShapeError("ProjectiveSystem: bad level pair " +
                     std::to_string(low) + " -> " + std::to_string(high));
  }
  if (low == high) return SmoothMap::identity(levels[low]);
  SmoothMap acc = steps[high - 1];
  for (int k = high - 2; k >= low; --k) {
    acc = compose(steps[k], acc);
  }
  return acc;
}

bool validate_thread(const ProjectiveSystem& system, const Thread& thread,
                     double tol) {
  if (int(thread.points.size()) != system.level_count()) {
    throw ShapeError("validate_thread: thread has " +
                     std::to_string(thread.points.size()) + " points for " +
                     std::to_string(system.level_count()) + " levels");
  }
  for (int low = 0; low < system.level_count(); ++low) {
    for (int high = low + 1; high < system.level_count(); ++high) {
      Point pushed = system.bonding(low, high).eval_at(thread.points[high]);
      if ((pushed - thread.points[low]).lpNorm<Eigen::Infinity>() > tol) {
        return false;
      }
    }
  }
  return true;
}

Thread thread_from_top(const ProjectiveSystem& system, const Point& top) {
  Thread thread;
  thread.points.resize(system.level_count());
  int finest = system.level_count() - 1;
  thread.points[finest] = top;
  for (int k = finest - 1; k >= 0; --k) {
    thread.points[k] = system.steps[k].eval_at(thread.points[k + 1]);
  }
  return thread;
}

AlgebroidTower::AlgebroidTower(ProjectiveSystem base_,
                               std::vector<AlgebroidPtr> levels_,
                               std::vector<ExprMatrix> step_fibers_)
    : base(std::move(base_)),
      levels(std::move(levels_)),
      step_fibers(std::move(step_fibers_)) {
  if (int(levels.size()) != base.level_count()) {
    throw ShapeError("AlgebroidTower: " + std::to_string(levels.size()) +
                     " algebroids over " + std::to_string(base.level_count()) +
                     " base levels");
  }
  if (step_fibers.size() != base.steps.size()) {
    throw ShapeError("AlgebroidTower: fiber step count does not match the "
                     "base step count");
  }
  for (int k = 0; k < int(levels.size()); ++k) {
    if (!levels[k]) throw ShapeError("AlgebroidTower: null level");
    if (!(levels[k]->base() == base.levels[k])) {
      throw ShapeError("AlgebroidTower: algebroid " + std::to_string(k) +
                       " lives on a different chart than base level " +
                       std::to_string(k));
    }
  }
  // constructing the step morphisms validates shapes and coordinate usage
  for (std::size_t i = 0; i < step_fibers.size(); ++i) {
    BundleMorphism(levels[i + 1], levels[i], base.steps[i], step_fibers[i]);
  }
}

BundleMorphism AlgebroidTower::morphism(int low, int high) const {
  if (low < 0 || high >= level_count() || low > high) {
    throw ShapeError("AlgebroidTower: bad level pair " + std::to_string(low) +
                     " -> " + std::to_string(high));
  }
  if (low == high) {
    return BundleMorphism(levels[low], levels[low],
                          SmoothMap::identity(base.levels[low]),
                          ExprMatrix::identity(levels[low]->fiber_dim()));
  }
  ExprMatrix fiber = step_fibers[high - 1];
  for (int k = high - 2; k >= low; --k) {
    ExprMatrix moved =
        substitute(step_fibers[k], base.bonding(k + 1, high).bindings());
    fiber = mul(moved, fiber);
  }
  return BundleMorphism(levels[high], levels[low], base.bonding(low, high),
                        std::move(fiber));
}

std::pair<Section, Section> coherent_section_pair(const AlgebroidTower& tower,
                                                  int low, int high, Rng& rng,
                                                  int poly_degree) {
  BundleMorphism psi = tower.morphism(low, high);
  const Chart& fine = tower.base.levels[high];
  const int m_low = tower.levels[low]->fiber_dim();
  const int m_high = tower.levels[high]->fiber_dim();
  for (int k = 0; k < int(psi.base_map.components.size()); ++k) {
    if (!structurally_equal(psi.base_map.components[k],
                            Expr::variable(fine.coords[k]))) {
      throw ShapeError("coherent_section_pair: bonding maps must be "
                       "coordinate truncations");
    }
  }
  // a constant fiber map with an invertible leading block can be solved for
  // the lifted components; killed slots stay free
  Eigen::MatrixXd fiber(m_low, m_high);
  for (int r = 0; r < m_low; ++r) {
    for (int c = 0; c < m_high; ++c) {
      const Expr& entry = psi.fiber_map.at(r, c);
      if (entry.kind() != ExprKind::Constant) {
        throw ShapeError("coherent_section_pair: fiber maps must be "
                         "constant matrices");
      }
      fiber(r, c) = entry.value();
    }
  }
  Eigen::MatrixXd leading = fiber.leftCols(m_low);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(leading);
  if (!lu.isInvertible()) {
    throw ShapeError("coherent_section_pair: the leading fiber block is "
                     "singular; cannot lift sections");
  }
  Eigen::MatrixXd inverse = lu.inverse();

  std::vector<Expr> low_comps;
  low_comps.reserve(m_low);
  for (int k = 0; k < m_low; ++k) {
    low_comps.push_back(
        random_polynomial(rng, tower.base.levels[low], poly_degree));
  }
  std::vector<Expr> extras;
  extras.reserve(m_high - m_low);
  for (int k = m_low; k < m_high; ++k) {
    extras.push_back(random_polynomial(rng, fine, poly_degree));
  }
  // solve fiber * s_high = s_low . delta for the leading slots:
  //   s_high[0..m_low) = leading^-1 (s_low . delta - rest * extras)
  auto binds = psi.base_map.bindings();
  std::vector<Expr> targets;
  targets.reserve(m_low);
  for (int k = 0; k < m_low; ++k) {
    Expr moved = substitute(low_comps[k], binds);
    for (int c = m_low; c < m_high; ++c) {
      if (fiber(k, c) != 0.0) {
        moved = moved - Expr::constant(fiber(k, c)) * extras[c - m_low];
      }
    }
    targets.push_back(std::move(moved));
  }
  std::vector<Expr> high_comps = matvec(ExprMatrix::from_numeric(inverse),
                                        targets);
  for (Expr& e : extras) high_comps.push_back(std::move(e));
  return {Section(tower.levels[low], std::move(low_comps)),
          Section(tower.levels[high], std::move(high_comps))};
}

TowerReport verify_system(const AlgebroidTower& tower, const SampleSpec& spec,
                          double tol, int pairs_per_check, Exec exec) {
  TowerReport out;
  out.pass = true;
  const int count = tower.level_count();
  for (int low = 0; low < count; ++low) {
    for (int high = low + 1; high < count; ++high) {
      const Chart& fine = tower.base.levels[high];
      SmoothMap delta = tower.base.bonding(low, high);
      BundleMorphism psi = tower.morphism(low, high);

      // (a) every factorization of the bonding map agrees with it
      {
        std::vector<CheckReport> parts;
        for (int mid = low; mid < high; ++mid) {
          SmoothMap two_step = compose(tower.base.bonding(low, mid),
                                       tower.base.bonding(mid, high));
          parts.push_back(components_residual_check(
              pair_tag("factor", low, high) + "_via_" + std::to_string(mid),
              fine, two_step.components, delta.components, spec, tol, exec));
        }
        out.entries.push_back({low, high, "bonding_composition",
                               merge_reports(pair_tag("bonding", low, high),
                                             parts)});
      }

      // (b) anchors intertwine through the morphism
      {
        ExprMatrix rho_low_moved =
            substitute(tower.levels[low]->anchor(), delta.bindings());
        ExprMatrix lhs = mul(rho_low_moved, psi.fiber_map);
        ExprMatrix rhs =
            mul(jacobian_matrix(delta), tower.levels[high]->anchor());
        out.entries.push_back(
            {low, high, "anchor_compatibility",
             matrix_residual_check(pair_tag("anchor", low, high), fine, lhs,
                                   rhs, spec, tol, exec)});
      }

      // (c) brackets intertwine on coherent random pairs
      {
        Rng rng(spec.seed ^ (0x9e3779b97f4a7c15ULL +
                             std::uint64_t(low) * 0x85ebca6bULL +
                             std::uint64_t(high) * 0xc2b2ae35ULL));
        CheckReport bracket_report;
        try {
          std::vector<CheckReport> parts;
          for (int trial = 0; trial < pairs_per_check; ++trial) {
            auto [s1_low, s1_high] =
                coherent_section_pair(tower, low, high, rng);
            auto [s2_low, s2_high] =
                coherent_section_pair(tower, low, high, rng);
            std::vector<Expr> high_bracket =
                tower.levels[high]->bracket_components(s1_high.components,
                                                       s2_high.components);
            std::vector<Expr> lhs = matvec(psi.fiber_map, high_bracket);
            std::vector<Expr> low_bracket =
                tower.levels[low]->bracket_components(s1_low.components,
                                                      s2_low.components);
            std::vector<Expr> rhs;
            rhs.reserve(low_bracket.size());
            auto binds = delta.bindings();
            for (const Expr& c : low_bracket) {
              rhs.push_back(substitute(c, binds));
            }
            parts.push_back(components_residual_check(
                pair_tag("bracket", low, high) + "_t" + std::to_string(trial),
                fine, lhs, rhs, spec, tol, exec));
          }
          bracket_report = merge_reports(pair_tag("bracket", low, high), parts);
        } catch (const Error& err) {
          // section pairs could not be generated; that is a verdict about the
          // tower, not a usage error, so it lands in the report
          bracket_report.name = pair_tag("bracket", low, high);
          bracket_report.tol = tol;
          bracket_report.max_residual =
              std::numeric_limits<double>::infinity();
          bracket_report.pass = false;
          bracket_report.samples = 0;
          bracket_report.error = err.what();
        }
        out.entries.push_back(
            {low, high, "bracket_compatibility", std::move(bracket_report)});
      }
    }
  }
  for (const TowerReport::Entry& e : out.entries) {
    out.pass = out.pass && e.report.pass;
    out.max_residual = std::max(out.max_residual, e.report.max_residual);
  }
  return out;
}

std::vector<Point> LimitSection::eval_at(const Thread& thread) const {
  if (thread.points.size() != levels.size()) {
    throw ShapeError("LimitSection: thread depth does not match");
  }
  std::vector<Point> out;
  out.reserve(levels.size());
  for (std::size_t k = 0; k < levels.size(); ++k) {
    out.push_back(levels[k].eval_at(thread.points[k]));
  }
  return out;
}

LimitSectionResult limit_section(const AlgebroidTower& tower,
                                 std::vector<Section> sections,
                                 const SampleSpec& spec, double tol,
                                 Exec exec) {
  const int count = tower.level_count();
  if (int(sections.size()) != count) {
    throw ShapeError("limit_section: " + std::to_string(sections.size()) +
                     " sections for " + std::to_string(count) + " levels");
  }
  for (int k = 0; k < count; ++k) {
    if (sections[k].parent != tower.levels[k]) {
      throw ShapeError("limit_section: section " + std::to_string(k) +
                       " does not belong to tower level " + std::to_string(k));
    }
  }
  std::vector<CheckReport> parts;
  for (int low = 0; low < count; ++low) {
    for (int high = low + 1; high < count; ++high) {
      BundleMorphism psi = tower.morphism(low, high);
      const Chart& fine = tower.base.levels[high];
      std::vector<Expr> lhs =
          matvec(psi.fiber_map, sections[high].components);
      std::vector<Expr> rhs;
      auto binds = psi.base_map.bindings();
      rhs.reserve(sections[low].components.size());
      for (const Expr& c : sections[low].components) {
        rhs.push_back(substitute(c, binds));
      }
      parts.push_back(components_residual_check(
          pair_tag("coherence", low, high), fine, lhs, rhs, spec, tol, exec));
    }
  }
  LimitSectionResult result;
  // a single level has nothing to disagree with itself
  if (parts.empty()) {
    CheckReport trivial;
    trivial.name = "coherence";
    trivial.tol = tol;
    trivial.pass = true;
    result.coherence = std::move(trivial);
    result.section = LimitSection{std::move(sections)};
    return result;
  }
  result.coherence = merge_reports("coherence", parts);
  if (result.coherence.pass) {
    result.section = LimitSection{std::move(sections)};
  }
  return result;
}

LimitSection limit_bracket(const AlgebroidTower& tower, const LimitSection& a,
                           const LimitSection& b) {
  if (int(a.levels.size()) != tower.level_count() ||
      int(b.levels.size()) != tower.level_count()) {
    throw ShapeError("limit_bracket: family depth does not match the tower");
  }
  std::vector<Section> out;
  out.reserve(a.levels.size());
  for (std::size_t k = 0; k < a.levels.size(); ++k) {
    out.push_back(bracket(a.levels[k], b.levels[k]));
  }
  return LimitSection{std::move(out)};
}

bool h0_membership(const std::vector<Eigen::MatrixXd>& h,
                   const std::vector<Eigen::MatrixXd>& lambdas) {
  if (h.size() != lambdas.size() + 1) {
    throw ShapeError("h0_membership: " + std::to_string(h.size()) +
                     " matrices need " + std::to_string(h.size() - 1) +
                     " bonding maps, got " + std::to_string(lambdas.size()));
  }
  const int count = int(h.size());
  for (int k = 0; k < count; ++k) {
    long expected =
        count == 1 ? h[0].rows()
                   : (k < count - 1 ? lambdas[k].rows() : lambdas[k - 1].cols());
    if (h[k].rows() != h[k].cols() || h[k].rows() != expected) {
      throw ShapeError("h0_membership: matrix " + std::to_string(k) +
                       " has the wrong shape");
    }
  }
  for (int k = 0; k + 1 < int(lambdas.size()); ++k) {
    if (lambdas[k].cols() != lambdas[k + 1].rows()) {
      throw ShapeError("h0_membership: bonding maps do not chain");
    }
  }
  for (const Eigen::MatrixXd& m : h) {
    if (!Eigen::FullPivLU<Eigen::MatrixXd>(m).isInvertible()) return false;
  }
  for (int low = 0; low < count; ++low) {
    for (int high = low + 1; high < count; ++high) {
      Eigen::MatrixXd composed = lambdas[low];
      for (int k = low + 1; k < high; ++k) composed = composed * lambdas[k];
      Eigen::MatrixXd lhs = composed * h[high];
      Eigen::MatrixXd rhs = h[low] * composed;
      if (!(lhs.array() == rhs.array()).all()) return false;
    }
  }
  return true;
}

AlgebroidTower nijenhuis_tower(int depth) {
  if (depth < 1) throw ShapeError("nijenhuis_tower: depth must be >= 1");
  std::vector<Chart> charts;
  std::vector<AlgebroidPtr> levels;
  for (int k = 0; k < depth; ++k) {
    NijenhuisTensor tensor = harmonic_oscillator_tensor(k + 1);
    charts.push_back(tensor.chart);
    levels.push_back(nijenhuis_algebroid(tensor));
  }
  std::vector<SmoothMap> steps;
  std::vector<ExprMatrix> fibers;
  for (int k = 0; k + 1 < depth; ++k) {
    steps.push_back(truncation_map(charts[k + 1], charts[k]));
    fibers.push_back(truncation_fiber(2 * (k + 1), 2 * (k + 2)));
  }
  return AlgebroidTower(ProjectiveSystem(std::move(charts), std::move(steps)),
                        std::move(levels), std::move(fibers));
}

AlgebroidTower corank1_tower(int depth) {
  if (depth < 1) throw ShapeError("corank1_tower: depth must be >= 1");
  std::vector<Chart> charts;
  std::vector<AlgebroidPtr> levels;
  // the gate is exact for a constant coordinate frame, so a small sample
  // battery suffices
  SampleSpec gate{-1.0, 1.0, 8, 2};
  for (int k = 0; k < depth; ++k) {
    int harmonics = k + 1;
    std::vector<std::string> names;
    names.push_back("a0");
    for (int s = 1; s <= harmonics; ++s) {
      names.push_back("a" + std::to_string(s));
      names.push_back("b" + std::to_string(s));
    }
    Chart chart(std::move(names));
    std::vector<VectorField> frame;
    for (int c = 1; c < chart.dim(); ++c) {
      std::vector<Expr> comps(chart.dim(), Expr::constant(0.0));
      comps[c] = Expr::constant(1.0);
      frame.emplace_back(chart, std::move(comps));
    }
    levels.push_back(distribution_algebroid(
        "mean_kernel_" + std::to_string(harmonics), chart, frame,
        StructureFunctions(chart.dim() - 1), gate, 1e-12));
    charts.push_back(levels.back()->base());
  }
  std::vector<SmoothMap> steps;
  std::vector<ExprMatrix> fibers;
  for (int k = 0; k + 1 < depth; ++k) {
    steps.push_back(truncation_map(charts[k + 1], charts[k]));
    fibers.push_back(truncation_fiber(2 * (k + 1), 2 * (k + 2)));
  }
  return AlgebroidTower(ProjectiveSystem(std::move(charts), std::move(steps)),
                        std::move(levels), std::move(fibers));
}

AlgebroidTower identity_tower(const Chart& chart, int depth) {
  if (depth < 1) throw ShapeError("identity_tower: depth must be >= 1");
  std::vector<Chart> charts(depth, chart);
  std::vector<AlgebroidPtr> levels;
  for (int k = 0; k < depth; ++k) levels.push_back(tangent_algebroid(chart));
  std::vector<SmoothMap> steps(depth - 1, SmoothMap::identity(chart));
  std::vector<ExprMatrix> fibers(depth - 1, ExprMatrix::identity(chart.dim()));
  return AlgebroidTower(ProjectiveSystem(std::move(charts), std::move(steps)),
                        std::move(levels), std::move(fibers));
}

AlgebroidTower scale_step_fiber(AlgebroidTower tower, int step,
                                double factor) {
  if (step < 0 || step >= int(tower.step_fibers.size())) {
    throw ShapeError("scale_step_fiber: no step " + std::to_string(step));
  }
  ExprMatrix& fiber = tower.step_fibers[step];
  for (int r = 0; r < fiber.rows(); ++r) {
    for (int c = 0; c < fiber.cols(); ++c) {
      fiber.at(r, c) = Expr::constant(factor) * fiber.at(r, c);
    }
  }
  return AlgebroidTower(std::move(tower.base), std::move(tower.levels),
                        std::move(tower.step_fibers));
}

}  // namespace alg
