#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alg/calculus.hpp"

namespace alg {

// Finite descending family of charts connected by smooth step maps
// (level i+1 -> level i); arbitrary bonding maps are composed from the
// steps, so the composition law holds by construction and the numeric
// verifier guards the derivation rather than an axiom.
struct ProjectiveSystem {
  std::vector<Chart> levels;   // coarsest first
  std::vector<SmoothMap> steps;  // steps[i]: levels[i+1] -> levels[i]

  ProjectiveSystem() = default;
  ProjectiveSystem(std::vector<Chart> levels, std::vector<SmoothMap> steps);

  int level_count() const { return int(levels.size()); }
  // delta_low^high: levels[high] -> levels[low]; identity when low == high.
  SmoothMap bonding(int low, int high) const;
};

// One point per level, finest-level data descending consistently.
struct Thread {
  std::vector<Point> points;
};

// true iff every bonding map sends the finer point onto the coarser one
// within tol (max norm).
bool validate_thread(const ProjectiveSystem& system, const Thread& thread,
                     double tol);

// The thread obtained by pushing a finest-level point down through the
// steps.
Thread thread_from_top(const ProjectiveSystem& system, const Point& top);

// Per-level algebroids over a projective system of bases, connected by
// fiberwise-linear step morphisms (level i+1 bundle -> level i bundle) over
// the base steps.
struct AlgebroidTower {
  ProjectiveSystem base;
  std::vector<AlgebroidPtr> levels;
  std::vector<ExprMatrix> step_fibers;  // step_fibers[i]: fiber map of
                                        // levels[i+1] -> levels[i], entries
                                        // over the level-(i+1) coordinates

  AlgebroidTower() = default;
  AlgebroidTower(ProjectiveSystem base, std::vector<AlgebroidPtr> levels,
                 std::vector<ExprMatrix> step_fibers);

  int level_count() const { return int(levels.size()); }
  // Composed bundle morphism levels[high] -> levels[low].
  BundleMorphism morphism(int low, int high) const;
};

// One verification battery of a tower, one entry per (condition, level
// pair).
struct TowerReport {
  struct Entry {
    int low = 0;
    int high = 0;
    std::string condition;
    CheckReport report;
  };
  std::vector<Entry> entries;
  bool pass = false;
  double max_residual = 0.0;
};

// Checks, for every level pair low < high:
//   (a) composed bonding maps agree with their factorizations,
//   (b) anchors intertwine: rho_low . f = T(delta) . rho_high,
//   (c) brackets intertwine on randomly generated coherent section pairs:
//       f . [s1, s2]_high = [s1, s2]_low . delta.
TowerReport verify_system(const AlgebroidTower& tower, const SampleSpec& spec,
                          double tol, int pairs_per_check = 2,
                          Exec exec = Exec::Parallel);

// Family of sections, one per level, with f . s_high = s_low . delta.
struct LimitSection {
  std::vector<Section> levels;

  // Per-level fiber vectors at the thread's points.
  std::vector<Point> eval_at(const Thread& thread) const;
};

// limit_section either accepts the family (section set) or rejects it
// (section empty); the coherence report names the level pairs and carries
// the residuals either way.
struct LimitSectionResult {
  std::optional<LimitSection> section;
  CheckReport coherence;
};

LimitSectionResult limit_section(const AlgebroidTower& tower,
                                 std::vector<Section> sections,
                                 const SampleSpec& spec, double tol,
                                 Exec exec = Exec::Parallel);

// Levelwise bracket of two coherent families.  Coherence of the result is
// the tower compatibility condition; callers re-verify through
// limit_section.
LimitSection limit_bracket(const AlgebroidTower& tower, const LimitSection& a,
                           const LimitSection& b);

// A coherent pair of sections for level pair (low, high): the low section
// is random, the high section lifts it (killed fiber slots padded with
// fresh random components).  Requires a truncation-shaped tower: bonding
// maps are coordinate prefixes and fiber maps are leading-identity blocks.
std::pair<Section, Section> coherent_section_pair(const AlgebroidTower& tower,
                                                  int low, int high, Rng& rng,
                                                  int poly_degree = 2);

// Whether a tuple of invertible square matrices commutes with every
// composed bonding matrix: lambda_k^j . h_j == h_k . lambda_k^j exactly.
// lambdas[i] is the step matrix level i+1 -> level i.
bool h0_membership(const std::vector<Eigen::MatrixXd>& h,
                   const std::vector<Eigen::MatrixXd>& lambdas);

// Tower of deformed tangent bundles: level k is the chart
// (x1, y1, ..., x_{k+1}, y_{k+1}) with the radius-squared block tensor,
// truncation bonding maps, and their tangent maps as fiber steps.
AlgebroidTower nijenhuis_tower(int depth);

// Tower of constant corank-one distributions on Fourier coefficient charts
// (a0, a1, b1, ..., a_{k+1}, b_{k+1}): the fiber is the kernel of the mean
// coordinate a0, spanned by the non-mean coordinate fields; truncation
// bonding maps.
AlgebroidTower corank1_tower(int depth);

// All levels the tangent bundle of the same chart, identity steps.
AlgebroidTower identity_tower(const Chart& chart, int depth);

// Copy of the tower with one step's fiber matrix scaled (deliberate fault
// injection for tests and demonstrations).
AlgebroidTower scale_step_fiber(AlgebroidTower tower, int step,
                                double factor);

}  // namespace alg
