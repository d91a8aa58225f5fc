#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace alg {

using Point = Eigen::VectorXd;

// Deterministic uniform generator.  The 64-bit engine output is mapped to
// [0,1) explicitly so results do not depend on the standard library's
// distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  double uniform01();
  double uniform(double lo, double hi);
  // Dyadic rational in [lo, hi] with the given denominator 2^bits; exact in
  // binary floating point.
  double dyadic(double lo, double hi, int bits = 6);
  std::uint64_t next_u64();

 private:
  std::uint64_t state_;
};

// Axis-aligned sampling box [lo, hi]^dim with a fixed seed.
struct SampleSpec {
  double lo = -1.0;
  double hi = 1.0;
  int count = 100;
  std::uint64_t seed = 0;
};

std::vector<Point> sample_points(const SampleSpec& spec, int dim);

// Which loop runs the per-sample kernel.  Both produce bit-identical
// reports; Serial is the reference implementation, Parallel the OpenMP one.
enum class Exec { Serial, Parallel };

struct WorstSample {
  int index = 0;
  Point point;
  double residual = 0.0;
};

// Outcome of one verification battery: every sampled residual, the largest
// one, and the worst offenders for reporting.
struct CheckReport {
  std::string name;
  double tol = 0.0;
  double max_residual = 0.0;
  bool pass = false;
  int samples = 0;
  std::vector<double> residuals;       // one per sample point
  std::vector<WorstSample> worst;      // up to 5, largest residual first
  std::optional<std::string> error;    // first per-sample evaluation error
};

// Evaluates `residual` at every point and reduces deterministically: each
// sample writes its own slot, the reduction is serial, so thread count does
// not affect the report.  Per-sample evaluation errors are caught and mark
// the report failed.
CheckReport run_check(std::string name, const std::vector<Point>& points,
                      const std::function<double(const Point&)>& residual,
                      double tol, Exec exec = Exec::Parallel);

// Convenience: sample a box of the given dimension, then run.
CheckReport run_check(std::string name, const SampleSpec& spec, int dim,
                      const std::function<double(const Point&)>& residual,
                      double tol, Exec exec = Exec::Parallel);

// Merge several reports into one verdict (used for multi-condition checks).
CheckReport merge_reports(std::string name, const std::vector<CheckReport>& parts);

}  // namespace alg
