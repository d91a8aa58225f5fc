#include "alg/check.hpp"

#include <algorithm>
#include <cmath>

#include "alg/errors.hpp"

namespace alg {

// splitmix64: tiny, well-mixed, and stable across platforms.
std::uint64_t Rng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::uniform01() {
  // 53 high bits -> [0,1) with full double resolution.
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform01();
}

double Rng::dyadic(double lo, double hi, int bits) {
  double steps = double(1ULL << bits);
  double k = double(next_u64() % (1ULL << bits));
  return lo + (hi - lo) * (k / steps);
}

std::vector<Point> sample_points(const SampleSpec& spec, int dim) {
  if (dim <= 0) throw ShapeError("sample_points: dimension must be positive");
  if (spec.count <= 0) throw ShapeError("sample_points: count must be positive");
  if (!(spec.lo <= spec.hi)) {
    throw ShapeError("sample_points: box lower bound exceeds upper bound");
  }
  Rng rng(spec.seed);
  std::vector<Point> points;
  points.reserve(spec.count);
  for (int s = 0; s < spec.count; ++s) {
    Point p(dim);
    for (int i = 0; i < dim; ++i) p[i] = rng.uniform(spec.lo, spec.hi);
    points.push_back(std::move(p));
  }
  return points;
}

namespace {

void finalize(CheckReport& report, const std::vector<Point>& points) {
  report.samples = int(points.size());
  report.max_residual = 0.0;
  for (double r : report.residuals) {
    if (std::isnan(r)) continue;  // errored sample; already recorded
    report.max_residual = std::max(report.max_residual, r);
  }
  // Worst offenders: largest residual first, index as the deterministic
  // tie-break.
  std::vector<int> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = int(i);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    double ra = std::isnan(report.residuals[a]) ? -1.0 : report.residuals[a];
    double rb = std::isnan(report.residuals[b]) ? -1.0 : report.residuals[b];
    if (ra != rb) return ra > rb;
    return a < b;
  });
  std::size_t keep = std::min<std::size_t>(5, order.size());
  for (std::size_t i = 0; i < keep; ++i) {
    int idx = order[i];
    if (std::isnan(report.residuals[idx])) continue;
    report.worst.push_back({idx, points[idx], report.residuals[idx]});
  }
  report.pass = !report.error.has_value() && report.max_residual <= report.tol;
}

}  // namespace

CheckReport run_check(std::string name, const std::vector<Point>& points,
                      const std::function<double(const Point&)>& residual,
                      double tol, Exec exec) {
  CheckReport report;
  report.name = std::move(name);
  report.tol = tol;
  report.residuals.assign(points.size(), 0.0);

  std::vector<std::string> errors(points.size());
  const int n = int(points.size());

  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      try {
        report.residuals[i] = residual(points[i]);
      } catch (const std::exception& ex) {
        report.residuals[i] = std::nan("");
        errors[i] = ex.what();
      }
    }
  } else {
    for (int i = 0; i < n; ++i) {
      try {
        report.residuals[i] = residual(points[i]);
      } catch (const std::exception& ex) {
        report.residuals[i] = std::nan("");
        errors[i] = ex.what();
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) {
      report.error = "sample " + std::to_string(i) + ": " + errors[i];
      break;
    }
  }
  finalize(report, points);
  return report;
}

CheckReport run_check(std::string name, const SampleSpec& spec, int dim,
                      const std::function<double(const Point&)>& residual,
                      double tol, Exec exec) {
  return run_check(std::move(name), sample_points(spec, dim), residual, tol,
                   exec);
}

CheckReport merge_reports(std::string name,
                          const std::vector<CheckReport>& parts) {
  CheckReport merged;
  merged.name = std::move(name);
  merged.pass = true;
  for (const CheckReport& part : parts) {
    merged.samples += part.samples;
    merged.tol = std::max(merged.tol, part.tol);
    if (part.max_residual > merged.max_residual) {
      merged.max_residual = part.max_residual;
      merged.worst = part.worst;
    }
    if (!part.pass) merged.pass = false;
    if (part.error && !merged.error) {
      merged.error = part.name + ": " + *part.error;
    }
  }
  return merged;
}

}  // namespace alg
