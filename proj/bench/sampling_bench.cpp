// Benchmark comparing the serial reference execution of the sampled
// verification kernels against the OpenMP-parallel path.  Both paths share
// the same residual code; the parallel path only distributes sample points,
// so the reported maxima must agree bit for bit.
#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "alg/algebroid.hpp"
#include "alg/calculus.hpp"
#include "alg/constructions.hpp"
#include "alg/tower.hpp"

using namespace alg;

namespace {

double run_ms(const std::function<CheckReport(Exec)>& kernel, Exec exec,
              CheckReport& out) {
  const auto start = std::chrono::steady_clock::now();
  out = kernel(exec);
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

struct Row {
  std::string name;
  int samples;
  std::function<CheckReport(Exec)> kernel;
};

}  // namespace

int main() {
  std::vector<Row> rows;

  {
    auto a = nijenhuis_algebroid(harmonic_oscillator_tensor(2));
    Rng rng(21);
    Section s1 = random_section(rng, a, 2);
    Section s2 = random_section(rng, a, 2);
    Section s3 = random_section(rng, a, 2);
    Expr g = random_polynomial(rng, a->base(), 2);
    SampleSpec spec{-1.0, 1.0, 600, 9};
    rows.push_back({"anchor homomorphism, deformed R^4", spec.count,
                    [a, s1, s2, spec](Exec exec) {
                      return verify_anchor_homomorphism(*a, s1, s2, spec,
                                                        1e-9, exec);
                    }});
    rows.push_back({"Leibniz rule, deformed R^4", spec.count,
                    [a, s1, s2, g, spec](Exec exec) {
                      return verify_leibniz(*a, s1, s2, g, spec, 1e-9, exec);
                    }});
    rows.push_back({"Jacobi identity, deformed R^4", spec.count,
                    [s1, s2, s3, spec](Exec exec) {
                      return verify_jacobi(s1, s2, s3, spec, 1e-9, exec);
                    }});
  }

  {
    Chart chart = Chart::numbered("x", 4);
    ExprMatrix pm(4, 4);
    for (int i = 0; i < 2; ++i) {
      pm.at(i, 2 + i) = Expr::constant(1.0);
      pm.at(2 + i, i) = Expr::constant(-1.0);
    }
    auto a = poisson_cotangent_algebroid(PoissonTensor(chart, pm));
    SampleSpec spec{-1.0, 1.0, 200, 9};
    rows.push_back({"d^2 = 0, canonical R^4", spec.count,
                    [a, spec](Exec exec) {
                      return d_squared_check(a, 5, spec, 1e-9, exec);
                    }});
  }

  std::cout << std::left << std::setw(36) << "kernel" << std::right
            << std::setw(9) << "samples" << std::setw(12) << "serial ms"
            << std::setw(12) << "openmp ms" << std::setw(9) << "speedup"
            << std::setw(8) << "match" << "\n";
  for (const Row& row : rows) {
    CheckReport serial_rep, parallel_rep;
    double serial_ms = run_ms(row.kernel, Exec::Serial, serial_rep);
    double parallel_ms = run_ms(row.kernel, Exec::Parallel, parallel_rep);
    const bool match =
        serial_rep.max_residual == parallel_rep.max_residual &&
        serial_rep.pass == parallel_rep.pass;
    std::cout << std::left << std::setw(36) << row.name << std::right
              << std::setw(9) << row.samples << std::setw(12) << std::fixed
              << std::setprecision(1) << serial_ms << std::setw(12)
              << parallel_ms << std::setw(9) << std::setprecision(2)
              << (parallel_ms > 0.0 ? serial_ms / parallel_ms : 0.0)
              << std::setw(8) << (match ? "yes" : "NO") << "\n";
    if (!match) return 1;
  }
  return 0;
}
