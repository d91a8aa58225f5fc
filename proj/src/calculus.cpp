#include "alg/calculus.hpp"

#include <algorithm>

#include "alg/errors.hpp"

namespace alg {

namespace {

constexpr int kDegreeCap = 3;

long long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long long r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

std::vector<Expr> frame_components(int m, int index) {
  std::vector<Expr> comps(m, Expr::constant(0.0));
  comps[index] = Expr::constant(1.0);
  return comps;
}

// Signed permutation expansion of the q x q determinant with entries
// entry(a, b); q <= 3 keeps this tiny.
Expr alternating_det(int q, const std::function<Expr(int, int)>& entry) {
  std::vector<int> perm(q);
  for (int i = 0; i < q; ++i) perm[i] = i;
  Expr acc = Expr::constant(0.0);
  do {
    int sign = 1;
    for (int i = 0; i < q; ++i) {
      for (int j = i + 1; j < q; ++j) {
        if (perm[i] > perm[j]) sign = -sign;
      }
    }
    Expr term = Expr::constant(double(sign));
    for (int a = 0; a < q; ++a) term = term * entry(a, perm[a]);
    acc = acc + term;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return acc;
}

}  // namespace

std::vector<std::vector<int>> increasing_multi_indices(int m, int q) {
  std::vector<std::vector<int>> out;
  if (q == 0) {
    out.push_back({});
    return out;
  }
  if (q > m) return out;
  std::vector<int> idx(q);
  for (int i = 0; i < q; ++i) idx[i] = i;
  for (;;) {
    out.push_back(idx);
    int pos = q - 1;
    while (pos >= 0 && idx[pos] == m - q + pos) --pos;
    if (pos < 0) break;
    ++idx[pos];
    for (int i = pos + 1; i < q; ++i) idx[i] = idx[i - 1] + 1;
  }
  return out;
}

int multi_index_position(const std::vector<int>& index, int m) {
  // Combinatorial rank in the lexicographic enumeration.
  int q = int(index.size());
  long long rank = 0;
  int prev = -1;
  for (int a = 0; a < q; ++a) {
    for (int v = prev + 1; v < index[a]; ++v) {
      rank += binomial(m - 1 - v, q - 1 - a);
    }
    prev = index[a];
  }
  return int(rank);
}

AlgebroidForm::AlgebroidForm(AlgebroidPtr parent_, int degree_,
                             std::vector<Expr> components_)
    : parent(std::move(parent_)),
      degree(degree_),
      components(std::move(components_)) {
  if (!parent) throw ShapeError("AlgebroidForm: null algebroid");
  if (degree < 0 || degree > kDegreeCap) {
    throw ShapeError("AlgebroidForm: degree " + std::to_string(degree) +
                     " outside the supported range 0.." +
                     std::to_string(kDegreeCap));
  }
  std::size_t expected =
      degree == 0 ? 1 : std::size_t(binomial(parent->fiber_dim(), degree));
  if (components.size() != expected) {
    throw ShapeError("AlgebroidForm: expected " + std::to_string(expected) +
                     " components, got " + std::to_string(components.size()));
  }
  for (const Expr& c : components) {
    for (const std::string& v : free_variables(c)) {
      if (parent->base().index_of(v) < 0) {
        throw ShapeError("AlgebroidForm: component uses '" + v +
                         "', which is not a base coordinate");
      }
    }
  }
}

AlgebroidForm zero_form(AlgebroidPtr parent, int degree) {
  std::size_t count =
      degree == 0 ? 1 : std::size_t(binomial(parent->fiber_dim(), degree));
  return AlgebroidForm(std::move(parent), degree,
                       std::vector<Expr>(count, Expr::constant(0.0)));
}

Expr contract_components(const std::vector<Expr>& components, int fiber_dim,
                         int degree,
                         std::span<const std::vector<Expr>> args) {
  if (int(args.size()) != degree) {
    throw ShapeError("contract_components: arity mismatch");
  }
  if (degree == 0) return components[0];
  auto indices = increasing_multi_indices(fiber_dim, degree);
  Expr acc = Expr::constant(0.0);
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const std::vector<int>& I = indices[pos];
    Expr det = alternating_det(degree, [&](int a, int b) {
      return args[a][I[b]];
    });
    acc = acc + components[pos] * det;
  }
  return acc;
}

Expr eval_form(const AlgebroidForm& omega, std::span<const Section> args) {
  std::vector<std::vector<Expr>> comps;
  comps.reserve(args.size());
  for (const Section& s : args) {
    if (s.parent != omega.parent) {
      throw ShapeError("eval_form: section of a different algebroid");
    }
    comps.push_back(s.components);
  }
  return contract_components(omega.components, omega.parent->fiber_dim(),
                             omega.degree, comps);
}

AlgebroidForm lie_derivative(const Section& s, const AlgebroidForm& omega) {
  if (s.parent != omega.parent) {
    throw ShapeError("lie_derivative: section of a different algebroid");
  }
  const Algebroid& a = *omega.parent;
  const int m = a.fiber_dim();
  if (omega.degree == 0) {
    return AlgebroidForm(omega.parent, 0,
                         {anchor_derivative(a, s.components,
                                            omega.components[0])});
  }
  auto indices = increasing_multi_indices(m, omega.degree);
  std::vector<Expr> out;
  out.reserve(indices.size());
  for (std::size_t pos = 0; pos < indices.size(); ++pos) {
    const std::vector<int>& I = indices[pos];
    // L_s(w(e_I)) ...
    Expr acc = anchor_derivative(a, s.components, omega.components[pos]);
    // ... minus w with the bracket inserted in each slot.
    for (int slot = 0; slot < omega.degree; ++slot) {
      std::vector<std::vector<Expr>> args;
      args.reserve(omega.degree);
      for (int b = 0; b < omega.degree; ++b) {
        if (b == slot) {
          args.push_back(a.bracket_components(s.components,
                                              frame_components(m, I[b])));
        } else {
          args.push_back(frame_components(m, I[b]));
        }
      }
      acc = acc - contract_components(omega.components, m, omega.degree, args);
    }
    out.push_back(acc);
  }
  return AlgebroidForm(omega.parent, omega.degree, std::move(out));
}

AlgebroidForm exterior_derivative(const AlgebroidForm& omega) {
  const Algebroid& a = *omega.parent;
  const int m = a.fiber_dim();
  const int n = a.base().dim();
  if (omega.degree >= kDegreeCap) {
    throw ShapeError("exterior_derivative: result degree exceeds cap " +
                     std::to_string(kDegreeCap));
  }
  if (omega.degree == 0) {
    const Expr& f = omega.components[0];
    std::vector<Expr> out;
    out.reserve(m);
    for (int k = 0; k < m; ++k) {
      Expr acc = Expr::constant(0.0);
      for (int i = 0; i < n; ++i) {
        acc = acc + a.anchor().at(i, k) * diff(f, a.base().coords[i]);
      }
      out.push_back(acc);
    }
    return AlgebroidForm(omega.parent, 1, std::move(out));
  }

  const int q = omega.degree;
  auto result_indices = increasing_multi_indices(m, q + 1);
  std::vector<Expr> out;
  out.reserve(result_indices.size());
  for (const std::vector<int>& I : result_indices) {
    Expr acc = Expr::constant(0.0);
    // sum_a (-1)^a L_{e_{I_a}} ( w(e_I minus slot a) )
    for (int slot = 0; slot <= q; ++slot) {
      std::vector<int> rest;
      rest.reserve(q);
      for (int b = 0; b <= q; ++b) {
        if (b != slot) rest.push_back(I[b]);
      }
      Expr wrest = omega.components[multi_index_position(rest, m)];
      Expr lterm =
          anchor_derivative(a, frame_components(m, I[slot]), wrest);
      acc = (slot % 2 == 0) ? acc + lterm : acc - lterm;
    }
    // sum_{a<b} (-1)^{a+b} w([e_{I_a}, e_{I_b}], e_I minus slots a, b)
    for (int sa = 0; sa <= q; ++sa) {
      for (int sb = sa + 1; sb <= q; ++sb) {
        std::vector<std::vector<Expr>> args;
        args.reserve(q);
        args.push_back(a.bracket_components(frame_components(m, I[sa]),
                                            frame_components(m, I[sb])));
        for (int b = 0; b <= q; ++b) {
          if (b != sa && b != sb) args.push_back(frame_components(m, I[b]));
        }
        Expr wterm = contract_components(omega.components, m, q, args);
        acc = ((sa + sb) % 2 == 0) ? acc + wterm : acc - wterm;
      }
    }
    out.push_back(acc);
  }
  return AlgebroidForm(omega.parent, q + 1, std::move(out));
}

AlgebroidForm interior_product(const Section& s, const AlgebroidForm& omega) {
  if (s.parent != omega.parent) {
    throw ShapeError("interior_product: section of a different algebroid");
  }
  if (omega.degree == 0) {
    throw ShapeError("interior_product: undefined on functions");
  }
  const int m = omega.parent->fiber_dim();
  const int q = omega.degree;
  auto indices = increasing_multi_indices(m, q - 1);
  std::vector<Expr> out;
  out.reserve(std::max<std::size_t>(indices.size(), 1));
  for (const std::vector<int>& J : indices) {
    std::vector<std::vector<Expr>> args;
    args.reserve(q);
    args.push_back(s.components);
    for (int idx : J) args.push_back(frame_components(m, idx));
    out.push_back(contract_components(omega.components, m, q, args));
  }
  return AlgebroidForm(omega.parent, q - 1, std::move(out));
}

BundleMorphism::BundleMorphism(AlgebroidPtr source_, AlgebroidPtr target_,
                               SmoothMap base_map_, ExprMatrix fiber_map_)
    : source(std::move(source_)),
      target(std::move(target_)),
      base_map(std::move(base_map_)),
      fiber_map(std::move(fiber_map_)) {
  if (!source || !target) throw ShapeError("BundleMorphism: null algebroid");
  if (!(base_map.source == source->base()) ||
      !(base_map.target == target->base())) {
    throw ShapeError("BundleMorphism: base map charts do not match");
  }
  if (fiber_map.rows() != target->fiber_dim() ||
      fiber_map.cols() != source->fiber_dim()) {
    throw ShapeError("BundleMorphism: fiber map must be " +
                     std::to_string(target->fiber_dim()) + " x " +
                     std::to_string(source->fiber_dim()));
  }
  for (int r = 0; r < fiber_map.rows(); ++r) {
    for (int c = 0; c < fiber_map.cols(); ++c) {
      for (const std::string& v : free_variables(fiber_map.at(r, c))) {
        if (source->base().index_of(v) < 0) {
          throw ShapeError("BundleMorphism: fiber map entry uses '" + v +
                           "', which is not a source base coordinate");
        }
      }
    }
  }
}

BundleMorphism tangent_morphism(AlgebroidPtr source, AlgebroidPtr target,
                                const SmoothMap& base_map) {
  ExprMatrix jac = jacobian_matrix(base_map);
  return BundleMorphism(std::move(source), std::move(target), base_map,
                        std::move(jac));
}

AlgebroidForm pullback(const BundleMorphism& psi, const AlgebroidForm& omega) {
  if (omega.parent != psi.target) {
    throw ShapeError("pullback: form does not live on the morphism target");
  }
  auto binds = psi.base_map.bindings();
  std::vector<Expr> moved;
  moved.reserve(omega.components.size());
  for (const Expr& c : omega.components) {
    moved.push_back(substitute(c, binds));
  }
  if (omega.degree == 0) {
    return AlgebroidForm(psi.source, 0, std::move(moved));
  }
  const int m_src = psi.source->fiber_dim();
  const int m_tgt = psi.target->fiber_dim();
  auto indices = increasing_multi_indices(m_src, omega.degree);
  std::vector<Expr> out;
  out.reserve(std::max<std::size_t>(indices.size(), 1));
  for (const std::vector<int>& I : indices) {
    std::vector<std::vector<Expr>> args;
    args.reserve(omega.degree);
    for (int idx : I) args.push_back(psi.fiber_map.column(idx));
    out.push_back(contract_components(moved, m_tgt, omega.degree, args));
  }
  return AlgebroidForm(psi.source, omega.degree, std::move(out));
}

CheckReport verify_morphism(const BundleMorphism& psi,
                            std::span<const AlgebroidForm> test_forms,
                            const SampleSpec& spec, double tol, Exec exec) {
  std::vector<CheckReport> parts;
  int counter = 0;
  for (const AlgebroidForm& omega : test_forms) {
    AlgebroidForm lhs = exterior_derivative(pullback(psi, omega));
    AlgebroidForm rhs = pullback(psi, exterior_derivative(omega));
    std::vector<Expr> delta;
    delta.reserve(lhs.components.size());
    for (std::size_t i = 0; i < lhs.components.size(); ++i) {
      delta.push_back(lhs.components[i] - rhs.components[i]);
    }
    const Chart& chart = psi.source->base();
    auto residual = [chart, delta](const Point& p) {
      EvalEnv env = chart.bind(p);
      double worst = 0.0;
      for (const Expr& c : delta) {
        worst = std::max(worst, std::abs(eval(c, env)));
      }
      return worst;
    };
    parts.push_back(run_check(
        "morphism_form_" + std::to_string(counter++) + "_deg" +
            std::to_string(omega.degree),
        spec, chart.dim(), residual, tol, exec));
  }
  return merge_reports("morphism", parts);
}

Expr random_polynomial(Rng& rng, const Chart& chart, int degree) {
  Expr acc = Expr::constant(rng.dyadic(-1.0, 1.0));
  if (degree >= 1) {
    for (const std::string& c : chart.coords) {
      acc = acc + Expr::constant(rng.dyadic(-1.0, 1.0)) * Expr::variable(c);
    }
  }
  if (degree >= 2) {
    for (int i = 0; i < chart.dim(); ++i) {
      for (int j = i; j < chart.dim(); ++j) {
        if (rng.next_u64() % 2 == 0) continue;  // sparse quadratic part
        acc = acc + Expr::constant(rng.dyadic(-1.0, 1.0)) *
                        Expr::variable(chart.coords[i]) *
                        Expr::variable(chart.coords[j]);
      }
    }
  }
  return acc;
}

Section random_section(Rng& rng, AlgebroidPtr a, int degree) {
  std::vector<Expr> comps;
  comps.reserve(a->fiber_dim());
  for (int k = 0; k < a->fiber_dim(); ++k) {
    comps.push_back(random_polynomial(rng, a->base(), degree));
  }
  return Section(std::move(a), std::move(comps));
}

AlgebroidForm random_form(Rng& rng, AlgebroidPtr a, int form_degree,
                          int poly_degree) {
  std::size_t count =
      form_degree == 0
          ? 1
          : std::size_t(binomial(a->fiber_dim(), form_degree));
  std::vector<Expr> comps;
  comps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    comps.push_back(random_polynomial(rng, a->base(), poly_degree));
  }
  return AlgebroidForm(std::move(a), form_degree, std::move(comps));
}

CheckReport d_squared_check(AlgebroidPtr a, int forms_per_degree,
                            const SampleSpec& spec, double tol, Exec exec) {
  Rng rng(spec.seed ^ 0x5eedf00dULL);
  std::vector<CheckReport> parts;
  const Chart& chart = a->base();
  for (int deg = 0; deg <= 1; ++deg) {
    for (int k = 0; k < forms_per_degree; ++k) {
      AlgebroidForm omega = random_form(rng, a, deg, 2);
      AlgebroidForm dd = exterior_derivative(exterior_derivative(omega));
      std::vector<Expr> comps = dd.components;
      auto residual = [chart, comps](const Point& p) {
        EvalEnv env = chart.bind(p);
        double worst = 0.0;
        for (const Expr& c : comps) {
          worst = std::max(worst, std::abs(eval(c, env)));
        }
        return worst;
      };
      parts.push_back(run_check(
          "dd_deg" + std::to_string(deg) + "_" + std::to_string(k), spec,
          chart.dim(), residual, tol, exec));
    }
  }
  return merge_reports("d_squared", parts);
}

}  // namespace alg
