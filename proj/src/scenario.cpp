#include "alg/scenario.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <utility>

#include "json.hpp"

#include "alg/algebroid.hpp"
#include "alg/calculus.hpp"
#include "alg/constructions.hpp"
#include "alg/dynamics.hpp"
#include "alg/jets.hpp"
#include "alg/tower.hpp"

namespace alg {

namespace {

using nlohmann::json;

[[noreturn]] void schema_fail(const std::string& where,
                              const std::string& what) {
  throw SchemaError("scenario schema: " + where + ": " + what);
}

const json& require_field(const json& obj, const std::string& where,
                          const std::string& field) {
  if (!obj.is_object()) schema_fail(where, "expected an object");
  auto it = obj.find(field);
  if (it == obj.end()) schema_fail(where, "missing field '" + field + "'");
  return *it;
}

std::string require_string(const json& obj, const std::string& where,
                           const std::string& field) {
  const json& v = require_field(obj, where, field);
  if (!v.is_string()) schema_fail(where, "field '" + field + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& obj, const std::string& where,
                      const std::string& field) {
  const json& v = require_field(obj, where, field);
  if (!v.is_number()) schema_fail(where, "field '" + field + "' must be a number");
  return v.get<double>();
}

int require_int(const json& obj, const std::string& where,
                const std::string& field) {
  const json& v = require_field(obj, where, field);
  if (!v.is_number_integer()) {
    schema_fail(where, "field '" + field + "' must be an integer");
  }
  return v.get<int>();
}

Chart chart_from(const json& obj, const std::string& where) {
  const json& coords = require_field(obj, where, "coords");
  if (!coords.is_array() || coords.empty()) {
    schema_fail(where, "field 'coords' must be a non-empty array of names");
  }
  std::vector<std::string> names;
  for (const json& c : coords) {
    if (!c.is_string()) schema_fail(where, "coordinates must be strings");
    names.push_back(c.get<std::string>());
  }
  try {
    return Chart(std::move(names));
  } catch (const Error& err) {
    schema_fail(where, err.what());
  }
}

Expr expr_from(const json& v, const Chart& chart, const std::string& where) {
  if (!v.is_string()) schema_fail(where, "expressions must be strings");
  try {
    return parse_expr(v.get<std::string>(), chart.coords);
  } catch (const Error& err) {
    schema_fail(where, err.what());
  }
}

std::vector<VectorField> fields_from(const json& obj, const Chart& chart,
                                     const std::string& where,
                                     const std::string& field) {
  const json& arr = require_field(obj, where, field);
  if (!arr.is_array() || arr.empty()) {
    schema_fail(where, "field '" + field + "' must be a non-empty array");
  }
  std::vector<VectorField> out;
  for (const json& item : arr) {
    if (!item.is_array() || int(item.size()) != chart.dim()) {
      schema_fail(where, "each entry of '" + field + "' needs one component "
                         "per coordinate");
    }
    std::vector<Expr> comps;
    for (const json& c : item) comps.push_back(expr_from(c, chart, where));
    out.emplace_back(chart, std::move(comps));
  }
  return out;
}

StructureFunctions structure_from(const json& obj, int fiber_dim,
                                  const Chart& chart,
                                  const std::string& where,
                                  const std::string& field) {
  StructureFunctions table(fiber_dim);
  auto it = obj.find(field);
  if (it == obj.end()) return table;  // all-zero table
  if (!it->is_array()) schema_fail(where, "field '" + field + "' must be an array");
  for (const json& entry : *it) {
    int k = require_int(entry, where, "k");
    int i = require_int(entry, where, "i");
    int j = require_int(entry, where, "j");
    // simplify folds literals like "-1" into plain constants, which the
    // constant-coefficient gates require
    Expr value =
        simplify(expr_from(require_field(entry, where, "value"), chart, where));
    try {
      table.set(k, i, j, std::move(value));
    } catch (const Error& err) {
      schema_fail(where, err.what());
    }
  }
  return table;
}

ExprMatrix matrix_from(const json& obj, const Chart& chart,
                       const std::string& where, const std::string& field) {
  const json& rows = require_field(obj, where, field);
  if (!rows.is_array() || rows.empty() || !rows[0].is_array()) {
    schema_fail(where, "field '" + field + "' must be an array of rows");
  }
  const int r = int(rows.size());
  const int c = int(rows[0].size());
  ExprMatrix out(r, c);
  for (int i = 0; i < r; ++i) {
    if (!rows[i].is_array() || int(rows[i].size()) != c) {
      schema_fail(where, "matrix rows must all have the same length");
    }
    for (int j = 0; j < c; ++j) {
      out.at(i, j) = expr_from(rows[i][j], chart, where);
    }
  }
  return out;
}

Point point_from(const json& obj, const std::string& where,
                 const std::string& field) {
  const json& arr = require_field(obj, where, field);
  if (!arr.is_array()) schema_fail(where, "field '" + field + "' must be an array");
  Point p(int(arr.size()));
  for (int i = 0; i < int(arr.size()); ++i) {
    if (!arr[i].is_number()) schema_fail(where, "field '" + field + "' must hold numbers");
    p[i] = arr[i].get<double>();
  }
  return p;
}

// Everything a scenario can define, keyed by name.
struct Store {
  std::map<std::string, AlgebroidPtr> algebroids;
  std::map<std::string, NijenhuisTensor> tensors;
  std::map<std::string, AlgebroidTower> towers;
  std::map<std::string, Semispray> sprays;
  std::map<std::string, PDESystem1> systems;
  std::map<std::string, std::string> kinds;

  void claim(const std::string& name, const std::string& kind,
             const std::string& where) {
    auto [it, fresh] = kinds.emplace(name, kind);
    (void)it;
    if (!fresh) schema_fail(where, "name '" + name + "' is already defined");
  }

  template <typename Map>
  const typename Map::mapped_type& lookup(const Map& map,
                                          const std::string& name,
                                          const std::string& kind,
                                          const std::string& where) const {
    auto it = map.find(name);
    if (it == map.end()) {
      auto known = kinds.find(name);
      if (known == kinds.end()) {
        schema_fail(where, "unknown object '" + name + "'");
      }
      schema_fail(where, "object '" + name + "' is a " + known->second +
                         ", expected a " + kind);
    }
    return it->second;
  }
};

void build_object(Store& store, const json& obj, const SampleSpec& spec,
                  double tol, const std::string& where) {
  std::string name = require_string(obj, where, "name");
  std::string ctor = require_string(obj, where, "constructor");
  if (ctor == "tangent") {
    store.claim(name, "algebroid", where);
    store.algebroids.emplace(name, tangent_algebroid(chart_from(obj, where)));
  } else if (ctor == "nijenhuis_oscillator") {
    int pairs = require_int(obj, where, "pairs");
    try {
      NijenhuisTensor tensor = harmonic_oscillator_tensor(pairs);
      store.claim(name, "algebroid", where);
      store.algebroids.emplace(name, nijenhuis_algebroid(tensor));
      store.tensors.emplace(name, std::move(tensor));
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "poisson_cotangent") {
    Chart chart = chart_from(obj, where);
    ExprMatrix matrix = matrix_from(obj, chart, where, "matrix");
    try {
      PoissonTensor tensor{chart, std::move(matrix)};
      store.claim(name, "algebroid", where);
      store.algebroids.emplace(name, poisson_cotangent_algebroid(tensor));
    } catch (const Error& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "distribution") {
    Chart chart = chart_from(obj, where);
    std::vector<VectorField> frame = fields_from(obj, chart, where, "frame");
    StructureFunctions closure =
        structure_from(obj, int(frame.size()), chart, where, "closure");
    // the involutivity gate may reject the data; that is a schema-level
    // verdict about the scenario's own claims
    try {
      store.claim(name, "algebroid", where);
      store.algebroids.emplace(
          name, distribution_algebroid(name, chart, frame, std::move(closure),
                                       spec, tol));
    } catch (const ValidationError& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "action") {
    Chart chart = chart_from(obj, where);
    std::vector<VectorField> generators =
        fields_from(obj, chart, where, "generators");
    StructureFunctions constants =
        structure_from(obj, int(generators.size()), chart, where, "constants");
    try {
      store.claim(name, "algebroid", where);
      store.algebroids.emplace(
          name, action_algebroid(name, chart, generators,
                                 std::move(constants), spec, tol));
    } catch (const Error& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "nijenhuis_tower") {
    int depth = require_int(obj, where, "depth");
    try {
      store.claim(name, "tower", where);
      store.towers.emplace(name, nijenhuis_tower(depth));
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "corank1_tower") {
    int depth = require_int(obj, where, "depth");
    try {
      store.claim(name, "tower", where);
      store.towers.emplace(name, corank1_tower(depth));
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "identity_tower") {
    Chart chart = chart_from(obj, where);
    int depth = require_int(obj, where, "depth");
    try {
      store.claim(name, "tower", where);
      store.towers.emplace(name, identity_tower(chart, depth));
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "semispray") {
    std::string parent_name = require_string(obj, where, "algebroid");
    const AlgebroidPtr& parent =
        store.lookup(store.algebroids, parent_name, "algebroid", where);
    const json& accel = require_field(obj, where, "acceleration");
    if (!accel.is_array()) {
      schema_fail(where, "field 'acceleration' must be an array");
    }
    try {
      Chart total = total_chart(*parent);
      std::vector<Expr> xi;
      for (const json& c : accel) xi.push_back(expr_from(c, total, where));
      store.claim(name, "semispray", where);
      store.sprays.emplace(name, make_semispray(parent, std::move(xi)));
    } catch (const Error& err) {
      schema_fail(where, err.what());
    }
  } else if (ctor == "pde_system") {
    Chart base({"x", "y", "u"});
    Expr phi = expr_from(require_field(obj, where, "phi"), base, where);
    Expr psi = expr_from(require_field(obj, where, "psi"), base, where);
    store.claim(name, "pde_system", where);
    store.systems.emplace(name,
                          make_pde_system(std::move(phi), std::move(psi)));
  } else {
    schema_fail(where, "unknown constructor '" + ctor + "'");
  }
}

json report_to_json(const CheckReport& rep) {
  json out;
  out["name"] = rep.name;
  out["pass"] = rep.pass;
  out["tol"] = rep.tol;
  out["max_residual"] = rep.max_residual;
  out["samples"] = rep.samples;
  if (rep.error) out["error"] = *rep.error;
  json worst = json::array();
  for (const WorstSample& w : rep.worst) {
    json entry;
    entry["index"] = w.index;
    entry["residual"] = w.residual;
    json pt = json::array();
    for (int i = 0; i < int(w.point.size()); ++i) pt.push_back(w.point[i]);
    entry["point"] = std::move(pt);
    worst.push_back(std::move(entry));
  }
  out["worst"] = std::move(worst);
  return out;
}

json tower_report_to_json(const TowerReport& rep) {
  json out;
  out["pass"] = rep.pass;
  out["max_residual"] = rep.max_residual;
  json entries = json::array();
  for (const TowerReport::Entry& e : rep.entries) {
    json entry;
    entry["low"] = e.low;
    entry["high"] = e.high;
    entry["condition"] = e.condition;
    entry["report"] = report_to_json(e.report);
    entries.push_back(std::move(entry));
  }
  out["entries"] = std::move(entries);
  return out;
}

// Fills status/max_residual fields of the command entry from one merged
// report; returns whether the command passed.
bool record_report(json& entry, const CheckReport& rep) {
  entry["status"] = rep.pass ? "pass" : "fail";
  entry["max_residual"] = rep.max_residual;
  entry["tol"] = rep.tol;
  return rep.pass;
}

Section seeded_section(Rng& rng, const AlgebroidPtr& a) {
  return random_section(rng, a, 2);
}

bool run_command(const json& cmd, const Store& store, const SampleSpec& spec,
                 double default_tol, json& entry, const std::string& where) {
  std::string command = require_string(cmd, where, "command");
  entry["command"] = command;
  double tol = default_tol;
  if (cmd.contains("tol")) {
    tol = require_number(cmd, where, "tol");
    if (!(tol > 0.0)) schema_fail(where, "tolerances must be positive");
  }

  if (command == "verify_axioms") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const AlgebroidPtr& a =
        store.lookup(store.algebroids, target, "algebroid", where);
    Rng rng(spec.seed ^ 0x414c47u);
    Section s1 = seeded_section(rng, a);
    Section s2 = seeded_section(rng, a);
    Section s3 = seeded_section(rng, a);
    Expr g = random_polynomial(rng, a->base(), 2);
    std::vector<CheckReport> parts = {
        verify_anchor_homomorphism(*a, s1, s2, spec, tol),
        verify_leibniz(*a, s1, s2, g, spec, tol),
        verify_jacobi(s1, s2, s3, spec, tol)};
    json checks = json::array();
    for (const CheckReport& part : parts) checks.push_back(report_to_json(part));
    entry["checks"] = std::move(checks);
    return record_report(entry, merge_reports("axioms", parts));
  }

  if (command == "verify_system") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const AlgebroidTower& tower =
        store.lookup(store.towers, target, "tower", where);
    TowerReport report = verify_system(tower, spec, tol);
    entry["tower"] = tower_report_to_json(report);
    entry["status"] = report.pass ? "pass" : "fail";
    entry["max_residual"] = report.max_residual;
    entry["tol"] = tol;
    return report.pass;
  }

  if (command == "d_squared") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const AlgebroidPtr& a =
        store.lookup(store.algebroids, target, "algebroid", where);
    int forms = cmd.contains("forms_per_degree")
                    ? require_int(cmd, where, "forms_per_degree")
                    : 5;
    CheckReport report = d_squared_check(a, forms, spec, tol);
    entry["checks"] = json::array({report_to_json(report)});
    return record_report(entry, report);
  }

  if (command == "torsion_check") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const NijenhuisTensor& tensor =
        store.lookup(store.tensors, target, "deformation tensor", where);
    Rng rng(spec.seed ^ 0x544f52u);
    const Chart& chart = tensor.chart;
    auto random_field = [&rng, &chart]() {
      std::vector<Expr> comps;
      for (int i = 0; i < chart.dim(); ++i) {
        comps.push_back(random_polynomial(rng, chart, 2));
      }
      return VectorField(chart, std::move(comps));
    };
    std::vector<CheckReport> parts;
    for (int trial = 0; trial < 2; ++trial) {
      VectorField torsion = nijenhuis_torsion(tensor, random_field(),
                                              random_field());
      auto residual = [&torsion](const Point& p) {
        return torsion.eval_at(p).lpNorm<Eigen::Infinity>();
      };
      parts.push_back(run_check("torsion_t" + std::to_string(trial), spec,
                                chart.dim(), residual, tol));
    }
    json checks = json::array();
    for (const CheckReport& part : parts) checks.push_back(report_to_json(part));
    entry["checks"] = std::move(checks);
    return record_report(entry, merge_reports("torsion", parts));
  }

  if (command == "integrate") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const Semispray& spray =
        store.lookup(store.sprays, target, "semispray", where);
    Point x0 = point_from(cmd, where, "x0");
    Point e0 = point_from(cmd, where, "e0");
    double t_end = require_number(cmd, where, "t_end");
    double step = require_number(cmd, where, "step");
    DiscreteCurve curve;
    try {
      curve = integrate(spray, x0, e0, t_end, step);
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
    entry["nodes"] = int(curve.nodes.size());
    if (!curve.nodes.empty()) {
      const CurveNode& last = curve.nodes.back();
      json endpoint;
      endpoint["t"] = last.t;
      endpoint["base"] = json::array();
      for (int i = 0; i < int(last.base.size()); ++i) {
        endpoint["base"].push_back(last.base[i]);
      }
      endpoint["fiber"] = json::array();
      for (int i = 0; i < int(last.fiber.size()); ++i) {
        endpoint["fiber"].push_back(last.fiber[i]);
      }
      entry["endpoint"] = std::move(endpoint);
    }
    if (cmd.contains("table_out")) {
      std::string path = require_string(cmd, where, "table_out");
      std::ofstream out(path);
      if (!out) schema_fail(where, "cannot write curve table to '" + path + "'");
      out << curve_table(*spray.parent, curve);
    }
    if (curve.error) {
      entry["status"] = "error";
      entry["error"] = *curve.error;
      return false;
    }
    CheckReport report = admissibility_residual(*spray.parent, curve, tol);
    entry["checks"] = json::array({report_to_json(report)});
    return record_report(entry, report);
  }

  if (command == "homogeneity") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const Semispray& spray =
        store.lookup(store.sprays, target, "semispray", where);
    const json& lambdas_json = require_field(cmd, where, "lambdas");
    if (!lambdas_json.is_array() || lambdas_json.empty()) {
      schema_fail(where, "field 'lambdas' must be a non-empty array");
    }
    std::vector<double> lambdas;
    for (const json& v : lambdas_json) {
      if (!v.is_number()) schema_fail(where, "scaling values must be numbers");
      lambdas.push_back(v.get<double>());
    }
    CheckReport report;
    try {
      report = homogeneity_check(spray, lambdas, spec, tol);
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
    entry["checks"] = json::array({report_to_json(report)});
    return record_report(entry, report);
  }

  if (command == "involutivity") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const PDESystem1& system =
        store.lookup(store.systems, target, "pde_system", where);
    CheckReport report = involutivity_check(system, spec, tol);
    entry["checks"] = json::array({report_to_json(report)});
    return record_report(entry, report);
  }

  if (command == "prolong_bracket") {
    std::string target = require_string(cmd, where, "target");
    entry["target"] = target;
    const PDESystem1& system =
        store.lookup(store.systems, target, "pde_system", where);
    int order = cmd.contains("order") ? require_int(cmd, where, "order") : 2;
    CheckReport report;
    try {
      auto [x, y] = system_fields(system);
      report = prolong_bracket_check(x, y, order, spec, tol);
    } catch (const ShapeError& err) {
      schema_fail(where, err.what());
    }
    entry["checks"] = json::array({report_to_json(report)});
    return record_report(entry, report);
  }

  schema_fail(where, "unknown command '" + command + "'");
}

}  // namespace

RunOutcome run_scenario_text(const std::string& text,
                             const RunOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& err) {
    throw SchemaError(std::string("scenario schema: not valid JSON: ") +
                      err.what());
  }
  if (!doc.is_object()) throw SchemaError("scenario schema: top level must be an object");

  std::string label = require_string(doc, "top level", "label");
  double tol = require_number(doc, "top level", "tolerance");
  if (!(tol > 0.0)) schema_fail("top level", "tolerances must be positive");

  const json& samples = require_field(doc, "top level", "samples");
  SampleSpec spec;
  spec.lo = require_number(samples, "samples", "lo");
  spec.hi = require_number(samples, "samples", "hi");
  spec.count = require_int(samples, "samples", "count");
  double seed_value = require_number(samples, "samples", "seed");
  if (seed_value < 0) schema_fail("samples", "seed must be non-negative");
  spec.seed = std::uint64_t(seed_value);
  if (overrides.seed) spec.seed = *overrides.seed;
  if (overrides.samples) spec.count = *overrides.samples;
  if (spec.count < 1) schema_fail("samples", "sample count must be >= 1");
  if (!(spec.lo < spec.hi)) schema_fail("samples", "need lo < hi");

  Store store;
  if (doc.contains("objects")) {
    const json& objects = doc["objects"];
    if (!objects.is_array()) schema_fail("objects", "must be an array");
    for (std::size_t i = 0; i < objects.size(); ++i) {
      build_object(store, objects[i], spec, tol,
                   "objects[" + std::to_string(i) + "]");
    }
  }

  const json& commands = require_field(doc, "top level", "commands");
  if (!commands.is_array() || commands.empty()) {
    schema_fail("commands", "must be a non-empty array");
  }

  json report;
  report["scenario"] = label;
  report["tolerance"] = tol;
  json spec_json;
  spec_json["lo"] = spec.lo;
  spec_json["hi"] = spec.hi;
  spec_json["count"] = spec.count;
  spec_json["seed"] = spec.seed;
  report["samples"] = std::move(spec_json);

  std::ostringstream text_out;
  text_out << "scenario " << label << ": " << commands.size()
           << " command(s), box [" << format_real(spec.lo) << ", "
           << format_real(spec.hi) << "], " << spec.count
           << " samples, seed " << spec.seed << "\n";

  bool all_pass = true;
  json command_entries = json::array();
  const auto run_start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < commands.size(); ++i) {
    const std::string where = "commands[" + std::to_string(i) + "]";
    json entry;
    const auto start = std::chrono::steady_clock::now();
    bool passed = false;
    try {
      passed = run_command(commands[i], store, spec, tol, entry, where);
    } catch (const SchemaError&) {
      throw;  // malformed scenario: abort the whole run
    } catch (const Error& err) {
      // runtime failure inside a well-formed command: record and continue
      entry["status"] = "error";
      entry["error"] = err.what();
      passed = false;
    }
    const auto stop = std::chrono::steady_clock::now();
    entry["time_ms"] =
        std::chrono::duration<double, std::milli>(stop - start).count();
    all_pass = all_pass && passed;

    std::string status = entry["status"].get<std::string>();
    text_out << "  [" << status << "] "
             << entry["command"].get<std::string>();
    if (entry.contains("target")) {
      text_out << " " << entry["target"].get<std::string>();
    }
    if (entry.contains("max_residual") && entry["max_residual"].is_number()) {
      text_out << "  max residual "
               << format_real(entry["max_residual"].get<double>());
    }
    if (entry.contains("error")) {
      text_out << "  (" << entry["error"].get<std::string>() << ")";
    }
    text_out << "\n";
    command_entries.push_back(std::move(entry));
  }
  const auto run_stop = std::chrono::steady_clock::now();

  report["commands"] = std::move(command_entries);
  report["status"] = all_pass ? "pass" : "fail";
  report["time_ms"] =
      std::chrono::duration<double, std::milli>(run_stop - run_start).count();
  text_out << "status: " << (all_pass ? "pass" : "fail") << "\n";

  RunOutcome outcome;
  outcome.report_json = report.dump(2) + "\n";
  outcome.report_text = text_out.str();
  outcome.exit_code = all_pass ? 0 : 1;
  return outcome;
}

RunOutcome run_scenario_file(const std::string& path,
                             const RunOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read scenario file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return run_scenario_text(buffer.str(), overrides);
}

std::vector<std::string> constructor_catalog() {
  return {
      "action(coords, generators, constants)",
      "corank1_tower(depth)",
      "distribution(coords, frame, closure)",
      "identity_tower(coords, depth)",
      "nijenhuis_oscillator(pairs)",
      "nijenhuis_tower(depth)",
      "pde_system(phi, psi)",
      "poisson_cotangent(P matrix)",
      "semispray(algebroid, acceleration)",
      "tangent(coords)",
  };
}

}  // namespace alg
