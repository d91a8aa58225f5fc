#include "alg/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

using namespace alg;

namespace {

// Drops every line that mentions timing so report bodies can be compared
// byte for byte across runs.
std::string strip_timing(const std::string& text) {
  std::istringstream in(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find("time_ms") == std::string::npos) out << line << "\n";
  }
  return out.str();
}

const char* kTangentScenario = R"json({
  "label": "unit-tangent",
  "samples": { "lo": -1.0, "hi": 1.0, "count": 6, "seed": 7 },
  "tolerance": 1e-9,
  "objects": [
    { "name": "plane", "constructor": "tangent", "coords": ["x1", "x2"] }
  ],
  "commands": [
    { "command": "verify_axioms", "target": "plane" },
    { "command": "d_squared", "target": "plane", "forms_per_degree": 2 }
  ]
})json";

}  // namespace

TEST_CASE("identical scenario text and seed reproduce byte-identical report "
          "bodies once timing lines are removed") {
  RunOutcome first = run_scenario_text(kTangentScenario);
  RunOutcome second = run_scenario_text(kTangentScenario);
  CHECK(first.exit_code == 0);
  CHECK(strip_timing(first.report_json) == strip_timing(second.report_json));
  CHECK(first.report_text == second.report_text);
  CHECK(first.report_json.find("time_ms") != std::string::npos);
}

TEST_CASE("seed and sample-count overrides replace the scenario's values") {
  RunOverrides reseeded;
  reseeded.seed = 99;
  RunOutcome base = run_scenario_text(kTangentScenario);
  RunOutcome other = run_scenario_text(kTangentScenario, reseeded);
  CHECK(base.exit_code == 0);
  CHECK(other.exit_code == 0);
  CHECK(other.report_json.find("\"seed\": 99") != std::string::npos);
  // different seed, different sampled points
  CHECK(strip_timing(base.report_json) != strip_timing(other.report_json));

  RunOverrides resized;
  resized.samples = 11;
  RunOutcome wider = run_scenario_text(kTangentScenario, resized);
  CHECK(wider.report_json.find("\"count\": 11") != std::string::npos);
  CHECK(wider.report_json.find("\"samples\": 11") != std::string::npos);
}

TEST_CASE("schema violations are rejected with a diagnostic naming the "
          "offending field") {
  CHECK_THROWS_AS(run_scenario_text("{ not json"), SchemaError);

  auto message_of = [](const std::string& text) {
    try {
      run_scenario_text(text);
    } catch (const SchemaError& err) {
      return std::string(err.what());
    }
    return std::string("(no error)");
  };

  // unknown constructor is named in the diagnostic
  std::string msg = message_of(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "objects": [ { "name": "m", "constructor": "moebius_strip" } ],
    "commands": [ { "command": "verify_axioms", "target": "m" } ]
  })json");
  CHECK(msg.find("moebius_strip") != std::string::npos);

  // missing required field is named
  msg = message_of(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "commands": [ { "command": "verify_axioms" } ]
  })json");
  CHECK(msg.find("target") != std::string::npos);

  // dangling reference is named
  msg = message_of(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "commands": [ { "command": "verify_axioms", "target": "ghost" } ]
  })json");
  CHECK(msg.find("ghost") != std::string::npos);

  // reference to an object of the wrong kind says what it actually is
  msg = message_of(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "objects": [
      { "name": "plane", "constructor": "tangent", "coords": ["x1"] }
    ],
    "commands": [ { "command": "verify_system", "target": "plane" } ]
  })json");
  CHECK(msg.find("expected a tower") != std::string::npos);

  // tolerance and sample-count invariants
  CHECK_THROWS_AS(run_scenario_text(R"json({
    "label": "bad", "tolerance": 0.0,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "commands": [ { "command": "verify_axioms", "target": "x" } ]
  })json"),
                  SchemaError);
  CHECK_THROWS_AS(run_scenario_text(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 0, "seed": 1 },
    "commands": [ { "command": "verify_axioms", "target": "x" } ]
  })json"),
                  SchemaError);

  // unknown command
  msg = message_of(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "objects": [
      { "name": "plane", "constructor": "tangent", "coords": ["x1"] }
    ],
    "commands": [ { "command": "summon", "target": "plane" } ]
  })json");
  CHECK(msg.find("summon") != std::string::npos);

  // duplicate names are rejected
  msg = message_of(R"json({
    "label": "bad", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 1 },
    "objects": [
      { "name": "plane", "constructor": "tangent", "coords": ["x1"] },
      { "name": "plane", "constructor": "tangent", "coords": ["x1", "x2"] }
    ],
    "commands": [ { "command": "verify_axioms", "target": "plane" } ]
  })json");
  CHECK(msg.find("already defined") != std::string::npos);
}

TEST_CASE("a failing check yields exit code 1 and a fail status, not an "
          "exception") {
  RunOutcome out = run_scenario_text(R"json({
    "label": "obstructed", "tolerance": 1e-9,
    "samples": { "lo": -1, "hi": 1, "count": 10, "seed": 3 },
    "objects": [
      { "name": "blocked", "constructor": "pde_system", "phi": "y", "psi": "0" }
    ],
    "commands": [ { "command": "involutivity", "target": "blocked" } ]
  })json");
  CHECK(out.exit_code == 1);
  CHECK(out.report_json.find("\"status\": \"fail\"") != std::string::npos);
  CHECK(out.report_text.find("[fail]") != std::string::npos);
}

TEST_CASE("a runtime evaluation error marks the command as error and the run "
          "continues to later commands") {
  RunOutcome out = run_scenario_text(R"json({
    "label": "partial", "tolerance": 1e-5,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 3 },
    "objects": [
      { "name": "line", "constructor": "tangent", "coords": ["x1"] },
      { "name": "reciprocal", "constructor": "semispray",
        "algebroid": "line", "acceleration": ["1/e1"] },
      { "name": "free", "constructor": "semispray",
        "algebroid": "line", "acceleration": ["0"] }
    ],
    "commands": [
      { "command": "integrate", "target": "reciprocal",
        "x0": [1.0], "e0": [0.0], "t_end": 0.5, "step": 0.1 },
      { "command": "integrate", "target": "free",
        "x0": [1.0], "e0": [1.0], "t_end": 0.5, "step": 0.1 }
    ]
  })json");
  CHECK(out.exit_code == 1);
  CHECK(out.report_json.find("\"status\": \"error\"") != std::string::npos);
  CHECK(out.report_json.find("division by zero") != std::string::npos);
  // the second command still ran and passed
  CHECK(out.report_text.find("[error] integrate reciprocal") !=
        std::string::npos);
  CHECK(out.report_text.find("[pass] integrate free") != std::string::npos);
}

TEST_CASE("integrate can export the curve as a plain table") {
  std::string path = "scenario_curve_table.txt";
  std::string text = std::string(R"json({
    "label": "table", "tolerance": 1e-5,
    "samples": { "lo": -1, "hi": 1, "count": 5, "seed": 3 },
    "objects": [
      { "name": "line", "constructor": "tangent", "coords": ["x1"] },
      { "name": "free", "constructor": "semispray",
        "algebroid": "line", "acceleration": ["0"] }
    ],
    "commands": [
      { "command": "integrate", "target": "free",
        "x0": [0.0], "e0": [1.0], "t_end": 0.5, "step": 0.25,
        "table_out": ")json") +
                     path + R"json(" }
    ]
  })json";
  RunOutcome out = run_scenario_text(text);
  CHECK(out.exit_code == 0);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "# t x1 e1");
  std::string row;
  std::getline(in, row);
  CHECK(row == "0 0 1");
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("scenario files that cannot be read are a schema-level failure") {
  CHECK_THROWS_AS(run_scenario_file("no/such/scenario.json"), SchemaError);
}

TEST_CASE("the constructor catalog is sorted, stable, and lists the "
          "documented signatures") {
  std::vector<std::string> catalog = constructor_catalog();
  CHECK(std::is_sorted(catalog.begin(), catalog.end()));
  CHECK(catalog == constructor_catalog());
  auto contains = [&catalog](const std::string& needle) {
    return std::any_of(catalog.begin(), catalog.end(),
                       [&needle](const std::string& line) {
                         return line.find(needle) != std::string::npos;
                       });
  };
  CHECK(contains("nijenhuis_tower(depth)"));
  CHECK(contains("poisson_cotangent(P matrix)"));
  CHECK(contains("tangent("));
  CHECK(contains("semispray("));
  CHECK(contains("pde_system("));
}
