#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alg/errors.hpp"

namespace alg {

// Scenario text that does not match the documented schema: malformed JSON,
// missing fields, unknown constructors or commands, dangling references.
// The command-line front end maps this to exit code 2.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Command-line overrides; set fields win over the scenario's own sampling
// values.
struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
};

// Result of one scenario run.  exit_code is 0 when every command passed and
// 1 otherwise; schema problems throw SchemaError before any command runs.
struct RunOutcome {
  std::string report_json;  // machine report: sorted keys, two-space indent
  std::string report_text;  // human-readable summary, one line per command
  int exit_code = 0;
};

// Runs the commands of a scenario document in order.  A runtime evaluation
// failure marks that command "error" and the run continues.  Reports are
// deterministic for a fixed scenario and seed; only time_ms fields vary.
RunOutcome run_scenario_text(const std::string& text,
                             const RunOverrides& overrides = {});
RunOutcome run_scenario_file(const std::string& path,
                             const RunOverrides& overrides = {});

// Stable sorted listing of the object constructors scenarios may use, with
// parameter signatures.
std::vector<std::string> constructor_catalog();

}  // namespace alg
