// Command-line front end: run scenario files and list the available
// constructors.  Exit codes: 0 all commands passed, 1 at least one command
// failed or errored, 2 the scenario file or invocation was malformed.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "alg/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"symbolic-numeric checks for anchored bracket structures"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::uint64_t seed_value = 0;
  int samples_value = 0;

  CLI::App* run = app.add_subcommand("run", "execute a scenario file");
  run->add_option("scenario", scenario_path, "path to a scenario JSON file")
      ->required();
  CLI::Option* out_opt =
      run->add_option("--out", out_path, "write the JSON report to this file");
  CLI::Option* seed_opt = run->add_option(
      "--seed", seed_value, "override the scenario's sampling seed");
  CLI::Option* samples_opt = run->add_option(
      "--samples", samples_value, "override the scenario's sample count");

  CLI::App* list =
      app.add_subcommand("list", "print the available object constructors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    return app.exit(err) == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    for (const std::string& line : alg::constructor_catalog()) {
      std::cout << line << "\n";
    }
    return 0;
  }

  alg::RunOverrides overrides;
  if (seed_opt->count() > 0) overrides.seed = seed_value;
  if (samples_opt->count() > 0) overrides.samples = samples_value;

  try {
    alg::RunOutcome outcome = alg::run_scenario_file(scenario_path, overrides);
    std::cout << outcome.report_text;
    if (out_opt->count() > 0) {
      std::ofstream out(out_path);
      if (!out) {
        std::cerr << "error: cannot write report to '" << out_path << "'\n";
        return 2;
      }
      out << outcome.report_json;
    }
    return outcome.exit_code;
  } catch (const alg::SchemaError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
}
