#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "ctlab/report.hpp"

namespace ctlab {

// Outcome of one CLI invocation: the exit code, the report (when the verb
// produced one), and any error line already formatted for stderr.
struct CliOutcome {
  int exit_code = 0;
  bool has_report = false;
  ExperimentReport report;
  std::string error;
  std::string format = "json";  // presentation only; not part of the payload
  std::string out_path;
};

// Parses and runs one command (args exclude the program name). All verbs
// are deterministic: equal parameters and seed give byte-identical
// canonical payloads at any --jobs setting, with or without a cache.
CliOutcome dispatch(const std::vector<std::string>& args);

// Process entry point: dispatch, then print the report (or --out it) and
// the error line. Exit codes: 0 success (bottom/infinite outcomes
// included), 2 usage, 3 infeasibility refusal, 1 other failures.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace ctlab
