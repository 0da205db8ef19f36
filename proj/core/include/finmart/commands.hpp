#pragma once

#include <cstdint>
#include <string>

#include "finmart/rational.hpp"
#include "finmart/scenario.hpp"

namespace finmart {

// Shared flags for every report command.
struct RunOptions {
  std::string format = "text";  // "text" or "json"
  bool strict = false;          // negative verdicts exit 2 instead of 0
  Rat tol;                      // overrides the scenario's tolerance when set
  bool tol_set = false;
  std::uint64_t seed = 1;       // randomized suites; recorded in the report
  std::string numeraire;        // switch numeraire by asset name when nonempty
  // price:
  std::string claim;
  int t = 0;
  // hypothesis:
  std::string strategy = "gop";      // "gop" or "hold:<asset>"
  std::string partition = "info";    // "info", "trivial", or "evolution"
};

struct RunResult {
  int exit_code = 0;  // 0 ok, 2 negative verdict under --strict
  bool verdict = true;
  std::string text;  // human-readable report
  std::string json;  // structured report, schema-versioned, deterministic
};

// Commands: check, emm, gop, price, sensitivity, hypothesis.
// Throws BadParams for an unknown command or missing names; scenario and
// market validation errors propagate from the library.
RunResult run(const std::string& command, const Scenario& scenario, const RunOptions& opts);

}  // namespace finmart
