#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

namespace ctlab {

inline constexpr const char* kToolName = "ctlab";
inline constexpr const char* kToolVersion = "0.1.0";

// Report of one CLI experiment. The canonical section (echo + results) is
// byte-stable for equal parameters and seed at any worker count and cache
// configuration; counters (wall time, cache hit rate, simulated steps) are
// informational and excluded from it.
struct ExperimentReport {
  nlohmann::json echo;
  nlohmann::json results;
  nlohmann::json counters;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["echo"] = echo;
    j["results"] = results;
    j["counters"] = counters;
    return j;
  }

  // The deterministic part, compact-dumped for byte comparison.
  std::string canonical_payload() const {
    nlohmann::json j;
    j["echo"] = echo;
    j["results"] = results;
    return j.dump();
  }
};

}  // namespace ctlab
