#pragma once

#include <string>
#include <vector>

#include "blochflow/config.hpp"

namespace blochflow {

struct RunResult {
  std::string run_id;
  std::string out_dir;
  std::vector<std::string> files;  // relative to out_dir, manifest last
};

// executes one configured scenario and writes its artifacts plus
// manifest.json; fields_only skips trajectories and curves. On failure a
// manifest carrying {stage, message} is still written before the exception
// propagates.
RunResult run_scenario(const ScenarioConfig& cfg, const std::string& out_dir,
                       bool fields_only = false);

}  // namespace blochflow
