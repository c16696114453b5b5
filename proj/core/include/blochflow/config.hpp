#pragma once

#include <string>

#include "blochflow/scenario.hpp"

namespace blochflow {

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from(const std::string& name);

// line-oriented "[section]" + "key = value" text; '#' starts a comment.
// Unknown sections or keys fail with the offending line number.
ScenarioConfig parse_config_text(const std::string& text);
ScenarioConfig parse_config_file(const std::string& path);

// full echo of every setting in a fixed order; parsing it back reproduces the
// config exactly. Hashed into the run id.
std::string canonical_config_text(const ScenarioConfig& cfg);

// range/consistency checks shared by the parser and the CLI override path
void validate_config(const ScenarioConfig& cfg);

}  // namespace blochflow
