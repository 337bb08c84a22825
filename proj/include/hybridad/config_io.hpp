// SPDX-License-Identifier: Apache-2.0
//
// Copyright 2026 The hybridad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hybridad/scenario.hpp"

namespace hybridad {

/// Keys accepted by the config file and the `--<key>` CLI overrides.
const std::vector<std::string>& scenario_config_keys();

/// Set one field from its textual form. Throws std::invalid_argument on an
/// unknown key or unparsable value.
void apply_override(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// Parse `key = value` lines; `#` starts a comment. Unknown keys are errors.
ScenarioConfig parse_scenario_config(std::istream& in, ScenarioConfig base = {});
ScenarioConfig load_scenario_config(const std::string& path, ScenarioConfig base = {});

/// Inverse of parse_scenario_config.
void write_scenario_config(std::ostream& out, const ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);
/// Audit dump: config, placement, field classes, signatures, truth.
nlohmann::json scenario_to_json(const Scenario& sc);

}  // namespace hybridad
