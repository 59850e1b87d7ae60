// Copyright 2026 The stretchsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "stretchsim/engine.h"

namespace stretchsim {

std::string utilization_csv(const Metrics &metrics);
std::string namespaces_csv(const Metrics &metrics);
std::string queue_depth_csv(const Metrics &metrics);
std::string availability_csv(const Metrics &metrics);

/// Pod, node, location and replica state at the end of a run.
nlohmann::json final_state_json(const Scenario &scenario, const SimState &state,
                                const Metrics &metrics);

/// One-page plain-text summary.
std::string summary_text(const Scenario &scenario, const Metrics &metrics);

/// Writes every report file into `dir`, creating it if needed. Throws
/// std::runtime_error when a file cannot be written.
void write_report(const std::filesystem::path &dir, const Scenario &scenario,
                  const RunResult &result);

}  // namespace stretchsim
