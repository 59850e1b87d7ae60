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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stretchsim/engine.h"

namespace stretchsim {

/// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitRuntime = 2 };

struct RunManifest {
  std::filesystem::path scenario_path;
  std::filesystem::path output_dir = "stretchsim-out";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> policy_overrides;  // KEY=VALUE
};

/// Loads the scenario named by the manifest and applies seed and policy
/// overrides. Throws ValidationError or std::invalid_argument.
Scenario prepare_scenario(const RunManifest &manifest);

struct CompareRow {
  std::string variant;
  double utilization = 0.0;
  double gpu_hours = 0.0;
  std::int64_t pending = 0;  // pending or failed at the horizon
  std::int64_t preemptions = 0;

  bool operator==(const CompareRow &) const = default;
};

/// Runs every variant on the same trace and faults. Variants are parsed
/// before anything runs; fewer than two throws std::invalid_argument. When
/// `output_dir` is set each variant's reports go to its own subdirectory.
std::vector<CompareRow> compare_variants(const Scenario &scenario,
                                         const std::vector<std::string> &variants,
                                         const std::optional<std::filesystem::path> &output_dir);

std::string compare_csv(const std::vector<CompareRow> &rows);

/// Entry point behind the `stretchsim` binary. `args` excludes argv[0].
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace stretchsim
