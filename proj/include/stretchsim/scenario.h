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
#include <string>
#include <string_view>
#include <vector>

#include "stretchsim/cluster.h"
#include "stretchsim/diagnostics.h"
#include "stretchsim/scheduler.h"
#include "stretchsim/storage.h"
#include "stretchsim/workload.h"

namespace stretchsim {

/// A timed change of one location's status.
struct FaultEvent {
  Seconds time = 0;
  std::string location;
  LocationStatus status = LocationStatus::kDown;  // kDown = outage, kUp = recovery
};

/// Everything one simulation run needs.
struct Scenario {
  std::string name;
  Cluster cluster;
  NamespaceTable namespaces;
  WorkloadTrace trace;
  std::optional<GeneratorParams> generator;
  std::uint64_t seed = 0;
  PolicyConfig policy;
  std::vector<FaultEvent> faults;  // sorted by time
  std::vector<StorageObject> objects;
  Seconds horizon = 0;
  Seconds metrics_interval = 3600;
};

/// Parses and validates a scenario document. Relative trace_file paths are
/// resolved against `base_dir`. Throws ValidationError with every problem
/// found, each anchored to a JSON pointer and source line.
Scenario load_scenario(std::string_view text, const std::filesystem::path &base_dir = {});

/// Reads and loads a scenario file; unreadable files raise ValidationError
/// with code "io-error".
Scenario load_scenario_file(const std::filesystem::path &path);

/// Regenerates a synthetic trace with a new seed. Returns false (and leaves
/// the scenario unchanged) when the workload is an explicit trace. Throws
/// ValidationError if a generated pod is rejected by the inventory.
bool reseed(Scenario &scenario, std::uint64_t seed);

/// Trace file contents: a JSON array of pods.
WorkloadTrace load_trace(std::string_view text);

}  // namespace stretchsim
