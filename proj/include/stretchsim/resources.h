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
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace stretchsim {

/// Simulation time and durations, in whole seconds.
using Seconds = std::int64_t;

enum class Resource { kGpu, kCpu };

std::string_view to_string(Resource r);
std::optional<Resource> parse_resource(std::string_view s);

/// CPU in millicores, memory in bytes, GPUs counted per model.
struct ResourceTotals {
  std::int64_t cpu_millicores = 0;
  std::int64_t mem_bytes = 0;
  std::map<std::string, std::int64_t> gpus;

  std::int64_t gpu_total() const;
  std::int64_t gpu_count(std::string_view model) const;

  /// Amount of `r` in accounting units (GPU count or millicores).
  std::int64_t amount(Resource r) const { return r == Resource::kGpu ? gpu_total() : cpu_millicores; }

  ResourceTotals &operator+=(const ResourceTotals &other);
  bool operator==(const ResourceTotals &) const = default;
};

/// What a single pod takes from the node it is bound to.
struct ResourceRequest {
  std::int64_t cpu_millicores = 0;
  std::int64_t mem_bytes = 0;
  std::int64_t gpu_count = 0;
  std::string gpu_model;  // empty iff gpu_count == 0
};

}  // namespace stretchsim
