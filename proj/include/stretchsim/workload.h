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
#include <json.hpp>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "stretchsim/cluster.h"
#include "stretchsim/resources.h"

namespace stretchsim {

/// Concurrent-consumption cap for a namespace's guaranteed pods.
struct Quota {
  std::int64_t cpu_millicores = 0;
  std::int64_t mem_bytes = 0;
  std::int64_t gpus = 0;
};

/// The tenancy unit: a research group's slice of the cluster.
struct Namespace {
  std::string id;
  std::optional<Quota> quota;
  double share_weight = 1.0;
  std::set<std::string> grants;  // reserved models usable by guaranteed pods

  bool holds_grant(std::string_view model) const { return grants.contains(std::string(model)); }
};

using NamespaceTable = std::map<std::string, Namespace, std::less<>>;

enum class Priority { kGuaranteed, kOpportunistic };

std::string_view to_string(Priority p);

struct PodSpec {
  std::string id;
  std::string ns;
  std::int64_t cpu = 0;  // millicores
  std::int64_t mem = 0;  // bytes
  std::int64_t gpu_count = 0;
  std::vector<std::string> acceptable_models;  // preference order; empty = any
  std::optional<std::string> region_affinity;
  Priority priority = Priority::kGuaranteed;
  Seconds duration = 1;
  Seconds arrival = 0;

  bool guaranteed() const { return priority == Priority::kGuaranteed; }
  bool opportunistic() const { return priority == Priority::kOpportunistic; }
  bool accepts(std::string_view model) const;
  ResourceRequest request(std::string_view model) const;

  bool operator==(const PodSpec &) const = default;
};

/// Pods ordered by arrival; arrivals nondecreasing and ids unique.
struct WorkloadTrace {
  std::vector<PodSpec> pods;
  std::optional<std::uint64_t> seed;
};

enum class Rejection { kUnknownNamespace, kUnknownModel, kUnknownRegion, kNeverFits };

std::string_view to_string(Rejection r);

/// Structural admissibility: the namespace, models and region exist and the
/// pod fits on some node of the cluster with nothing else running on it.
/// Location status and reservation gating are not considered.
std::optional<Rejection> validate_pod(const PodSpec &pod, const Cluster &cluster,
                                      const NamespaceTable &namespaces);

struct WeightedGpuCount {
  std::int64_t count = 0;
  double weight = 1.0;
};

struct WeightedModelChoice {
  std::vector<std::string> models;  // empty = any model
  double weight = 1.0;
};

/// Parameters of the synthetic workload generator.
///
/// Inter-arrival times are exponential with `arrival_rate_per_hour`;
/// durations are log-uniform on [min_duration, max_duration].
struct GeneratorParams {
  std::vector<std::string> namespaces;
  std::vector<double> namespace_weights;  // empty = uniform
  std::optional<std::string> opportunistic_namespace;
  double arrival_rate_per_hour = 0.0;
  std::int64_t pod_count = 0;
  Seconds min_duration = 600;
  Seconds max_duration = 6 * 3600;
  double opportunistic_fraction = 0.0;
  std::vector<WeightedGpuCount> gpu_request = {{1, 1.0}};
  std::vector<WeightedModelChoice> model_choices = {{{}, 1.0}};
  std::int64_t cpu_per_gpu = 4000;
  std::int64_t mem_per_gpu = std::int64_t{16} << 30;
  std::int64_t cpu_only_min = 1000;
  std::int64_t cpu_only_max = 8000;
  std::int64_t mem_per_core = std::int64_t{4} << 30;
  std::vector<std::string> affinity_regions;
  double affinity_fraction = 0.0;
};

/// Throws std::invalid_argument naming the first malformed parameter.
void check_generator_params(const GeneratorParams &params);

/// Deterministic for a fixed (params, seed). Rate 0 yields an empty trace.
WorkloadTrace generate_workload(const GeneratorParams &params, std::uint64_t seed);

nlohmann::json pod_to_json(const PodSpec &pod);
nlohmann::json trace_to_json(const WorkloadTrace &trace);

}  // namespace stretchsim
