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

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stretchsim/cluster.h"
#include "stretchsim/workload.h"

namespace stretchsim {

enum class QueueOrdering { kFifo, kFairShare };

/// Scheduling policy flags. The default-constructed value is the plain FIFO
/// baseline with every optional feature off.
struct PolicyConfig {
  QueueOrdering ordering = QueueOrdering::kFifo;
  bool quotas_enabled = false;
  bool reservations_enabled = false;
  // Opportunistic pods are only admitted (and only evictable) with backfill on.
  bool backfill_enabled = false;
  Seconds fair_share_halflife = 24 * 3600;

  bool operator==(const PolicyConfig &) const = default;
};

/// Throws std::invalid_argument when the configuration is inconsistent.
void check_policy(const PolicyConfig &policy);

/// Canonical variant name, e.g. "fair-share+quota+backfill".
std::string describe(const PolicyConfig &policy);

/// Builds a policy from a '+'-joined variant name ("fifo+backfill+reservation").
/// Starts from the baseline and keeps `base`'s half-life. Throws
/// std::invalid_argument on an unknown token.
PolicyConfig parse_variant(std::string_view variant, const PolicyConfig &base = {});

/// Applies one KEY=VALUE override. Throws std::invalid_argument.
void apply_policy_override(PolicyConfig &policy, std::string_view key_value);

struct RunningPod {
  PodSpec spec;
  std::size_t node = 0;
  std::string model;  // empty for GPU-free pods
  Seconds start = 0;

  ResourceRequest request() const { return spec.request(model); }
  Seconds end() const { return start + spec.duration; }
  std::int64_t remaining_gpu_seconds(Seconds now) const;
};

using RunningTable = std::map<std::string, RunningPod, std::less<>>;

/// The cluster together with the pods bound to it. Allocation on every node
/// equals the sum of requests of the running pods bound there.
struct ClusterState {
  Cluster cluster;
  RunningTable running;

  void bind(const PodSpec &pod, std::size_t node, const std::string &model, Seconds start);
  RunningPod unbind(std::string_view pod_id);
};

/// Per-namespace concurrent consumption of guaranteed pods.
std::map<std::string, Quota, std::less<>> guaranteed_consumption(const RunningTable &running);

bool within_quota(const PodSpec &pod, const NamespaceTable &namespaces,
                  const std::map<std::string, Quota, std::less<>> &consumption);

struct Candidate {
  std::size_t node = 0;
  std::string node_id;
  std::optional<std::string> model;

  bool operator==(const Candidate &) const = default;
};

/// GPU models on `node` this pod may be bound to, in preference order,
/// after the reservation gate. Empty for GPU-free pods.
std::vector<std::string> eligible_models(const PodSpec &pod, const Cluster &cluster,
                                         std::size_t node, const NamespaceTable &namespaces,
                                         const PolicyConfig &policy);

/// Nodes that can take the pod right now, with the model it would get.
std::vector<Candidate> filter_nodes(const PodSpec &pod, const Cluster &cluster,
                                    const NamespaceTable &namespaces, const PolicyConfig &policy);

/// Weighted post-placement utilization (cpu 1, mem 1, gpu 2).
double bin_pack_score(const PodSpec &pod, const Cluster &cluster, const Candidate &candidate);

/// Highest score first; equal scores by node id.
std::vector<Candidate> score_nodes(const PodSpec &pod, const Cluster &cluster,
                                   std::vector<Candidate> candidates);

/// Decayed historical usage per namespace.
using UsageSnapshot = std::map<std::string, double, std::less<>>;

/// Ascending by usage / share_weight, then arrival, then pod id.
std::vector<PodSpec> fair_share_order(std::vector<PodSpec> queue, const UsageSnapshot &usage,
                                      const NamespaceTable &namespaces);

struct Preemption {
  std::vector<std::string> victims;  // opportunistic pod ids
  std::optional<std::string> model;
  std::int64_t victim_gpu_seconds = 0;  // remaining work released
};

/// Smallest set of opportunistic pods on `node` whose eviction lets the pod
/// fit; among equal-size sets, the one releasing the fewest remaining
/// GPU-seconds. nullopt when no such set exists or the node is ineligible.
std::optional<Preemption> preempt(const PodSpec &pod, std::size_t node, const ClusterState &state,
                                  const NamespaceTable &namespaces, const PolicyConfig &policy,
                                  Seconds now);

struct ScheduleDecision {
  std::string pod_id;
  std::string node_id;
  std::optional<std::string> assigned_model;
  Seconds start = 0;
  std::vector<std::string> preempted_victims;

  bool operator==(const ScheduleDecision &) const = default;
};

struct CycleResult {
  std::vector<ScheduleDecision> decisions;
  std::vector<PodSpec> pending;  // in the original queue order
};

/// One pass over the queue. Decisions are applied to `state` as they are
/// made; victims are unbound from `state` and reported in the decision.
CycleResult schedule_cycle(std::vector<PodSpec> queue, ClusterState &state,
                           const NamespaceTable &namespaces, const UsageSnapshot &usage,
                           const PolicyConfig &policy, Seconds now);

}  // namespace stretchsim
