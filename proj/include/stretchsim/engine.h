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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "stretchsim/accounting.h"
#include "stretchsim/scenario.h"
#include "stretchsim/scheduler.h"
#include "stretchsim/storage.h"

namespace stretchsim {

/// Kinds in processing priority order for events at the same instant:
/// capacity freed at time t is visible to arrivals at t, and the scheduling
/// tick sees everything that happened at t.
enum class EventKind : int {
  kPodCompletion = 0,
  kLocationRecovery = 1,
  kPodArrival = 2,
  kLocationOutage = 3,
  kSchedulingTick = 4,
};

std::string_view to_string(EventKind kind);

struct Event {
  Seconds time = 0;
  EventKind kind = EventKind::kSchedulingTick;
  std::string payload;       // pod or location id; empty for ticks
  std::int64_t attempt = 0;  // run attempt a completion belongs to

  auto operator<=>(const Event &) const = default;
};

enum class PodState { kPending, kRunning, kCompleted, kFailed };

std::string_view to_string(PodState state);

/// Pod lifecycle tallies. A pod killed by an outage is `failed` until it
/// is placed again.
struct PodCounts {
  std::int64_t arrived = 0;
  std::int64_t completed = 0;
  std::int64_t running = 0;
  std::int64_t pending = 0;
  std::int64_t failed = 0;

  bool operator==(const PodCounts &) const = default;
};

struct SimState {
  Seconds clock = 0;
  ClusterState cluster;
  std::vector<PodSpec> queue;
  std::map<std::string, PodState, std::less<>> pod_states;
  std::map<std::string, std::int64_t, std::less<>> attempts;
  std::map<std::string, std::vector<std::size_t>, std::less<>> open_records;
  UsageLedger ledger;
  CapacityTimeline capacity;
  PlacementMap placements;
  std::vector<ScheduleDecision> decisions;
  std::int64_t preemptions = 0;
  std::int64_t outage_failures = 0;
  std::vector<std::pair<Seconds, std::size_t>> queue_depth;
  std::vector<std::pair<Seconds, std::size_t>> unavailable_objects;

  PodCounts counts() const;
};

/// Consistency problems in `state`; empty when every invariant holds
/// (allocation matches running pods and stays within capacity, running pods
/// have open usage records, queued pods are pending or failed).
std::vector<std::string> audit_state(const SimState &state);

struct NamespaceUsage {
  std::string ns;
  UsageAmount gpu;
  UsageAmount cpu;
};

struct Metrics {
  Seconds horizon = 0;
  Seconds interval = 0;
  double gpu_utilization = 0.0;
  double cpu_utilization = 0.0;
  std::vector<std::pair<Seconds, double>> utilization_series;  // GPU, per interval
  std::vector<std::pair<Seconds, std::size_t>> queue_depth_series;
  std::vector<std::pair<Seconds, std::size_t>> availability_series;  // unavailable objects
  std::vector<NamespaceUsage> namespaces;
  UsageAmount total_gpu;
  UsageAmount total_cpu;
  std::int64_t preemptions = 0;
  std::int64_t outage_failures = 0;
  std::size_t availability_incidents = 0;  // audits that found an unavailable object
  std::size_t max_unavailable = 0;
  PodCounts pods;
};

/// Deterministic event loop over one scenario.
class Simulation {
 public:
  explicit Simulation(Scenario scenario);

  const Scenario &scenario() const { return scenario_; }
  const SimState &state() const { return state_; }

  /// Applies one event. Throws std::invalid_argument if it is earlier than
  /// the clock.
  void step(const Event &event);

  /// Processes the next pending event at or before the horizon.
  bool advance();

  /// Runs to the horizon and closes the books there.
  void run();

  Metrics metrics() const;

 private:
  void schedule(Event event);
  void schedule_tick();
  void sample_queue_until(Seconds time);
  void on_arrival(const std::string &pod_id);
  void on_completion(const std::string &pod_id, std::int64_t attempt);
  void on_outage(const std::string &location);
  void on_recovery(const std::string &location);
  void on_tick();
  void start_records(const PodSpec &pod);
  void stop_records(const std::string &pod_id);
  void audit_storage();
  Resource fair_share_resource() const;

  Scenario scenario_;
  SimState state_;
  std::unordered_map<std::string, std::size_t> pod_index_;
  std::set<Event> events_;
  Seconds next_sample_ = 0;
};

struct RunResult {
  SimState state;
  Metrics metrics;
};

RunResult run(const Scenario &scenario);

}  // namespace stretchsim
