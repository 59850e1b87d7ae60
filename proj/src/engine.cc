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

#include "stretchsim/engine.h"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace stretchsim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kPodCompletion:
      return "pod-completion";
    case EventKind::kLocationRecovery:
      return "location-recovery";
    case EventKind::kPodArrival:
      return "pod-arrival";
    case EventKind::kLocationOutage:
      return "location-outage";
    case EventKind::kSchedulingTick:
      return "scheduling-tick";
  }
  return "scheduling-tick";
}

std::string_view to_string(PodState state) {
  switch (state) {
    case PodState::kPending:
      return "pending";
    case PodState::kRunning:
      return "running";
    case PodState::kCompleted:
      return "completed";
    case PodState::kFailed:
      return "failed";
  }
  return "pending";
}

PodCounts SimState::counts() const {
  PodCounts c;
  for (const auto &[id, s] : pod_states) {
    ++c.arrived;
    switch (s) {
      case PodState::kPending:
        ++c.pending;
        break;
      case PodState::kRunning:
        ++c.running;
        break;
      case PodState::kCompleted:
        ++c.completed;
        break;
      case PodState::kFailed:
        ++c.failed;
        break;
    }
  }
  return c;
}

std::vector<std::string> audit_state(const SimState &state) {
  std::vector<std::string> problems;
  const Cluster &cluster = state.cluster.cluster;
  std::vector<NodeAllocation> expected(cluster.nodes().size());
  for (const auto &[id, pod] : state.cluster.running) {
    NodeAllocation &a = expected.at(pod.node);
    a.cpu += pod.spec.cpu;
    a.mem += pod.spec.mem;
    if (pod.spec.gpu_count > 0) a.gpus[pod.model] += pod.spec.gpu_count;
    auto st = state.pod_states.find(id);
    if (st == state.pod_states.end() || st->second != PodState::kRunning) {
      problems.push_back(fmt::format("pod {} is bound but not marked running", id));
    }
    if (!cluster.node_up(pod.node)) {
      problems.push_back(fmt::format("pod {} runs on a down node", id));
    }
    auto rec = state.open_records.find(id);
    std::size_t want = (pod.spec.gpu_count > 0 ? 1u : 0u) + (pod.spec.cpu > 0 ? 1u : 0u);
    if ((rec == state.open_records.end() ? 0u : rec->second.size()) != want) {
      problems.push_back(fmt::format("pod {} has wrong number of open usage records", id));
    }
  }
  for (std::size_t i = 0; i < cluster.nodes().size(); ++i) {
    const Node &n = cluster.node(i);
    const NodeAllocation &actual = cluster.allocation(i);
    if (actual.cpu != expected[i].cpu || actual.mem != expected[i].mem) {
      problems.push_back(fmt::format("node {} cpu/mem allocation does not match running pods", n.id));
    }
    for (const auto &slot : n.gpus) {
      if (actual.gpu(slot.model) != expected[i].gpu(slot.model)) {
        problems.push_back(fmt::format("node {} {} allocation does not match", n.id, slot.model));
      }
      if (actual.gpu(slot.model) > slot.count) {
        problems.push_back(fmt::format("node {} {} overcommitted", n.id, slot.model));
      }
    }
    if (actual.cpu > n.cpu_capacity || actual.mem > n.mem_capacity) {
      problems.push_back(fmt::format("node {} overcommitted", n.id));
    }
  }
  for (const auto &pod : state.queue) {
    auto st = state.pod_states.find(pod.id);
    if (st == state.pod_states.end() ||
        (st->second != PodState::kPending && st->second != PodState::kFailed)) {
      problems.push_back(fmt::format("queued pod {} is not pending", pod.id));
    }
  }
  std::int64_t waiting = 0;
  for (const auto &[id, s] : state.pod_states) {
    if (s == PodState::kPending || s == PodState::kFailed) ++waiting;
  }
  if (waiting != static_cast<std::int64_t>(state.queue.size())) {
    problems.push_back("queue length does not match pending + failed pods");
  }
  return problems;
}

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario)) {
  check_policy(scenario_.policy);
  if (scenario_.horizon <= 0) throw std::invalid_argument("horizon must be positive");
  if (scenario_.metrics_interval <= 0) throw std::invalid_argument("metrics interval must be positive");
  state_.cluster.cluster = scenario_.cluster;
  for (std::size_t i = 0; i < scenario_.trace.pods.size(); ++i) {
    const PodSpec &pod = scenario_.trace.pods[i];
    if (!pod_index_.emplace(pod.id, i).second) {
      throw std::invalid_argument(fmt::format("duplicate pod id '{}'", pod.id));
    }
    if (pod.arrival <= scenario_.horizon) {
      schedule(Event{pod.arrival, EventKind::kPodArrival, pod.id, 0});
    }
  }
  for (const auto &fault : scenario_.faults) {
    if (fault.time > scenario_.horizon) continue;
    schedule(Event{fault.time,
                   fault.status == LocationStatus::kDown ? EventKind::kLocationOutage
                                                         : EventKind::kLocationRecovery,
                   fault.location, 0});
  }
  state_.capacity.record(0, state_.cluster.cluster.capacity());
  for (const auto &object : scenario_.objects) {
    state_.placements.emplace(object.id, place_replicas(object, state_.cluster.cluster));
  }
  audit_storage();
}

void Simulation::schedule(Event event) { events_.insert(std::move(event)); }

void Simulation::schedule_tick() {
  schedule(Event{state_.clock, EventKind::kSchedulingTick, {}, 0});
}

void Simulation::sample_queue_until(Seconds time) {
  while (next_sample_ < time && next_sample_ <= scenario_.horizon) {
    state_.queue_depth.emplace_back(next_sample_, state_.queue.size());
    next_sample_ += scenario_.metrics_interval;
  }
}

void Simulation::step(const Event &event) {
  if (event.time < state_.clock) {
    throw std::invalid_argument(fmt::format("event at {} precedes clock {}", event.time, state_.clock));
  }
  sample_queue_until(event.time);
  state_.clock = event.time;
  state_.ledger.advance(event.time);
  switch (event.kind) {
    case EventKind::kPodArrival:
      on_arrival(event.payload);
      break;
    case EventKind::kPodCompletion:
      on_completion(event.payload, event.attempt);
      break;
    case EventKind::kLocationOutage:
      on_outage(event.payload);
      break;
    case EventKind::kLocationRecovery:
      on_recovery(event.payload);
      break;
    case EventKind::kSchedulingTick:
      on_tick();
      break;
  }
}

bool Simulation::advance() {
  if (events_.empty() || events_.begin()->time > scenario_.horizon) return false;
  Event next = *events_.begin();
  events_.erase(events_.begin());
  step(next);
  return true;
}

void Simulation::run() {
  while (advance()) {
  }
  sample_queue_until(scenario_.horizon + 1);
  state_.clock = std::max(state_.clock, scenario_.horizon);
  state_.ledger.advance(state_.clock);
}

void Simulation::on_arrival(const std::string &pod_id) {
  auto it = pod_index_.find(pod_id);
  if (it == pod_index_.end()) throw std::invalid_argument(fmt::format("unknown pod '{}'", pod_id));
  if (state_.pod_states.contains(pod_id)) {
    throw std::logic_error(fmt::format("pod '{}' arrived twice", pod_id));
  }
  state_.queue.push_back(scenario_.trace.pods[it->second]);
  state_.pod_states[pod_id] = PodState::kPending;
  schedule_tick();
}

void Simulation::start_records(const PodSpec &pod) {
  auto &records = state_.open_records[pod.id];
  if (pod.gpu_count > 0) {
    records.push_back(state_.ledger.open(pod.ns, Resource::kGpu, pod.gpu_count, state_.clock));
  }
  if (pod.cpu > 0) {
    records.push_back(state_.ledger.open(pod.ns, Resource::kCpu, pod.cpu, state_.clock));
  }
}

void Simulation::stop_records(const std::string &pod_id) {
  auto it = state_.open_records.find(pod_id);
  if (it == state_.open_records.end()) return;
  for (std::size_t index : it->second) state_.ledger.close(index, state_.clock);
  state_.open_records.erase(it);
}

void Simulation::on_completion(const std::string &pod_id, std::int64_t attempt) {
  auto st = state_.pod_states.find(pod_id);
  if (st == state_.pod_states.end() || st->second != PodState::kRunning ||
      state_.attempts[pod_id] != attempt) {
    return;  // stale: the run this completion belonged to was interrupted
  }
  state_.cluster.unbind(pod_id);
  stop_records(pod_id);
  st->second = PodState::kCompleted;
  schedule_tick();
}

void Simulation::on_outage(const std::string &location) {
  if (!state_.cluster.cluster.set_location_status(location, LocationStatus::kDown)) return;

  std::vector<std::string> victims;
  for (const auto &[id, pod] : state_.cluster.running) {
    if (state_.cluster.cluster.node(pod.node).location == location) victims.push_back(id);
  }
  std::vector<PodSpec> head;
  for (const auto &id : victims) {
    RunningPod pod = state_.cluster.unbind(id);
    stop_records(id);
    ++state_.attempts[id];
    ++state_.outage_failures;
    state_.pod_states[id] = PodState::kFailed;
    if (pod.spec.guaranteed()) {
      head.push_back(std::move(pod.spec));
    } else {
      state_.queue.push_back(std::move(pod.spec));
    }
  }
  state_.queue.insert(state_.queue.begin(), head.begin(), head.end());

  state_.capacity.record(state_.clock, state_.cluster.cluster.capacity());
  re_replicate(scenario_.objects, state_.placements, state_.cluster.cluster);
  audit_storage();
  schedule_tick();
}

void Simulation::on_recovery(const std::string &location) {
  if (!state_.cluster.cluster.set_location_status(location, LocationStatus::kUp)) return;
  state_.capacity.record(state_.clock, state_.cluster.cluster.capacity());
  re_replicate(scenario_.objects, state_.placements, state_.cluster.cluster);
  audit_storage();
  schedule_tick();
}

void Simulation::audit_storage() {
  if (scenario_.objects.empty()) return;
  state_.unavailable_objects.emplace_back(
      state_.clock,
      count_unavailable(scenario_.objects, state_.placements, state_.cluster.cluster));
}

Resource Simulation::fair_share_resource() const {
  for (const auto &node : scenario_.cluster.nodes()) {
    if (node.gpu_total() > 0) return Resource::kGpu;
  }
  return Resource::kCpu;
}

void Simulation::on_tick() {
  UsageSnapshot usage;
  if (scenario_.policy.ordering == QueueOrdering::kFairShare) {
    usage = decayed_usage(state_.ledger, state_.clock, scenario_.policy.fair_share_halflife,
                          fair_share_resource());
  }
  CycleResult cycle = schedule_cycle(std::move(state_.queue), state_.cluster,
                                     scenario_.namespaces, usage, scenario_.policy, state_.clock);
  state_.queue = std::move(cycle.pending);

  std::set<std::string> placed_now;
  std::set<std::string> evicted;
  for (const auto &d : cycle.decisions) {
    placed_now.insert(d.pod_id);
    evicted.insert(d.preempted_victims.begin(), d.preempted_victims.end());
  }

  for (const auto &d : cycle.decisions) {
    for (const auto &victim : d.preempted_victims) {
      if (!placed_now.contains(victim)) stop_records(victim);
      ++state_.attempts[victim];
      ++state_.preemptions;
      state_.pod_states[victim] = PodState::kPending;
      state_.queue.push_back(scenario_.trace.pods[pod_index_.at(victim)]);
    }
    if (evicted.contains(d.pod_id)) continue;  // placed and evicted within this cycle
    const PodSpec &pod = scenario_.trace.pods[pod_index_.at(d.pod_id)];
    state_.pod_states[d.pod_id] = PodState::kRunning;
    start_records(pod);
    schedule(Event{state_.clock + pod.duration, EventKind::kPodCompletion, pod.id,
                   state_.attempts[pod.id]});
  }
  state_.decisions.insert(state_.decisions.end(), cycle.decisions.begin(), cycle.decisions.end());
}

Metrics Simulation::metrics() const {
  Metrics m;
  m.horizon = scenario_.horizon;
  m.interval = scenario_.metrics_interval;
  const Window whole{0, scenario_.horizon};
  m.gpu_utilization = utilization(state_.ledger, state_.capacity, whole, Resource::kGpu);
  m.cpu_utilization = utilization(state_.ledger, state_.capacity, whole, Resource::kCpu);
  for (Seconds t = 0; t < scenario_.horizon; t += scenario_.metrics_interval) {
    Window w{t, std::min(t + scenario_.metrics_interval, scenario_.horizon)};
    m.utilization_series.emplace_back(t, utilization(state_.ledger, state_.capacity, w));
  }
  m.queue_depth_series = state_.queue_depth;
  m.availability_series = state_.unavailable_objects;
  for (const auto &[t, count] : state_.unavailable_objects) {
    if (count > 0) ++m.availability_incidents;
    m.max_unavailable = std::max(m.max_unavailable, count);
  }
  for (const auto &[id, ns] : scenario_.namespaces) {
    m.namespaces.push_back(NamespaceUsage{id, aggregate(state_.ledger, id, whole, Resource::kGpu),
                                          aggregate(state_.ledger, id, whole, Resource::kCpu)});
  }
  m.total_gpu = aggregate(state_.ledger, std::nullopt, whole, Resource::kGpu);
  m.total_cpu = aggregate(state_.ledger, std::nullopt, whole, Resource::kCpu);
  m.preemptions = state_.preemptions;
  m.outage_failures = state_.outage_failures;
  m.pods = state_.counts();
  return m;
}

RunResult run(const Scenario &scenario) {
  Simulation sim(scenario);
  sim.run();
  return RunResult{sim.state(), sim.metrics()};
}

}  // namespace stretchsim
