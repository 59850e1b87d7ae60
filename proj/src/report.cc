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

#include "stretchsim/report.h"

#include <fmt/format.h>

#include <fstream>
#include <stdexcept>

namespace stretchsim {

using nlohmann::json;

namespace {

double core_hours(const UsageAmount &cpu) {
  return static_cast<double>(cpu.unit_seconds) / 3.6e6;
}

void write_file(const std::filesystem::path &path, const std::string &contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
  out << contents;
  out.close();
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", path.string()));
}

}  // namespace

std::string utilization_csv(const Metrics &metrics) {
  std::string out = "time,utilization\n";
  for (const auto &[t, u] : metrics.utilization_series) out += fmt::format("{},{:.6f}\n", t, u);
  return out;
}

std::string namespaces_csv(const Metrics &metrics) {
  std::string out = "namespace,gpu_hours,cpu_hours\n";
  for (const auto &ns : metrics.namespaces) {
    out += fmt::format("{},{:.6f},{:.6f}\n", ns.ns, ns.gpu.hours(), core_hours(ns.cpu));
  }
  return out;
}

std::string queue_depth_csv(const Metrics &metrics) {
  std::string out = "time,queue_depth\n";
  for (const auto &[t, d] : metrics.queue_depth_series) out += fmt::format("{},{}\n", t, d);
  return out;
}

std::string availability_csv(const Metrics &metrics) {
  std::string out = "time,unavailable_objects\n";
  for (const auto &[t, n] : metrics.availability_series) out += fmt::format("{},{}\n", t, n);
  return out;
}

json final_state_json(const Scenario &scenario, const SimState &state, const Metrics &metrics) {
  json j;
  j["scenario"] = scenario.name;
  j["seed"] = scenario.seed;
  j["policy"] = describe(scenario.policy);
  j["clock"] = state.clock;
  j["pods"] = {{"arrived", metrics.pods.arrived},   {"completed", metrics.pods.completed},
               {"running", metrics.pods.running},   {"pending", metrics.pods.pending},
               {"failed", metrics.pods.failed}};

  json running = json::array();
  for (const auto &[id, pod] : state.cluster.running) {
    running.push_back({{"pod", id},
                       {"namespace", pod.spec.ns},
                       {"node", state.cluster.cluster.node(pod.node).id},
                       {"model", pod.model.empty() ? json(nullptr) : json(pod.model)},
                       {"start", pod.start}});
  }
  j["running"] = std::move(running);

  json queue = json::array();
  for (const auto &pod : state.queue) {
    queue.push_back({{"pod", pod.id}, {"state", to_string(state.pod_states.at(pod.id))}});
  }
  j["queue"] = std::move(queue);

  json locations = json::array();
  for (const auto &loc : state.cluster.cluster.locations()) {
    locations.push_back({{"id", loc.id}, {"region", loc.region}, {"status", to_string(loc.status)}});
  }
  j["locations"] = std::move(locations);

  json nodes = json::array();
  const Cluster &cluster = state.cluster.cluster;
  for (std::size_t i = 0; i < cluster.nodes().size(); ++i) {
    const NodeAllocation &a = cluster.allocation(i);
    json gpus = json::object();
    for (const auto &slot : cluster.node(i).gpus) gpus[slot.model] = a.gpu(slot.model);
    nodes.push_back({{"id", cluster.node(i).id},
                     {"cpu_allocated", a.cpu},
                     {"mem_allocated", a.mem},
                     {"gpus_allocated", std::move(gpus)}});
  }
  j["nodes"] = std::move(nodes);

  j["preemptions"] = metrics.preemptions;
  j["outage_failures"] = metrics.outage_failures;
  j["placements"] = placements_to_json(state.placements);
  return j;
}

std::string summary_text(const Scenario &scenario, const Metrics &metrics) {
  std::string out;
  out += fmt::format("scenario: {}\n", scenario.name);
  out += fmt::format("policy: {}\n", describe(scenario.policy));
  out += fmt::format("seed: {}\n", scenario.seed);
  out += fmt::format("horizon: {} s\n\n", metrics.horizon);
  out += fmt::format("gpu utilization: {:.6f}\n", metrics.gpu_utilization);
  out += fmt::format("cpu utilization: {:.6f}\n", metrics.cpu_utilization);
  out += fmt::format("gpu-hours served: {:.6f}\n", metrics.total_gpu.hours());
  out += fmt::format("cpu core-hours served: {:.6f}\n\n", core_hours(metrics.total_cpu));
  out += "gpu-hours by namespace:\n";
  for (const auto &ns : metrics.namespaces) {
    out += fmt::format("  {:<24} {:>14.6f}\n", ns.ns, ns.gpu.hours());
  }
  out += fmt::format("\npods: arrived {} completed {} running {} pending {} failed {}\n",
                     metrics.pods.arrived, metrics.pods.completed, metrics.pods.running,
                     metrics.pods.pending, metrics.pods.failed);
  out += fmt::format("preemptions: {}\n", metrics.preemptions);
  out += fmt::format("outage failures: {}\n", metrics.outage_failures);
  out += fmt::format("availability incidents: {}\n", metrics.availability_incidents);
  out += fmt::format("max unavailable objects: {}\n", metrics.max_unavailable);
  return out;
}

void write_report(const std::filesystem::path &dir, const Scenario &scenario,
                  const RunResult &result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error(fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  const Metrics &m = result.metrics;
  write_file(dir / "utilization.csv", utilization_csv(m));
  write_file(dir / "namespaces.csv", namespaces_csv(m));
  write_file(dir / "queue_depth.csv", queue_depth_csv(m));
  write_file(dir / "availability.csv", availability_csv(m));
  write_file(dir / "ledger.csv", ledger_to_csv(result.state.ledger));
  write_file(dir / "final_state.json", final_state_json(scenario, result.state, m).dump(2) + "\n");
  write_file(dir / "summary.txt", summary_text(scenario, m));
}

}  // namespace stretchsim
