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

#include "stretchsim/scenario.h"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "readers.h"

namespace stretchsim {

using detail::child;
using detail::FieldReader;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("io-error", "", fmt::format("cannot read '{}'", path.string()));
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw ValidationError({Diagnostic{"parse-error", "", line_at_offset(text, e.byte), e.what()}});
  }
}

// Reads pods, checking id uniqueness and arrival order.
std::vector<PodSpec> read_pods(FieldReader &reader, const json &arr, const std::string &pointer) {
  std::vector<PodSpec> pods;
  std::set<std::string> ids;
  Seconds last_arrival = 0;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string p = child(pointer, i);
    auto pod = detail::read_pod(reader, arr[i], p);
    if (!pod) continue;
    if (!ids.insert(pod->id).second) {
      reader.error("duplicate-id", child(p, "id"), fmt::format("duplicate pod id '{}'", pod->id));
    }
    if (pod->arrival < last_arrival) {
      reader.error("invalid-trace", child(p, "arrival"),
                   "trace arrivals must be nondecreasing");
    }
    last_arrival = std::max(last_arrival, pod->arrival);
    pods.push_back(std::move(*pod));
  }
  return pods;
}

void check_pods(FieldReader &reader, const std::vector<PodSpec> &pods, const Cluster &cluster,
                const NamespaceTable &namespaces, const std::string &pointer,
                bool per_pod_pointer) {
  for (std::size_t i = 0; i < pods.size(); ++i) {
    if (auto rejection = validate_pod(pods[i], cluster, namespaces)) {
      reader.error(std::string(to_string(*rejection)),
                   per_pod_pointer ? child(pointer, i) : pointer,
                   fmt::format("pod '{}' rejected: {}", pods[i].id, to_string(*rejection)));
    }
  }
}

}  // namespace

WorkloadTrace load_trace(std::string_view text) {
  json doc = parse_document(text);
  SourceMap map = SourceMap::build(text);
  FieldReader reader(&map, "");
  WorkloadTrace trace;
  if (!doc.is_array()) {
    reader.error("invalid-field", "", "a trace file is a JSON array of pods");
  } else {
    trace.pods = read_pods(reader, doc, "");
  }
  if (!reader.ok()) throw ValidationError(reader.take());
  return trace;
}

Scenario load_scenario(std::string_view text, const std::filesystem::path &base_dir) {
  json doc = parse_document(text);
  SourceMap map = SourceMap::build(text);
  FieldReader reader(&map, "");
  if (!reader.expect_object(doc, "")) throw ValidationError(reader.take());

  Scenario scenario;
  if (auto name = reader.string(doc, "name", "", false)) scenario.name = *name;

  // Inventory first: everything else is checked against it.
  std::optional<Cluster> cluster;
  if (const json *inv = reader.member(doc, "inventory", "", true)) {
    try {
      cluster = inventory_from_json(*inv, &map, "/inventory");
    } catch (const ValidationError &e) {
      for (const auto &d : e.diagnostics()) {
        reader.error(d.code, d.pointer, d.message);
      }
    }
  }

  if (auto horizon = reader.integer(doc, "horizon_seconds", "")) {
    if (*horizon <= 0) {
      reader.error("invalid-field", "/horizon_seconds", "horizon_seconds must be positive");
    }
    scenario.horizon = *horizon;
  }
  if (auto interval = reader.integer(doc, "metrics_interval_seconds", "", false)) {
    if (*interval <= 0) {
      reader.error("invalid-field", "/metrics_interval_seconds", "interval must be positive");
    } else {
      scenario.metrics_interval = *interval;
    }
  }

  if (const json *arr = reader.array(doc, "namespaces", "", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string p = child("/namespaces", i);
      auto ns = detail::read_namespace(reader, (*arr)[i], p);
      if (!ns) continue;
      if (cluster) {
        for (const auto &grant : ns->grants) {
          if (!cluster->find_model(grant)) {
            reader.error("unknown-model", child(p, "grants"),
                         fmt::format("grant references unknown GPU model '{}'", grant));
          }
        }
      }
      std::string id = ns->id;
      if (!scenario.namespaces.emplace(id, std::move(*ns)).second) {
        reader.error("duplicate-id", child(p, "id"), fmt::format("duplicate namespace '{}'", id));
      }
    }
  }

  if (const json *policy = reader.member(doc, "policy", "", false)) {
    if (auto p = detail::read_policy(reader, *policy, "/policy")) scenario.policy = *p;
  }

  if (const json *workload = reader.member(doc, "workload", "", true)) {
    const std::string wp = "/workload";
    if (reader.expect_object(*workload, wp)) {
      const int sources = static_cast<int>(workload->contains("trace")) +
                          static_cast<int>(workload->contains("trace_file")) +
                          static_cast<int>(workload->contains("generator"));
      if (sources != 1) {
        reader.error("invalid-field", wp,
                     "workload needs exactly one of 'trace', 'trace_file', 'generator'");
      } else if (const json *trace = reader.array(*workload, "trace", wp, false)) {
        scenario.trace.pods = read_pods(reader, *trace, child(wp, "trace"));
        if (cluster) {
          check_pods(reader, scenario.trace.pods, *cluster, scenario.namespaces,
                     child(wp, "trace"), true);
        }
      } else if (auto file = reader.string(*workload, "trace_file", wp, false)) {
        std::filesystem::path path = base_dir / *file;
        try {
          scenario.trace = load_trace(read_file(path));
          if (cluster) {
            for (const auto &pod : scenario.trace.pods) {
              if (auto rejection = validate_pod(pod, *cluster, scenario.namespaces)) {
                reader.error(std::string(to_string(*rejection)), child(wp, "trace_file"),
                             fmt::format("{}: pod '{}' rejected: {}", path.string(), pod.id,
                                         to_string(*rejection)));
              }
            }
          }
        } catch (const ValidationError &e) {
          for (const auto &d : e.diagnostics()) {
            reader.error(d.code, child(wp, "trace_file"),
                         fmt::format("{}:{}: {} {}", path.string(), d.line, d.pointer, d.message));
          }
        }
      } else if (const json *gen = reader.member(*workload, "generator", wp, false)) {
        const std::string gp = child(wp, "generator");
        auto seed = reader.integer(*workload, "seed", wp, false);
        if (seed && *seed < 0) reader.error("invalid-field", child(wp, "seed"), "seed must be >= 0");
        scenario.seed = static_cast<std::uint64_t>(seed.value_or(0));
        if (auto params = detail::read_generator(reader, *gen, gp)) {
          if (params->namespaces.empty()) {
            for (const auto &[id, ns] : scenario.namespaces) params->namespaces.push_back(id);
          }
          bool refs_ok = true;
          for (const auto &ns : params->namespaces) {
            if (!scenario.namespaces.contains(ns)) {
              refs_ok = false;
              reader.error("unknown-namespace", child(gp, "namespaces"),
                           fmt::format("generator references unknown namespace '{}'", ns));
            }
          }
          if (params->opportunistic_namespace &&
              !scenario.namespaces.contains(*params->opportunistic_namespace)) {
            refs_ok = false;
            reader.error("unknown-namespace", child(gp, "opportunistic_namespace"),
                         fmt::format("unknown namespace '{}'", *params->opportunistic_namespace));
          }
          if (cluster) {
            for (const auto &choice : params->model_choices) {
              for (const auto &m : choice.models) {
                if (!cluster->find_model(m)) {
                  refs_ok = false;
                  reader.error("unknown-model", child(gp, "model_choices"),
                               fmt::format("generator references unknown GPU model '{}'", m));
                }
              }
            }
            for (const auto &r : params->affinity_regions) {
              if (!cluster->has_region(r)) {
                refs_ok = false;
                reader.error("unknown-region", child(gp, "affinity_regions"),
                             fmt::format("generator references unknown region '{}'", r));
              }
            }
          }
          try {
            check_generator_params(*params);
          } catch (const std::invalid_argument &e) {
            refs_ok = false;
            reader.error("invalid-params", gp, e.what());
          }
          if (refs_ok && cluster) {
            scenario.trace = generate_workload(*params, scenario.seed);
            check_pods(reader, scenario.trace.pods, *cluster, scenario.namespaces, gp, false);
          }
          scenario.generator = std::move(*params);
        }
      }
    }
  }

  if (const json *faults = reader.array(doc, "faults", "", false)) {
    for (std::size_t i = 0; i < faults->size(); ++i) {
      const std::string p = child("/faults", i);
      const json &item = (*faults)[i];
      if (!reader.expect_object(item, p)) continue;
      auto time = reader.integer(item, "time", p);
      auto location = reader.string(item, "location", p);
      auto kind = reader.string(item, "kind", p);
      if (time && *time < 0) reader.error("invalid-fault", child(p, "time"), "time must be >= 0");
      if (kind && *kind != "outage" && *kind != "recovery") {
        reader.error("invalid-fault", child(p, "kind"), "kind must be 'outage' or 'recovery'");
      }
      if (location && cluster && !cluster->find_location(*location)) {
        reader.error("unknown-reference", child(p, "location"),
                     fmt::format("fault references unknown location '{}'", *location));
      }
      if (time && location && kind) {
        scenario.faults.push_back(FaultEvent{
            *time, *location, *kind == "outage" ? LocationStatus::kDown : LocationStatus::kUp});
      }
    }
    std::stable_sort(scenario.faults.begin(), scenario.faults.end(),
                     [](const FaultEvent &a, const FaultEvent &b) { return a.time < b.time; });
  }

  if (const json *storage = reader.member(doc, "storage", "", false)) {
    const std::string sp = "/storage";
    if (reader.expect_object(*storage, sp)) {
      int r = 3;
      if (auto v = reader.integer(*storage, "replication_factor", sp, false)) {
        if (*v < 1) {
          reader.error("invalid-storage", child(sp, "replication_factor"),
                       "replication_factor must be >= 1");
        } else {
          r = static_cast<int>(*v);
        }
      }
      std::set<std::string> ids;
      auto add_object = [&](StorageObject object, const std::string &p) {
        if (cluster && !cluster->has_region(object.region)) {
          reader.error("unknown-region", p,
                       fmt::format("object '{}' references unknown region '{}'", object.id,
                                   object.region));
          return;
        }
        if (!ids.insert(object.id).second) {
          reader.error("duplicate-id", p, fmt::format("duplicate object id '{}'", object.id));
          return;
        }
        scenario.objects.push_back(std::move(object));
      };
      if (const json *objects = reader.array(*storage, "objects", sp, false)) {
        for (std::size_t i = 0; i < objects->size(); ++i) {
          const std::string p = child(child(sp, "objects"), i);
          if (!reader.expect_object((*objects)[i], p)) continue;
          auto id = reader.string((*objects)[i], "id", p);
          auto region = reader.string((*objects)[i], "region", p);
          auto rf = reader.integer((*objects)[i], "replication_factor", p, false);
          if (rf && *rf < 1) {
            reader.error("invalid-storage", child(p, "replication_factor"),
                         "replication_factor must be >= 1");
            continue;
          }
          if (id && region) {
            add_object(StorageObject{*id, *region, rf ? static_cast<int>(*rf) : r}, p);
          }
        }
      }
      if (auto per_region = reader.integer(*storage, "objects_per_region", sp, false)) {
        if (*per_region < 0) {
          reader.error("invalid-storage", child(sp, "objects_per_region"), "must be >= 0");
        } else if (cluster) {
          std::vector<std::string> regions;
          if (auto listed = reader.strings(*storage, "regions", sp, false)) {
            regions = *listed;
          } else {
            for (const auto &reg : cluster->regions()) regions.push_back(reg.id);
          }
          for (const auto &region : regions) {
            for (std::int64_t k = 0; k < *per_region; ++k) {
              add_object(StorageObject{fmt::format("obj-{}-{:05d}", region, k), region, r},
                         child(sp, "objects_per_region"));
            }
          }
        }
      }
      if (cluster) {
        std::set<std::string> checked;
        for (const auto &object : scenario.objects) {
          if (!checked.insert(object.region).second) continue;
          if (rendezvous_order(object.id, object.region, *cluster).empty()) {
            reader.error("invalid-storage", sp,
                         fmt::format("region '{}' has no up location for replicas", object.region));
          }
        }
      }
    }
  }

  if (!reader.ok()) throw ValidationError(reader.take());
  scenario.cluster = std::move(*cluster);
  return scenario;
}

Scenario load_scenario_file(const std::filesystem::path &path) {
  std::string text = read_file(path);
  Scenario scenario = load_scenario(text, path.parent_path());
  if (scenario.name.empty()) scenario.name = path.stem().string();
  return scenario;
}

bool reseed(Scenario &scenario, std::uint64_t seed) {
  if (!scenario.generator) return false;
  WorkloadTrace trace = generate_workload(*scenario.generator, seed);
  FieldReader reader(nullptr, "");
  check_pods(reader, trace.pods, scenario.cluster, scenario.namespaces, "/workload/generator",
             false);
  if (!reader.ok()) throw ValidationError(reader.take());
  scenario.trace = std::move(trace);
  scenario.seed = seed;
  return true;
}

}  // namespace stretchsim
