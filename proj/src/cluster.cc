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
#include "stretchsim/cluster.h"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <stdexcept>
#include <unordered_set>

#include "json_fields.h"

namespace stretchsim {

using detail::child;
using detail::FieldReader;
using nlohmann::json;

std::string_view to_string(LocationStatus s) { return s == LocationStatus::kUp ? "up" : "down"; }

std::string_view to_string(NodeLifecycle l) {
  switch (l) {
    case NodeLifecycle::kHardwareManaged:
      return "hardware-managed";
    case NodeLifecycle::kOsManaged:
      return "os-managed";
    case NodeLifecycle::kPeered:
      return "peered";
  }
  return "os-managed";
}

std::int64_t Node::gpu_capacity(std::string_view model) const {
  for (const auto &slot : gpus) {
    if (slot.model == model) return slot.count;
  }
  return 0;
}

std::int64_t Node::gpu_total() const {
  std::int64_t total = 0;
  for (const auto &slot : gpus) total += slot.count;
  return total;
}

std::int64_t NodeAllocation::gpu(std::string_view model) const {
  auto it = gpus.find(std::string(model));
  return it == gpus.end() ? 0 : it->second;
}

std::int64_t NodeAllocation::gpu_total() const {
  std::int64_t total = 0;
  for (const auto &[model, count] : gpus) total += count;
  return total;
}

std::vector<Diagnostic> check_inventory(const std::vector<Region> &regions,
                                        const std::vector<Location> &locations,
                                        const std::vector<GpuModel> &models,
                                        const std::vector<Node> &nodes) {
  std::vector<Diagnostic> out;
  auto report = [&out](std::string code, std::string pointer, std::string message) {
    out.push_back(Diagnostic{std::move(code), std::move(pointer), 0, std::move(message)});
  };

  if (regions.empty()) {
    report("missing-field", "/regions", "at least one region is required");
  }
  std::unordered_set<std::string> region_ids;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (regions[i].id.empty()) {
      report("invalid-field", fmt::format("/regions/{}/id", i), "region id must be non-empty");
    } else if (!region_ids.insert(regions[i].id).second) {
      report("duplicate-id", fmt::format("/regions/{}/id", i),
             fmt::format("duplicate region id '{}'", regions[i].id));
    }
  }

  std::unordered_set<std::string> location_ids;
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const auto &loc = locations[i];
    if (loc.id.empty()) {
      report("invalid-field", fmt::format("/locations/{}/id", i), "location id must be non-empty");
    } else if (!location_ids.insert(loc.id).second) {
      report("duplicate-id", fmt::format("/locations/{}/id", i),
             fmt::format("duplicate location id '{}'", loc.id));
    }
    if (!region_ids.contains(loc.region)) {
      report("unknown-reference", fmt::format("/locations/{}/region", i),
             fmt::format("location '{}' references unknown region '{}'", loc.id, loc.region));
    }
  }

  std::unordered_set<std::string> model_ids;
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (models[i].id.empty()) {
      report("invalid-field", fmt::format("/gpu_models/{}/id", i), "model id must be non-empty");
    } else if (!model_ids.insert(models[i].id).second) {
      report("duplicate-id", fmt::format("/gpu_models/{}/id", i),
             fmt::format("duplicate GPU model id '{}'", models[i].id));
    }
  }

  std::unordered_set<std::string> node_ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto &node = nodes[i];
    if (node.id.empty()) {
      report("invalid-field", fmt::format("/nodes/{}/id", i), "node id must be non-empty");
    } else if (!node_ids.insert(node.id).second) {
      report("duplicate-id", fmt::format("/nodes/{}/id", i),
             fmt::format("duplicate node id '{}'", node.id));
    }
    if (!location_ids.contains(node.location)) {
      report("unknown-reference", fmt::format("/nodes/{}/location", i),
             fmt::format("node '{}' references unknown location '{}'", node.id, node.location));
    }
    if (node.cpu_capacity <= 0) {
      report("nonpositive-capacity", fmt::format("/nodes/{}/cpu_capacity", i),
             fmt::format("node '{}' cpu_capacity must be positive", node.id));
    }
    if (node.mem_capacity <= 0) {
      report("nonpositive-capacity", fmt::format("/nodes/{}/mem_capacity", i),
             fmt::format("node '{}' mem_capacity must be positive", node.id));
    }
    std::set<std::string> seen_models;
    for (std::size_t g = 0; g < node.gpus.size(); ++g) {
      const auto &slot = node.gpus[g];
      if (slot.count < 1) {
        report("nonpositive-capacity", fmt::format("/nodes/{}/gpus/{}/count", i, g),
               fmt::format("node '{}' GPU count must be at least 1", node.id));
      }
      if (!model_ids.contains(slot.model)) {
        report("unknown-reference", fmt::format("/nodes/{}/gpus/{}/model", i, g),
               fmt::format("node '{}' references unknown GPU model '{}'", node.id, slot.model));
      }
      if (!seen_models.insert(slot.model).second) {
        report("duplicate-id", fmt::format("/nodes/{}/gpus/{}/model", i, g),
               fmt::format("node '{}' lists GPU model '{}' twice", node.id, slot.model));
      }
    }
  }
  return out;
}

Cluster::Cluster(std::vector<Region> regions, std::vector<Location> locations,
                 std::vector<GpuModel> models, std::vector<Node> nodes)
    : regions_(std::move(regions)),
      locations_(std::move(locations)),
      models_(std::move(models)),
      nodes_(std::move(nodes)) {
  if (auto problems = check_inventory(regions_, locations_, models_, nodes_); !problems.empty()) {
    throw ValidationError(std::move(problems));
  }
  for (std::size_t i = 0; i < locations_.size(); ++i) location_index_[locations_[i].id] = i;
  for (std::size_t i = 0; i < models_.size(); ++i) model_index_[models_[i].id] = i;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    node_index_[nodes_[i].id] = i;
    node_location_.push_back(location_index_.at(nodes_[i].location));
  }
  allocations_.resize(nodes_.size());
}

std::optional<std::size_t> Cluster::find_node(std::string_view id) const {
  auto it = node_index_.find(std::string(id));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

const Location *Cluster::find_location(std::string_view id) const {
  auto it = location_index_.find(std::string(id));
  return it == location_index_.end() ? nullptr : &locations_[it->second];
}

const GpuModel *Cluster::find_model(std::string_view id) const {
  auto it = model_index_.find(std::string(id));
  return it == model_index_.end() ? nullptr : &models_[it->second];
}

bool Cluster::has_region(std::string_view id) const {
  return std::any_of(regions_.begin(), regions_.end(),
                     [&](const Region &r) { return r.id == id; });
}

bool Cluster::is_reserved(std::string_view model) const {
  const GpuModel *m = find_model(model);
  return m != nullptr && m->reserved;
}

const Location &Cluster::location_of(std::size_t node_index) const {
  return locations_[node_location_.at(node_index)];
}

const std::string &Cluster::region_of(std::size_t node_index) const {
  return location_of(node_index).region;
}

bool Cluster::node_up(std::size_t node_index) const {
  return location_of(node_index).status == LocationStatus::kUp;
}

ResourceTotals Cluster::capacity(std::optional<std::string_view> region) const {
  if (region && !has_region(*region)) {
    throw std::invalid_argument(fmt::format("unknown region '{}'", *region));
  }
  ResourceTotals totals;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_up(i) || (region && region_of(i) != *region)) continue;
    const Node &n = nodes_[i];
    totals.cpu_millicores += n.cpu_capacity;
    totals.mem_bytes += n.mem_capacity;
    for (const auto &slot : n.gpus) totals.gpus[slot.model] += slot.count;
  }
  return totals;
}

ResourceTotals Cluster::free(std::size_t node_index) const {
  const Node &n = nodes_.at(node_index);
  const NodeAllocation &a = allocations_.at(node_index);
  ResourceTotals totals;
  totals.cpu_millicores = n.cpu_capacity - a.cpu;
  totals.mem_bytes = n.mem_capacity - a.mem;
  for (const auto &slot : n.gpus) totals.gpus[slot.model] = slot.count - a.gpu(slot.model);
  return totals;
}

bool Cluster::set_location_status(std::string_view location, LocationStatus status) {
  auto it = location_index_.find(std::string(location));
  if (it == location_index_.end()) {
    throw std::invalid_argument(fmt::format("unknown location '{}'", location));
  }
  Location &loc = locations_[it->second];
  if (loc.status == status) return false;
  loc.status = status;
  return true;
}

std::vector<std::size_t> Cluster::nodes_at(std::string_view location) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].location == location) out.push_back(i);
  }
  return out;
}

bool Cluster::fits(std::size_t node_index, const ResourceRequest &request) const {
  const Node &n = nodes_.at(node_index);
  const NodeAllocation &a = allocations_.at(node_index);
  if (a.cpu + request.cpu_millicores > n.cpu_capacity) return false;
  if (a.mem + request.mem_bytes > n.mem_capacity) return false;
  if (request.gpu_count > 0 &&
      a.gpu(request.gpu_model) + request.gpu_count > n.gpu_capacity(request.gpu_model)) {
    return false;
  }
  return true;
}

void Cluster::allocate(std::size_t node_index, const ResourceRequest &request) {
  if (request.cpu_millicores < 0 || request.mem_bytes < 0 || request.gpu_count < 0) {
    throw std::logic_error("negative resource request");
  }
  if (!fits(node_index, request)) {
    throw std::logic_error(
        fmt::format("allocation would overcommit node '{}'", nodes_.at(node_index).id));
  }
  NodeAllocation &a = allocations_[node_index];
  a.cpu += request.cpu_millicores;
  a.mem += request.mem_bytes;
  if (request.gpu_count > 0) a.gpus[request.gpu_model] += request.gpu_count;
}

void Cluster::release(std::size_t node_index, const ResourceRequest &request) {
  NodeAllocation &a = allocations_.at(node_index);
  if (a.cpu < request.cpu_millicores || a.mem < request.mem_bytes ||
      (request.gpu_count > 0 && a.gpu(request.gpu_model) < request.gpu_count)) {
    throw std::logic_error(
        fmt::format("release exceeds allocation on node '{}'", nodes_[node_index].id));
  }
  a.cpu -= request.cpu_millicores;
  a.mem -= request.mem_bytes;
  if (request.gpu_count > 0) {
    auto it = a.gpus.find(request.gpu_model);
    it->second -= request.gpu_count;
    if (it->second == 0) a.gpus.erase(it);
  }
}

std::int64_t Cluster::max_gpus_per_node() const {
  std::int64_t best = 0;
  for (const auto &n : nodes_) {
    for (const auto &slot : n.gpus) best = std::max(best, slot.count);
  }
  return best;
}

namespace {

std::optional<NodeLifecycle> parse_lifecycle(std::string_view s) {
  if (s == "hardware-managed") return NodeLifecycle::kHardwareManaged;
  if (s == "os-managed") return NodeLifecycle::kOsManaged;
  if (s == "peered") return NodeLifecycle::kPeered;
  return std::nullopt;
}

}  // namespace

Cluster inventory_from_json(const json &doc, const SourceMap *map, const std::string &base) {
  FieldReader reader(map, base);
  if (!reader.expect_object(doc, "")) throw ValidationError(reader.take());

  std::vector<Region> regions;
  if (const json *arr = reader.array(doc, "regions", "", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string p = child("/regions", i);
      if (!reader.expect_object((*arr)[i], p)) continue;
      if (auto id = reader.string((*arr)[i], "id", p)) regions.push_back(Region{*id});
    }
  }

  std::vector<Location> locations;
  if (const json *arr = reader.array(doc, "locations", "", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string p = child("/locations", i);
      const json &item = (*arr)[i];
      if (!reader.expect_object(item, p)) continue;
      Location loc;
      auto id = reader.string(item, "id", p);
      auto region = reader.string(item, "region", p);
      auto status = reader.string(item, "status", p, false);
      if (status && *status != "up" && *status != "down") {
        reader.error("invalid-field", child(p, "status"), "status must be 'up' or 'down'");
      }
      if (!id || !region) continue;
      loc.id = *id;
      loc.region = *region;
      loc.status = (status && *status == "down") ? LocationStatus::kDown : LocationStatus::kUp;
      locations.push_back(std::move(loc));
    }
  }

  std::vector<GpuModel> models;
  const json *model_arr = reader.array(doc, "gpu_models", "", false);
  if (model_arr) {
    for (std::size_t i = 0; i < model_arr->size(); ++i) {
      const std::string p = child("/gpu_models", i);
      const json &item = (*model_arr)[i];
      if (!reader.expect_object(item, p)) continue;
      auto id = reader.string(item, "id", p);
      auto reserved = reader.boolean(item, "reserved", p, false);
      if (id) models.push_back(GpuModel{*id, reserved.value_or(false)});
    }
  }

  std::vector<Node> nodes;
  if (const json *arr = reader.array(doc, "nodes", "", true)) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      const std::string p = child("/nodes", i);
      const json &item = (*arr)[i];
      if (!reader.expect_object(item, p)) continue;
      Node node;
      auto id = reader.string(item, "id", p);
      auto location = reader.string(item, "location", p);
      auto cpu = reader.integer(item, "cpu_capacity", p);
      auto mem = reader.integer(item, "mem_capacity", p);
      auto lifecycle = reader.string(item, "lifecycle", p, false);
      bool good = id && location && cpu && mem;
      if (lifecycle) {
        if (auto parsed = parse_lifecycle(*lifecycle)) {
          node.lifecycle = *parsed;
        } else {
          reader.error("invalid-field", child(p, "lifecycle"),
                       "lifecycle must be hardware-managed, os-managed or peered");
        }
      }
      if (const json *gpus = reader.array(item, "gpus", p, false)) {
        for (std::size_t g = 0; g < gpus->size(); ++g) {
          const std::string gp = child(child(p, "gpus"), g);
          if (!reader.expect_object((*gpus)[g], gp)) {
            good = false;
            continue;
          }
          auto model = reader.string((*gpus)[g], "model", gp);
          auto count = reader.integer((*gpus)[g], "count", gp);
          if (model && count) {
            node.gpus.push_back(GpuSlot{*model, *count});
          } else {
            good = false;
          }
        }
      }
      if (!good) continue;
      node.id = *id;
      node.location = *location;
      node.cpu_capacity = *cpu;
      node.mem_capacity = *mem;
      nodes.push_back(std::move(node));
    }
  }

  // Without an explicit model table, every model named by a node is an
  // ordinary (unreserved) model.
  if (!model_arr) {
    std::set<std::string> implied;
    for (const auto &n : nodes) {
      for (const auto &slot : n.gpus) implied.insert(slot.model);
    }
    for (const auto &m : implied) models.push_back(GpuModel{m, false});
  }

  if (!reader.ok()) throw ValidationError(reader.take());
  reader.merge(check_inventory(regions, locations, models, nodes));
  if (!reader.ok()) throw ValidationError(reader.take());
  return Cluster(std::move(regions), std::move(locations), std::move(models), std::move(nodes));
}

Cluster load_inventory(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error &e) {
    throw ValidationError({Diagnostic{"parse-error", "", line_at_offset(text, e.byte), e.what()}});
  }
  SourceMap map = SourceMap::build(text);
  return inventory_from_json(doc, &map, "");
}

json inventory_to_json(const Cluster &cluster) {
  json doc;
  doc["regions"] = json::array();
  for (const auto &r : cluster.regions()) doc["regions"].push_back({{"id", r.id}});
  doc["locations"] = json::array();
  for (const auto &l : cluster.locations()) {
    doc["locations"].push_back(
        {{"id", l.id}, {"region", l.region}, {"status", std::string(to_string(l.status))}});
  }
  doc["gpu_models"] = json::array();
  for (const auto &m : cluster.gpu_models()) {
    doc["gpu_models"].push_back({{"id", m.id}, {"reserved", m.reserved}});
  }
  doc["nodes"] = json::array();
  for (const auto &n : cluster.nodes()) {
    json gpus = json::array();
    for (const auto &slot : n.gpus) gpus.push_back({{"model", slot.model}, {"count", slot.count}});
    doc["nodes"].push_back({{"id", n.id},
                            {"location", n.location},
                            {"cpu_capacity", n.cpu_capacity},
                            {"mem_capacity", n.mem_capacity},
                            {"gpus", gpus},
                            {"lifecycle", std::string(to_string(n.lifecycle))}});
  }
  return doc;
}

}  // namespace stretchsim
