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
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stretchsim/diagnostics.h"
#include "stretchsim/resources.h"

namespace stretchsim {

enum class LocationStatus { kUp, kDown };

/// Administrative integration level of a node. Carried as metadata only.
enum class NodeLifecycle { kHardwareManaged, kOsManaged, kPeered };

std::string_view to_string(LocationStatus s);
std::string_view to_string(NodeLifecycle l);

struct Region {
  std::string id;
};

/// A physical site; the failure domain for outages and replica spread.
struct Location {
  std::string id;
  std::string region;
  LocationStatus status = LocationStatus::kUp;
};

struct GpuModel {
  std::string id;
  bool reserved = false;  // subject to grant gating when reservations are on
};

struct GpuSlot {
  std::string model;
  std::int64_t count = 0;
};

struct Node {
  std::string id;
  std::string location;
  std::int64_t cpu_capacity = 0;  // millicores
  std::int64_t mem_capacity = 0;  // bytes
  std::vector<GpuSlot> gpus;
  NodeLifecycle lifecycle = NodeLifecycle::kOsManaged;

  std::int64_t gpu_capacity(std::string_view model) const;
  std::int64_t gpu_total() const;
};

/// What is currently bound on a node.
struct NodeAllocation {
  std::int64_t cpu = 0;
  std::int64_t mem = 0;
  std::unordered_map<std::string, std::int64_t> gpus;

  std::int64_t gpu(std::string_view model) const;
  std::int64_t gpu_total() const;
};

/// Structural checks on an inventory; pointers are relative to the
/// inventory document root ("/nodes/3/id").
std::vector<Diagnostic> check_inventory(const std::vector<Region> &regions,
                                        const std::vector<Location> &locations,
                                        const std::vector<GpuModel> &models,
                                        const std::vector<Node> &nodes);

/// Regions, locations and nodes plus the per-node allocation ledger.
///
/// Allocation never exceeds capacity on any node: allocate() throws
/// std::logic_error instead of overcommitting.
class Cluster {
 public:
  Cluster() = default;

  /// Throws ValidationError when the parts violate any inventory invariant.
  Cluster(std::vector<Region> regions, std::vector<Location> locations,
          std::vector<GpuModel> models, std::vector<Node> nodes);

  const std::vector<Region> &regions() const { return regions_; }
  const std::vector<Location> &locations() const { return locations_; }
  const std::vector<GpuModel> &gpu_models() const { return models_; }
  const std::vector<Node> &nodes() const { return nodes_; }

  const Node &node(std::size_t index) const { return nodes_.at(index); }
  const NodeAllocation &allocation(std::size_t index) const { return allocations_.at(index); }

  std::optional<std::size_t> find_node(std::string_view id) const;
  const Location *find_location(std::string_view id) const;
  const GpuModel *find_model(std::string_view id) const;
  bool has_region(std::string_view id) const;
  bool is_reserved(std::string_view model) const;

  const Location &location_of(std::size_t node_index) const;
  const std::string &region_of(std::size_t node_index) const;
  bool node_up(std::size_t node_index) const;

  /// Totals over nodes at up locations, optionally restricted to a region.
  /// Throws std::invalid_argument for an unknown region.
  ResourceTotals capacity(std::optional<std::string_view> region = std::nullopt) const;

  /// Unallocated resources on one node (independent of location status).
  ResourceTotals free(std::size_t node_index) const;

  /// Returns true when the status actually changed. Throws
  /// std::invalid_argument for an unknown location.
  bool set_location_status(std::string_view location, LocationStatus status);

  /// Node indices at `location`, in inventory order.
  std::vector<std::size_t> nodes_at(std::string_view location) const;

  bool fits(std::size_t node_index, const ResourceRequest &request) const;
  void allocate(std::size_t node_index, const ResourceRequest &request);
  void release(std::size_t node_index, const ResourceRequest &request);

  /// Largest per-node count of any single GPU model.
  std::int64_t max_gpus_per_node() const;

 private:
  std::vector<Region> regions_;
  std::vector<Location> locations_;
  std::vector<GpuModel> models_;
  std::vector<Node> nodes_;
  std::vector<NodeAllocation> allocations_;
  std::unordered_map<std::string, std::size_t> node_index_;
  std::unordered_map<std::string, std::size_t> location_index_;
  std::unordered_map<std::string, std::size_t> model_index_;
  std::vector<std::size_t> node_location_;
};

/// Parses an inventory document ({"regions", "locations", "gpu_models",
/// "nodes"}). Throws ValidationError listing every problem found.
Cluster load_inventory(std::string_view text);

/// Same, for an already-parsed document embedded at `base` in a larger
/// file whose lines are indexed by `map` (may be null).
Cluster inventory_from_json(const nlohmann::json &doc, const SourceMap *map = nullptr,
                            const std::string &base = "");

nlohmann::json inventory_to_json(const Cluster &cluster);

}  // namespace stretchsim
