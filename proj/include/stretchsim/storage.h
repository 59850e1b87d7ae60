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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stretchsim/cluster.h"

namespace stretchsim {

struct StorageObject {
  std::string id;
  std::string region;
  int replication_factor = 3;
};

/// Locations holding copies of one object. `degraded` is set when fewer
/// than replication_factor distinct up locations hold a copy.
struct ReplicaSet {
  std::string object_id;
  std::vector<std::string> locations;
  bool degraded = false;

  bool operator==(const ReplicaSet &) const = default;
};

using PlacementMap = std::map<std::string, ReplicaSet, std::less<>>;

/// Stable 64-bit rendezvous weight of (object, location).
std::uint64_t rendezvous_weight(std::string_view object_id, std::string_view location_id);

/// Up locations of `region`, highest rendezvous weight first.
std::vector<std::string> rendezvous_order(std::string_view object_id, std::string_view region,
                                          const Cluster &cluster);

/// Top-r up locations of the object's region by rendezvous weight.
/// Throws std::invalid_argument if the region is unknown, has no up
/// location, or replication_factor < 1.
ReplicaSet place_replicas(const StorageObject &object, const Cluster &cluster);

enum class Availability { kAvailable, kUnavailable };

/// Available iff at least one replica location is up.
Availability availability(const StorageObject &object, const ReplicaSet &replicas,
                          const Cluster &cluster);

struct PlacementChange {
  std::string object_id;
  std::string added_location;

  bool operator==(const PlacementChange &) const = default;
};

/// Tops up every object with fewer than r live distinct locations, adding
/// up locations in rendezvous order. Never removes a replica. Updates
/// `placements` and returns what was added.
std::vector<PlacementChange> re_replicate(std::span<const StorageObject> objects,
                                          PlacementMap &placements, const Cluster &cluster);

/// Count of objects with no replica at an up location.
std::size_t count_unavailable(std::span<const StorageObject> objects,
                              const PlacementMap &placements, const Cluster &cluster);

nlohmann::json placements_to_json(const PlacementMap &placements);

}  // namespace stretchsim
