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

#include "stretchsim/storage.h"

#include <fmt/format.h>

#include <algorithm>
#include <set>
#include <stdexcept>

namespace stretchsim {

namespace {

// FNV-1a over the bytes, then the splitmix64 finalizer for avalanche.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t rendezvous_weight(std::string_view object_id, std::string_view location_id) {
  std::uint64_t h = fnv1a(object_id);
  h = fnv1a(std::string_view("\x1f", 1), h);
  h = fnv1a(location_id, h);
  return mix(h);
}

std::vector<std::string> rendezvous_order(std::string_view object_id, std::string_view region,
                                          const Cluster &cluster) {
  std::vector<std::pair<std::uint64_t, std::string>> ranked;
  for (const auto &loc : cluster.locations()) {
    if (loc.region != region || loc.status != LocationStatus::kUp) continue;
    ranked.emplace_back(rendezvous_weight(object_id, loc.id), loc.id);
  }
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<std::string> out;
  out.reserve(ranked.size());
  for (auto &[w, id] : ranked) out.push_back(std::move(id));
  return out;
}

ReplicaSet place_replicas(const StorageObject &object, const Cluster &cluster) {
  if (object.replication_factor < 1) {
    throw std::invalid_argument(fmt::format("object '{}': replication factor must be >= 1", object.id));
  }
  if (!cluster.has_region(object.region)) {
    throw std::invalid_argument(
        fmt::format("object '{}': unknown region '{}'", object.id, object.region));
  }
  auto order = rendezvous_order(object.id, object.region, cluster);
  if (order.empty()) {
    throw std::invalid_argument(
        fmt::format("object '{}': region '{}' has no up location", object.id, object.region));
  }
  const auto r = static_cast<std::size_t>(object.replication_factor);
  ReplicaSet set;
  set.object_id = object.id;
  set.degraded = order.size() < r;
  order.resize(std::min(order.size(), r));
  set.locations = std::move(order);
  return set;
}

Availability availability(const StorageObject &object, const ReplicaSet &replicas,
                          const Cluster &cluster) {
  (void)object;
  for (const auto &loc : replicas.locations) {
    const Location *l = cluster.find_location(loc);
    if (l && l->status == LocationStatus::kUp) return Availability::kAvailable;
  }
  return Availability::kUnavailable;
}

std::vector<PlacementChange> re_replicate(std::span<const StorageObject> objects,
                                          PlacementMap &placements, const Cluster &cluster) {
  std::vector<PlacementChange> changes;
  for (const auto &object : objects) {
    auto it = placements.find(object.id);
    if (it == placements.end()) continue;
    ReplicaSet &set = it->second;
    const auto r = static_cast<std::size_t>(object.replication_factor);

    std::set<std::string> live;
    for (const auto &loc : set.locations) {
      const Location *l = cluster.find_location(loc);
      if (l && l->status == LocationStatus::kUp) live.insert(loc);
    }
    if (live.size() < r) {
      for (const auto &candidate : rendezvous_order(object.id, object.region, cluster)) {
        if (live.size() >= r) break;
        if (std::find(set.locations.begin(), set.locations.end(), candidate) !=
            set.locations.end()) {
          continue;
        }
        set.locations.push_back(candidate);
        live.insert(candidate);
        changes.push_back(PlacementChange{object.id, candidate});
      }
    }
    set.degraded = live.size() < r;
  }
  return changes;
}

std::size_t count_unavailable(std::span<const StorageObject> objects,
                              const PlacementMap &placements, const Cluster &cluster) {
  std::size_t count = 0;
  for (const auto &object : objects) {
    auto it = placements.find(object.id);
    if (it == placements.end() ||
        availability(object, it->second, cluster) == Availability::kUnavailable) {
      ++count;
    }
  }
  return count;
}

nlohmann::json placements_to_json(const PlacementMap &placements) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto &[id, set] : placements) {
    arr.push_back({{"object", id}, {"locations", set.locations}, {"degraded", set.degraded}});
  }
  return arr;
}

}  // namespace stretchsim
