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
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "stretchsim/resources.h"
#include "stretchsim/scheduler.h"

namespace stretchsim {

/// Resource consumption by one namespace over [start, end). `amount` is a
/// GPU count or CPU millicores; an open record has no end yet.
struct UsageRecord {
  std::string ns;
  Resource resource = Resource::kGpu;
  std::int64_t amount = 0;
  Seconds start = 0;
  std::optional<Seconds> end;

  bool operator==(const UsageRecord &) const = default;
};

/// Half-open time window [begin, end).
struct Window {
  Seconds begin = 0;
  Seconds end = 0;

  Seconds length() const { return end - begin; }
};

/// Exact usage in unit-seconds (GPU-seconds or millicore-seconds).
struct UsageAmount {
  std::int64_t unit_seconds = 0;

  /// Resource-hours; the only place integer seconds become floating point.
  double hours() const { return static_cast<double>(unit_seconds) / 3600.0; }

  bool operator==(const UsageAmount &) const = default;
};

/// Append-mostly usage ledger. Open records are clipped at clock().
///
/// Records are opened and closed at or after the current clock, so usage
/// before the clock never changes once recorded.
class UsageLedger {
 public:
  /// Opens a record at `start` (>= clock) and returns its index.
  std::size_t open(std::string ns, Resource resource, std::int64_t amount, Seconds start);
  /// Closes an open record at `end`, which must exceed its start and be at
  /// or after the clock.
  void close(std::size_t index, Seconds end);
  /// Appends a closed record; used when importing historical usage.
  void append(UsageRecord record);
  void advance(Seconds clock);

  Seconds clock() const { return clock_; }
  const std::vector<UsageRecord> &records() const { return records_; }
  bool sorted_by_start() const { return sorted_; }

 private:
  void check_amount(std::int64_t amount) const;

  std::vector<UsageRecord> records_;
  Seconds clock_ = 0;
  bool sorted_ = true;
};

/// Usage clipped to `window`, for one namespace or all of them.
/// Throws std::invalid_argument when window.end <= window.begin.
UsageAmount aggregate(const UsageLedger &ledger, std::optional<std::string_view> ns,
                      Window window, Resource resource);

/// Piecewise-constant cluster capacity over time (only up locations count).
class CapacityTimeline {
 public:
  /// Capacity from `time` onward. Times must be nondecreasing.
  void record(Seconds time, const ResourceTotals &capacity);

  /// Capacity unit-seconds over `window`.
  std::int64_t integral(Window window, Resource resource) const;

  const std::vector<std::pair<Seconds, ResourceTotals>> &points() const { return points_; }

 private:
  std::vector<std::pair<Seconds, ResourceTotals>> points_;
};

/// Allocated over capacity resource-seconds in `window`; 0 when capacity is 0.
double utilization(const UsageLedger &ledger, const CapacityTimeline &capacity, Window window,
                   Resource resource = Resource::kGpu);

struct CacheStats {
  std::int64_t hits = 0;
  std::int64_t misses = 0;
  std::int64_t direct_pieces = 0;  // ragged edges and open segments

  double hit_rate() const;
  CacheStats &operator+=(const CacheStats &other);
};

/// Cache of per-namespace partial sums over aligned segments
/// [k*width, (k+1)*width). Only segments that end before the ledger clock
/// are stored, and a stored segment is never recomputed.
class SegmentCache {
 public:
  SegmentCache() = default;
  SegmentCache(const SegmentCache &) = delete;
  SegmentCache &operator=(const SegmentCache &) = delete;

  std::size_t size() const;
  void clear();

  /// Writes entries as JSON tagged with `tag` (e.g. a scenario digest).
  void save(const std::filesystem::path &path, std::string_view tag) const;
  /// Loads entries written with the same tag; returns false (and leaves the
  /// cache untouched) on a tag mismatch or unreadable file.
  bool load(const std::filesystem::path &path, std::string_view tag);

 private:
  friend struct SegmentedQuery;

  struct Entry {
    std::map<std::string, std::int64_t, std::less<>> per_namespace;
    std::int64_t total = 0;
  };
  using Key = std::tuple<Resource, Seconds, std::int64_t>;  // resource, width, index

  mutable std::mutex mu_;
  std::map<Key, Entry> entries_;
};

struct SegmentedResult {
  UsageAmount amount;
  CacheStats stats;
};

/// aggregate() computed piecewise through the segment cache. Equal to
/// aggregate() on the same arguments, bit for bit.
SegmentedResult segmented_query(const UsageLedger &ledger, SegmentCache &cache,
                                std::optional<std::string_view> ns, Window window,
                                Resource resource, Seconds width = 3600);

/// Exponentially decayed usage per namespace at `now`, in unit-seconds.
UsageSnapshot decayed_usage(const UsageLedger &ledger, Seconds now, Seconds halflife,
                            Resource resource);

/// Ledger as CSV: namespace,resource,amount,start,end (end empty when open).
std::string ledger_to_csv(const UsageLedger &ledger);

}  // namespace stretchsim
