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

#include "stretchsim/accounting.h"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

namespace stretchsim {

using nlohmann::json;

void UsageLedger::check_amount(std::int64_t amount) const {
  if (amount <= 0) throw std::invalid_argument("usage amount must be positive");
}

std::size_t UsageLedger::open(std::string ns, Resource resource, std::int64_t amount,
                              Seconds start) {
  check_amount(amount);
  if (start < clock_) {
    throw std::invalid_argument(
        fmt::format("record opened at {} before ledger clock {}", start, clock_));
  }
  if (!records_.empty() && start < records_.back().start) sorted_ = false;
  clock_ = start;
  records_.push_back(UsageRecord{std::move(ns), resource, amount, start, std::nullopt});
  return records_.size() - 1;
}

void UsageLedger::close(std::size_t index, Seconds end) {
  UsageRecord &r = records_.at(index);
  if (r.end) throw std::logic_error("usage record already closed");
  if (end <= r.start || end < clock_) {
    throw std::invalid_argument(
        fmt::format("record [{}, {}) closed at invalid time (clock {})", r.start, end, clock_));
  }
  r.end = end;
  clock_ = end;
}

void UsageLedger::append(UsageRecord record) {
  check_amount(record.amount);
  if (!record.end || *record.end <= record.start) {
    throw std::invalid_argument("appended records must be closed with end > start");
  }
  if (!records_.empty() && record.start < records_.back().start) sorted_ = false;
  clock_ = std::max(clock_, *record.end);
  records_.push_back(std::move(record));
}

void UsageLedger::advance(Seconds clock) {
  if (clock < clock_) throw std::invalid_argument("ledger clock cannot move backwards");
  clock_ = clock;
}

namespace {

void check_window(Window w) {
  if (w.end <= w.begin) {
    throw std::invalid_argument(fmt::format("inverted window [{}, {})", w.begin, w.end));
  }
}

// Sum over [w.begin, w.end) without argument checks; empty windows give 0.
std::int64_t sum_window(const UsageLedger &ledger, std::optional<std::string_view> ns, Window w,
                        Resource resource) {
  std::int64_t total = 0;
  const bool sorted = ledger.sorted_by_start();
  const Seconds clock = ledger.clock();
  for (const auto &r : ledger.records()) {
    if (r.start >= w.end) {
      if (sorted) break;
      continue;
    }
    if (r.resource != resource || (ns && r.ns != *ns)) continue;
    Seconds s = std::max(r.start, w.begin);
    Seconds e = std::min(r.end.value_or(clock), w.end);
    if (e > s) total += r.amount * (e - s);
  }
  return total;
}

Seconds floor_div(Seconds a, Seconds b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }
Seconds ceil_div(Seconds a, Seconds b) { return -floor_div(-a, b); }

}  // namespace

UsageAmount aggregate(const UsageLedger &ledger, std::optional<std::string_view> ns,
                      Window window, Resource resource) {
  check_window(window);
  return UsageAmount{sum_window(ledger, ns, window, resource)};
}

void CapacityTimeline::record(Seconds time, const ResourceTotals &capacity) {
  if (!points_.empty() && time < points_.back().first) {
    throw std::invalid_argument("capacity timeline times must be nondecreasing");
  }
  if (!points_.empty() && points_.back().first == time) {
    points_.back().second = capacity;
  } else {
    points_.emplace_back(time, capacity);
  }
}

std::int64_t CapacityTimeline::integral(Window window, Resource resource) const {
  check_window(window);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < points_.size(); ++i) {
    Seconds s = std::max(points_[i].first, window.begin);
    Seconds e = window.end;
    if (i + 1 < points_.size()) e = std::min(e, points_[i + 1].first);
    if (e > s) total += points_[i].second.amount(resource) * (e - s);
  }
  return total;
}

double utilization(const UsageLedger &ledger, const CapacityTimeline &capacity, Window window,
                   Resource resource) {
  std::int64_t denominator = capacity.integral(window, resource);
  if (denominator == 0) return 0.0;
  std::int64_t numerator = aggregate(ledger, std::nullopt, window, resource).unit_seconds;
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

double CacheStats::hit_rate() const {
  std::int64_t lookups = hits + misses;
  return lookups == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(lookups);
}

CacheStats &CacheStats::operator+=(const CacheStats &other) {
  hits += other.hits;
  misses += other.misses;
  direct_pieces += other.direct_pieces;
  return *this;
}

std::size_t SegmentCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

void SegmentCache::clear() {
  std::lock_guard lock(mu_);
  entries_.clear();
}

void SegmentCache::save(const std::filesystem::path &path, std::string_view tag) const {
  std::lock_guard lock(mu_);
  json doc;
  doc["tag"] = std::string(tag);
  doc["entries"] = json::array();
  for (const auto &[key, entry] : entries_) {
    const auto &[resource, width, index] = key;
    json per_ns = json::object();
    for (const auto &[ns, v] : entry.per_namespace) per_ns[ns] = v;
    doc["entries"].push_back({{"resource", std::string(to_string(resource))},
                              {"width", width},
                              {"index", index},
                              {"total", entry.total},
                              {"per_namespace", per_ns}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write cache file {}", path.string()));
  out << doc.dump(1) << '\n';
}

bool SegmentCache::load(const std::filesystem::path &path, std::string_view tag) {
  std::ifstream in(path);
  if (!in) return false;
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || doc.value("tag", "") != tag) return false;
  std::map<Key, Entry> loaded;
  try {
    for (const auto &e : doc.at("entries")) {
      auto resource = parse_resource(e.at("resource").get<std::string>());
      if (!resource) return false;
      Entry entry;
      entry.total = e.at("total").get<std::int64_t>();
      for (const auto &[ns, v] : e.at("per_namespace").items()) {
        entry.per_namespace[ns] = v.get<std::int64_t>();
      }
      loaded[Key{*resource, e.at("width").get<Seconds>(), e.at("index").get<std::int64_t>()}] =
          std::move(entry);
    }
  } catch (const json::exception &) {
    return false;
  }
  std::lock_guard lock(mu_);
  entries_ = std::move(loaded);
  return true;
}

struct SegmentedQuery {
  static SegmentedResult run(const UsageLedger &ledger, SegmentCache &cache,
                             std::optional<std::string_view> ns, Window window,
                             Resource resource, Seconds width) {
    check_window(window);
    if (width <= 0) throw std::invalid_argument("segment width must be positive");

    SegmentedResult result;
    std::int64_t total = 0;
    auto direct = [&](Seconds begin, Seconds end) {
      if (end <= begin) return;
      total += sum_window(ledger, ns, Window{begin, end}, resource);
      ++result.stats.direct_pieces;
    };

    const std::int64_t first = ceil_div(window.begin, width);
    const std::int64_t last = floor_div(window.end, width);
    if (first >= last) {
      direct(window.begin, window.end);
      result.amount.unit_seconds = total;
      return result;
    }

    direct(window.begin, first * width);
    std::lock_guard lock(cache.mu_);
    for (std::int64_t k = first; k < last; ++k) {
      const Seconds begin = k * width;
      const Seconds end = begin + width;
      if (end >= ledger.clock()) {
        direct(begin, end);
        continue;
      }
      SegmentCache::Key key{resource, width, k};
      auto it = cache.entries_.find(key);
      if (it == cache.entries_.end()) {
        ++result.stats.misses;
        it = cache.entries_.emplace(key, fill(ledger, resource, Window{begin, end})).first;
      } else {
        ++result.stats.hits;
      }
      const SegmentCache::Entry &entry = it->second;
      if (!ns) {
        total += entry.total;
      } else if (auto found = entry.per_namespace.find(*ns); found != entry.per_namespace.end()) {
        total += found->second;
      }
    }
    direct(last * width, window.end);
    result.amount.unit_seconds = total;
    return result;
  }

  static SegmentCache::Entry fill(const UsageLedger &ledger, Resource resource, Window w) {
    SegmentCache::Entry entry;
    const bool sorted = ledger.sorted_by_start();
    for (const auto &r : ledger.records()) {
      if (r.start >= w.end) {
        if (sorted) break;
        continue;
      }
      if (r.resource != resource) continue;
      Seconds s = std::max(r.start, w.begin);
      Seconds e = std::min(r.end.value_or(ledger.clock()), w.end);
      if (e <= s) continue;
      entry.per_namespace[r.ns] += r.amount * (e - s);
      entry.total += r.amount * (e - s);
    }
    return entry;
  }
};

SegmentedResult segmented_query(const UsageLedger &ledger, SegmentCache &cache,
                                std::optional<std::string_view> ns, Window window,
                                Resource resource, Seconds width) {
  return SegmentedQuery::run(ledger, cache, ns, window, resource, width);
}

UsageSnapshot decayed_usage(const UsageLedger &ledger, Seconds now, Seconds halflife,
                            Resource resource) {
  if (halflife <= 0) throw std::invalid_argument("halflife must be positive");
  UsageSnapshot out;
  const double h = static_cast<double>(halflife);
  const double mean_life = h / std::log(2.0);
  for (const auto &r : ledger.records()) {
    if (r.resource != resource) continue;
    Seconds s = r.start;
    Seconds e = std::min(r.end.value_or(ledger.clock()), now);
    if (e <= s) continue;
    // Integral of amount * 2^(-(now - t) / h) over t in [s, e).
    double weight = mean_life * (std::exp2(-static_cast<double>(now - e) / h) -
                                 std::exp2(-static_cast<double>(now - s) / h));
    out[r.ns] += static_cast<double>(r.amount) * weight;
  }
  return out;
}

std::string ledger_to_csv(const UsageLedger &ledger) {
  std::string out = "namespace,resource,amount,start,end\n";
  for (const auto &r : ledger.records()) {
    out += fmt::format("{},{},{},{},{}\n", r.ns, to_string(r.resource), r.amount, r.start,
                       r.end ? std::to_string(*r.end) : std::string{});
  }
  return out;
}

}  // namespace stretchsim
