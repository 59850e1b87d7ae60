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

// Acceptance suite. Runs each criterion, prints one PASS or FAIL line per
// criterion and exits nonzero if any failed.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "properties.h"
#include "stretchsim/accounting.h"
#include "stretchsim/cli.h"
#include "stretchsim/engine.h"
#include "stretchsim/report.h"
#include "stretchsim/scenario.h"
#include "stretchsim/scheduler.h"
#include "stretchsim/storage.h"
#include "test_support.h"

namespace stretchsim {
namespace {

namespace fs = std::filesystem;

const std::vector<std::string> kShipped = {"reference-fifo", "reservation-vs-fifo",
                                           "outage-resilience", "fairshare-demo"};

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome fail(std::string detail) { return {false, std::move(detail)}; }

Scenario shipped(const std::string &name) {
  return load_scenario_file(testing::scenario_path(name));
}

double relative(std::int64_t got, std::int64_t want) {
  if (want == 0) return got == 0 ? 0.0 : 1.0;
  return std::abs(static_cast<double>(got - want)) / std::abs(static_cast<double>(want));
}

// Reserving the scarce model and backfilling idle GPUs beats plain FIFO by
// at least 20% relative utilization.
Outcome reservation_gain() {
  Scenario s = shipped("reservation-vs-fifo");
  std::size_t reserved = 0;
  for (const auto &m : s.cluster.gpu_models()) reserved += m.reserved ? 1 : 0;
  if (s.cluster.nodes().size() < 12 || s.cluster.gpu_models().size() < 4 || reserved < 1 ||
      s.trace.pods.size() < 500) {
    return fail("scenario is smaller than required");
  }
  const PolicyConfig plain = parse_variant("fifo");
  if (plain.backfill_enabled || plain.reservations_enabled) return fail("fifo variant is not plain");

  auto rows = compare_variants(s, {"fifo", "fifo+reservation+backfill"}, std::nullopt);
  const double base = rows[0].utilization, tuned = rows[1].utilization;
  const double gain = base > 0 ? tuned / base - 1.0 : 0.0;
  Outcome o{gain >= 0.20, fmt::format("fifo {:.4f}, reservation+backfill {:.4f}, gain {:+.1f}%",
                                      base, tuned, 100.0 * gain)};
  return o;
}

// Any single downed location leaves every object readable.
Outcome outage_resilience() {
  Scenario s = shipped("outage-resilience");
  if (s.objects.size() != 1000) return fail(fmt::format("{} objects, want 1000", s.objects.size()));
  PlacementMap placements;
  for (const auto &o : s.objects) {
    if (o.replication_factor != 3) return fail(fmt::format("object {} is not r=3", o.id));
    ReplicaSet r = place_replicas(o, s.cluster);
    const std::set<std::string> distinct(r.locations.begin(), r.locations.end());
    if (r.degraded || distinct.size() != 3) return fail(fmt::format("object {} degraded", o.id));
    placements.emplace(o.id, std::move(r));
  }
  std::size_t checked = 0;
  for (const auto &loc : s.cluster.locations()) {
    Cluster c = s.cluster;
    c.set_location_status(loc.id, LocationStatus::kDown);
    std::size_t oracle = 0;
    for (const auto &[id, r] : placements) {
      bool readable = false;
      for (const auto &l : r.locations) readable = readable || l != loc.id;
      oracle += readable ? 0 : 1;
    }
    const std::size_t got = count_unavailable(s.objects, placements, c);
    if (got != 0 || oracle != 0) {
      return fail(fmt::format("{} unavailable with {} down", got, loc.id));
    }
    ++checked;
  }
  if (checked != 5) return fail(fmt::format("{} locations, want 5", checked));
  RunResult run_result = run(s);
  if (run_result.metrics.max_unavailable != 0) {
    return fail(fmt::format("simulated outages left {} objects unavailable",
                            run_result.metrics.max_unavailable));
  }
  return {true, fmt::format("{} objects, {} single-location outages, 0 unavailable",
                            placements.size(), checked)};
}

// Per-namespace GPU-seconds add up to the total, and both match a
// per-second brute-force sum over the ledger.
Outcome accounting_conservation() {
  std::string detail;
  for (const auto &name : kShipped) {
    Scenario s = shipped(name);
    RunResult r = run(s);
    const Window w{0, s.horizon};
    std::int64_t per_ns = 0;
    for (const auto &ns : r.metrics.namespaces) {
      per_ns += ns.gpu.unit_seconds;
      const std::int64_t oracle = testing::riemann(r.state.ledger, ns.ns, w, Resource::kGpu);
      if (relative(ns.gpu.unit_seconds, oracle) > 1e-6) {
        return fail(fmt::format("{}: namespace {} {} vs oracle {}", name, ns.ns,
                                ns.gpu.unit_seconds, oracle));
      }
    }
    const std::int64_t total = r.metrics.total_gpu.unit_seconds;
    const std::int64_t oracle = testing::riemann(r.state.ledger, std::nullopt, w, Resource::kGpu);
    if (per_ns != total) return fail(fmt::format("{}: namespaces {} vs total {}", name, per_ns, total));
    if (relative(total, oracle) > 1e-6) {
      return fail(fmt::format("{}: total {} vs oracle {}", name, total, oracle));
    }
    detail += fmt::format("{}{} {} GPU-s", detail.empty() ? "" : ", ", name, total);
  }
  return {true, detail};
}

// Segmented queries over a simulated ledger equal direct aggregation, and a
// second pass over the same windows is served from the cache.
Outcome segmented_cache() {
  RunResult r = run(shipped("reservation-vs-fifo"));
  const UsageLedger &ledger = r.state.ledger;
  const Seconds horizon = r.metrics.horizon;
  std::vector<std::string> namespaces;
  for (const auto &ns : r.metrics.namespaces) namespaces.push_back(ns.ns);

  struct Query {
    std::optional<std::string> ns;
    Window window;
    Resource resource;
  };
  std::mt19937_64 rng(20240611);
  auto uni = [&](Seconds lo, Seconds hi) { return std::uniform_int_distribution<Seconds>(lo, hi)(rng); };
  std::vector<Query> queries;
  for (int i = 0; i < 1000; ++i) {
    Query q;
    const Seconds a = uni(0, horizon - 1);
    q.window = {a, uni(a + 1, horizon)};
    if (uni(0, 2) != 0) q.ns = namespaces[static_cast<std::size_t>(uni(0, namespaces.size() - 1))];
    q.resource = uni(0, 3) != 0 ? Resource::kGpu : Resource::kCpu;
    queries.push_back(q);
  }

  SegmentCache cache;
  for (const auto &q : queries) {
    auto got = segmented_query(ledger, cache, q.ns, q.window, q.resource);
    if (!(got.amount == aggregate(ledger, q.ns, q.window, q.resource))) {
      return fail(fmt::format("window [{}, {}) differs", q.window.begin, q.window.end));
    }
  }
  CacheStats second;
  for (const auto &q : queries) {
    auto got = segmented_query(ledger, cache, q.ns, q.window, q.resource);
    if (!(got.amount == aggregate(ledger, q.ns, q.window, q.resource))) {
      return fail(fmt::format("cached window [{}, {}) differs", q.window.begin, q.window.end));
    }
    second += got.stats;
  }
  const double rate = second.hit_rate();
  return {rate >= 0.90, fmt::format("1000/1000 windows equal, second-pass hit rate {:.2f}% ({} hits, {} misses)",
                                    100.0 * rate, second.hits, second.misses)};
}

// Random scheduling cycles never break a safety rule.
Outcome scheduler_safety() {
  std::mt19937_64 rng(10007);
  int cases = 0, with_reservations = 0;
  for (; cases < 10000; ++cases) {
    testing::Instance inst = testing::random_instance(rng, 6, 10);
    UsageSnapshot usage;
    for (const auto &[id, ns] : inst.namespaces) usage[id] = static_cast<double>(rng() % 50000);
    ClusterState state = inst.state;
    CycleResult r = schedule_cycle(inst.queue, state, inst.namespaces, usage, inst.policy, inst.now);
    if (auto v = testing::safety_violation(inst, state, r)) {
      return fail(fmt::format("case {}: {}", cases, *v));
    }
    if (r.decisions.size() + r.pending.size() != inst.queue.size()) {
      return fail(fmt::format("case {}: pods lost from the queue", cases));
    }
    with_reservations += inst.policy.reservations_enabled ? 1 : 0;
  }
  return {true, fmt::format("{} cases ({} with reservations), no violations", cases, with_reservations)};
}

// A pod stays pending iff exhaustive search over nodes and opportunistic
// victim subsets finds no placement, pod by pod in queue order.
Outcome completeness() {
  std::mt19937_64 rng(500);
  int pending = 0, placed = 0;
  for (int i = 0; i < 500; ++i) {
    testing::Instance inst = testing::random_instance(rng, 5, 8);
    UsageSnapshot usage;
    for (const auto &[id, ns] : inst.namespaces) usage[id] = static_cast<double>(rng() % 50000);
    ClusterState whole_state = inst.state;
    CycleResult whole =
        schedule_cycle(inst.queue, whole_state, inst.namespaces, usage, inst.policy, inst.now);

    std::vector<PodSpec> order = inst.queue;
    if (inst.policy.ordering == QueueOrdering::kFairShare) {
      order = fair_share_order(order, usage, inst.namespaces);
    }
    ClusterState step = inst.state;
    std::vector<ScheduleDecision> replay;
    for (const PodSpec &pod : order) {
      const bool feasible = testing::brute_force_feasible(pod, step, inst.namespaces, inst.policy);
      CycleResult one = schedule_cycle({pod}, step, inst.namespaces, usage, inst.policy, inst.now);
      if ((one.decisions.size() == 1) != feasible) {
        return fail(fmt::format("instance {}: pod {} {} but search says {}", i, pod.id,
                                one.decisions.empty() ? "pending" : "placed",
                                feasible ? "feasible" : "infeasible"));
      }
      replay.insert(replay.end(), one.decisions.begin(), one.decisions.end());
    }
    if (replay != whole.decisions) return fail(fmt::format("instance {}: cycle differs from replay", i));
    placed += static_cast<int>(whole.decisions.size());
    pending += static_cast<int>(whole.pending.size());
  }
  return {true, fmt::format("500 instances, {} placed and {} pending all agree with search", placed,
                            pending)};
}

std::map<std::string, std::string> read_dir(const fs::path &dir) {
  std::map<std::string, std::string> files;
  for (const auto &e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      files[fs::relative(e.path(), dir).string()] = testing::read_text(e.path().string());
    }
  }
  return files;
}

// Same scenario and seed give byte-identical reports; duplicate compare
// variants give identical rows.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "stretchsim_acceptance_determinism";
  fs::remove_all(root);
  std::size_t files = 0;
  for (const auto &name : kShipped) {
    for (const char *pass : {"a", "b"}) {
      Scenario s = shipped(name);
      write_report(root / name / pass, s, run(s));
    }
    auto a = read_dir(root / name / "a");
    auto b = read_dir(root / name / "b");
    if (a.empty() || a != b) return fail(fmt::format("{}: reports differ", name));
    files += a.size();
  }
  for (const auto &name : kShipped) {
    Scenario s = shipped(name);
    const std::string v = describe(s.policy);
    auto rows = compare_variants(s, {v, v}, root / name / "compare");
    if (rows.size() != 2 || !(rows[0] == rows[1])) return fail(fmt::format("{}: compare rows differ", name));
    if (read_dir(root / name / "compare" / fmt::format("00-{}", v)) !=
        read_dir(root / name / "compare" / fmt::format("01-{}", v))) {
      return fail(fmt::format("{}: compare reports differ", name));
    }
  }
  fs::remove_all(root);
  return {true, fmt::format("{} report files identical across runs, compare rows identical", files)};
}

std::optional<std::string> conservation_violation(const Scenario &s) {
  RunResult r = run(s);
  std::int64_t arrivals = 0;
  for (const auto &p : s.trace.pods) arrivals += p.arrival <= s.horizon ? 1 : 0;
  std::int64_t completed = 0;
  for (const auto &[id, st] : r.state.pod_states) completed += st == PodState::kCompleted ? 1 : 0;
  const auto running = static_cast<std::int64_t>(r.state.cluster.running.size());
  const auto queued = static_cast<std::int64_t>(r.state.queue.size());
  const PodCounts &c = r.metrics.pods;
  if (c.arrived != arrivals || arrivals != completed + running + queued ||
      c.arrived != c.completed + c.running + c.pending + c.failed || c.completed != completed ||
      c.running != running || c.pending + c.failed != queued) {
    return fmt::format("{}: {} arrivals; reported {} = {} + {} + {} + {}; observed {} + {} + {}",
                       s.name, arrivals, c.arrived, c.completed, c.running, c.pending, c.failed,
                       completed, running, queued);
  }
  return std::nullopt;
}

// Every arrived pod is completed, running, pending or failed at the horizon.
Outcome pod_conservation() {
  for (const auto &name : kShipped) {
    if (auto v = conservation_violation(shipped(name))) return fail(*v);
  }
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    Scenario s = testing::random_scenario(rng);
    s.name = fmt::format("random-{}", i);
    if (auto v = conservation_violation(s)) return fail(*v);
  }
  return {true, fmt::format("{} shipped and 1000 random scenarios conserve pods", kShipped.size())};
}

struct Criterion {
  int number;
  std::string name;
  std::function<Outcome()> check;
  double time_limit = 0.0;  // seconds; 0 means none
};

}  // namespace
}  // namespace stretchsim

int main() {
  using namespace stretchsim;
  const std::vector<Criterion> criteria = {
      {1, "reservation and backfill utilization gain", reservation_gain, 30.0},
      {2, "single-location outage resilience", outage_resilience, 10.0},
      {3, "accounting conservation", accounting_conservation},
      {4, "segmented cache oracle", segmented_cache},
      {5, "scheduler safety", scheduler_safety},
      {6, "small-instance completeness", completeness},
      {7, "determinism", determinism},
      {8, "pod conservation", pod_conservation},
  };
  int failures = 0;
  for (const auto &c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception &e) {
      o = fail(fmt::format("exception: {}", e.what()));
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit > 0 && seconds >= c.time_limit) {
      o.pass = false;
      o.detail += fmt::format("; exceeded {:.0f} s", c.time_limit);
    }
    fmt::print("{} [{}] {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", c.number, c.name, o.detail,
               seconds);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
