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

#include <gtest/gtest.h>

#include <random>

#include "stretchsim/report.h"
#include "properties.h"
#include "test_support.h"

namespace stretchsim {
namespace {

using testing::ClusterBuilder;
using testing::kGiB;
using testing::make_pod;

PodSpec timed(PodSpec p, Seconds arrival, Seconds duration) {
  p.arrival = arrival;
  p.duration = duration;
  return p;
}

TEST(EventTest, SameInstantOrder) {
  Event completion{10, EventKind::kPodCompletion, "p", 0};
  Event arrival{10, EventKind::kPodArrival, "a", 0};
  Event recovery{10, EventKind::kLocationRecovery, "l", 0};
  Event outage{10, EventKind::kLocationOutage, "l", 0};
  Event tick{10, EventKind::kSchedulingTick, "", 0};
  EXPECT_LT(completion, recovery);
  EXPECT_LT(recovery, arrival);
  EXPECT_LT(arrival, outage);
  EXPECT_LT(outage, tick);
  EXPECT_LT(tick, (Event{11, EventKind::kPodCompletion, "p", 0}));
  EXPECT_EQ(to_string(EventKind::kLocationOutage), "location-outage");
}

TEST(SimulationTest, EmptyTraceIsIdle) {
  Scenario s = testing::two_site_scenario();
  RunResult r = run(s);
  EXPECT_EQ(r.metrics.gpu_utilization, 0.0);
  EXPECT_TRUE(r.state.ledger.records().empty());
  EXPECT_EQ(r.metrics.pods, PodCounts{});
  EXPECT_EQ(r.state.clock, s.horizon);
}

TEST(SimulationTest, CompletionFreesTheNode) {
  Scenario s = testing::two_site_scenario();
  s.trace.pods = {timed(make_pod("p", "lab", 2), 0, 600)};
  Simulation sim(s);
  while (sim.state().cluster.running.empty()) ASSERT_TRUE(sim.advance());
  const std::size_t node = sim.state().cluster.running.at("p").node;
  EXPECT_EQ(sim.state().cluster.cluster.allocation(node).gpu_total(), 2);
  sim.run();
  EXPECT_EQ(sim.state().cluster.cluster.allocation(node).gpu_total(), 0);
  EXPECT_EQ(sim.state().cluster.cluster.allocation(node).cpu, 0);
  EXPECT_EQ(sim.state().pod_states.at("p"), PodState::kCompleted);
  ASSERT_EQ(sim.state().ledger.records().size(), 2u);
  EXPECT_EQ(sim.state().ledger.records()[0].end, 600);
  EXPECT_EQ(sim.metrics().total_gpu.unit_seconds, 1200);
}

TEST(SimulationTest, OutageFailsAndRequeues) {
  Scenario s = testing::two_site_scenario();
  // Fill node "na" first by making it the only up node at t=0.
  s.cluster.set_location_status("b", LocationStatus::kDown);
  s.cluster.set_location_status("c", LocationStatus::kDown);
  s.trace.pods = {timed(make_pod("g", "lab", 2), 0, 7200),
                  timed(make_pod("o", "lab", 2, Priority::kOpportunistic), 0, 7200)};
  s.faults = {FaultEvent{600, "a", LocationStatus::kDown}};
  Simulation sim(s);
  while (sim.state().clock < 600 || sim.state().cluster.cluster.find_location("a")->status ==
                                        LocationStatus::kUp) {
    ASSERT_TRUE(sim.advance());
  }
  const SimState &st = sim.state();
  EXPECT_EQ(st.pod_states.at("g"), PodState::kFailed);
  EXPECT_EQ(st.pod_states.at("o"), PodState::kFailed);
  ASSERT_EQ(st.queue.size(), 2u);
  EXPECT_EQ(st.queue[0].id, "g");
  EXPECT_EQ(st.queue[1].id, "o");
  EXPECT_EQ(st.outage_failures, 2);
  EXPECT_TRUE(st.cluster.running.empty());
  EXPECT_EQ(st.cluster.cluster.capacity().gpu_total(), 0);
  for (const auto &rec : st.ledger.records()) EXPECT_EQ(rec.end, 600);

  sim.run();
  EXPECT_EQ(sim.metrics().pods.failed, 2);
  EXPECT_EQ(sim.metrics().pods.arrived, 2);
  EXPECT_TRUE(audit_state(sim.state()).empty());
}

TEST(SimulationTest, FailedPodsRunAgainAfterRecovery) {
  Scenario s = testing::two_site_scenario();
  s.cluster.set_location_status("b", LocationStatus::kDown);
  s.cluster.set_location_status("c", LocationStatus::kDown);
  s.trace.pods = {timed(make_pod("g", "lab", 2), 0, 3600)};
  s.faults = {FaultEvent{600, "a", LocationStatus::kDown}, FaultEvent{1200, "a", LocationStatus::kUp}};
  RunResult r = run(s);
  EXPECT_EQ(r.state.pod_states.at("g"), PodState::kCompleted);
  EXPECT_EQ(r.state.attempts.at("g"), 1);
  // 600 s before the outage plus the full rerun.
  EXPECT_EQ(r.metrics.total_gpu.unit_seconds, 2 * (600 + 3600));
  EXPECT_EQ(r.state.decisions.size(), 2u);
}

TEST(SimulationTest, StorageSurvivesSingleOutages) {
  Scenario s = testing::two_site_scenario();
  for (int i = 0; i < 300; ++i) s.objects.push_back(StorageObject{"o" + std::to_string(i), "metro", 3});
  s.faults = {FaultEvent{100, "a", LocationStatus::kDown}, FaultEvent{200, "a", LocationStatus::kUp},
              FaultEvent{300, "b", LocationStatus::kDown}, FaultEvent{400, "b", LocationStatus::kUp}};
  RunResult r = run(s);
  ASSERT_EQ(r.metrics.availability_series.size(), 5u);
  for (const auto &[t, n] : r.metrics.availability_series) EXPECT_EQ(n, 0u) << t;
  EXPECT_EQ(r.metrics.availability_incidents, 0u);
}

TEST(SimulationTest, PreemptionRequeuesVictimAndIgnoresStaleCompletion) {
  Scenario s = testing::two_site_scenario();
  s.cluster.set_location_status("b", LocationStatus::kDown);
  s.cluster.set_location_status("c", LocationStatus::kDown);
  s.trace.pods = {timed(make_pod("o", "lab", 4, Priority::kOpportunistic), 0, 1000),
                  timed(make_pod("g", "lab", 4), 100, 500)};
  RunResult r = run(s);
  EXPECT_EQ(r.metrics.preemptions, 1);
  EXPECT_EQ(r.state.attempts.at("o"), 1);
  EXPECT_EQ(r.state.pod_states.at("o"), PodState::kCompleted);
  EXPECT_EQ(r.state.pod_states.at("g"), PodState::kCompleted);
  // o: [0,100) then rerun [600,1600); g: [100,600).
  EXPECT_EQ(r.metrics.total_gpu.unit_seconds, 4 * (100 + 1000 + 500));
  EXPECT_TRUE(audit_state(r.state).empty());
}

TEST(SimulationTest, ClockNeverRunsBackwards) {
  Scenario s = testing::two_site_scenario();
  s.trace.pods = {timed(make_pod("p", "lab", 1), 50, 100)};
  Simulation sim(s);
  sim.step(Event{60, EventKind::kSchedulingTick, "", 0});
  EXPECT_THROW(sim.step(Event{59, EventKind::kSchedulingTick, "", 0}), std::invalid_argument);
}

TEST(SimulationTest, QueueDepthSampledOnGrid) {
  Scenario s = testing::two_site_scenario();
  s.metrics_interval = 3600;
  s.horizon = 5 * 3600;
  for (int i = 0; i < 5; ++i) {
    s.trace.pods.push_back(timed(make_pod("p" + std::to_string(i), "lab", 4), 10, 3 * 3600));
  }
  RunResult r = run(s);
  std::vector<std::pair<Seconds, std::size_t>> want = {
      {0, 0}, {3600, 2}, {7200, 2}, {10800, 2}, {14400, 0}, {18000, 0}};
  EXPECT_EQ(r.metrics.queue_depth_series, want);
  ASSERT_EQ(r.metrics.utilization_series.size(), 5u);
  EXPECT_EQ(r.metrics.utilization_series[0].first, 0);
}

TEST(SimulationTest, InvariantsHoldAfterEveryEvent) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    Scenario s = testing::random_scenario(rng);
    Simulation sim(s);
    Seconds last = 0;
    while (sim.advance()) {
      ASSERT_GE(sim.state().clock, last);
      last = sim.state().clock;
      auto problems = audit_state(sim.state());
      ASSERT_TRUE(problems.empty()) << "trial " << trial << ": " << problems.front();
    }
    sim.run();
    const Metrics m = sim.metrics();
    EXPECT_EQ(m.pods.arrived, m.pods.completed + m.pods.running + m.pods.pending + m.pods.failed);
    for (const auto &rec : sim.state().ledger.records()) {
      ASSERT_GE(rec.start, 0);
      if (rec.end) ASSERT_LE(*rec.end, s.horizon);
    }
    std::int64_t per_ns = 0;
    for (const auto &ns : m.namespaces) per_ns += ns.gpu.unit_seconds;
    EXPECT_EQ(per_ns, m.total_gpu.unit_seconds);
    EXPECT_GE(m.gpu_utilization, 0.0);
    EXPECT_LE(m.gpu_utilization, 1.0);
  }
}

TEST(SimulationTest, GpuHoursEqualLedgerSum) {
  std::mt19937_64 rng(77);
  Scenario s = testing::random_scenario(rng);
  RunResult r = run(s);
  std::int64_t sum = 0;
  for (const auto &rec : r.state.ledger.records()) {
    if (rec.resource != Resource::kGpu) continue;
    Seconds end = std::min(rec.end.value_or(r.state.ledger.clock()), s.horizon);
    sum += rec.amount * (end - rec.start);
  }
  EXPECT_EQ(sum, r.metrics.total_gpu.unit_seconds);
}

TEST(SimulationTest, DeterministicReports) {
  std::mt19937_64 rng(5);
  Scenario s = testing::random_scenario(rng);
  RunResult a = run(s);
  RunResult b = run(s);
  EXPECT_EQ(summary_text(s, a.metrics), summary_text(s, b.metrics));
  EXPECT_EQ(utilization_csv(a.metrics), utilization_csv(b.metrics));
  EXPECT_EQ(ledger_to_csv(a.state.ledger), ledger_to_csv(b.state.ledger));
  EXPECT_EQ(final_state_json(s, a.state, a.metrics).dump(),
            final_state_json(s, b.state, b.metrics).dump());
  EXPECT_EQ(a.state.decisions, b.state.decisions);
}

}  // namespace
}  // namespace stretchsim
