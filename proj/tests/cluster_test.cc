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

#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "test_support.h"

namespace stretchsim {
namespace {

using nlohmann::json;
using testing::ClusterBuilder;
using testing::kGiB;

const char *kTinyInventory = R"({
  "regions": [{"id": "west"}],
  "locations": [{"id": "w1", "region": "west"}],
  "nodes": [
    {"id": "g1", "location": "w1", "cpu_capacity": 8000, "mem_capacity": 68719476736,
     "gpus": [{"model": "a100", "count": 2}]}
  ]
})";

TEST(LoadInventoryTest, SingleNode) {
  Cluster c = load_inventory(kTinyInventory);
  ResourceTotals cap = c.capacity();
  EXPECT_EQ(cap.cpu_millicores, 8000);
  EXPECT_EQ(cap.gpu_count("a100"), 2);
  EXPECT_EQ(cap.gpu_total(), 2);
  ASSERT_NE(c.find_model("a100"), nullptr);
  EXPECT_FALSE(c.is_reserved("a100"));
}

TEST(LoadInventoryTest, UnknownLocationIsUnknownReference) {
  const std::string text = R"({
  "regions": [{"id": "west"}],
  "locations": [{"id": "w1", "region": "west"}],
  "nodes": [
    {"id": "g1", "location": "x", "cpu_capacity": 8000, "mem_capacity": 1024}
  ]
})";
  try {
    load_inventory(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    ASSERT_EQ(e.diagnostics().size(), 1u);
    const Diagnostic &d = e.diagnostics()[0];
    EXPECT_EQ(d.code, "unknown-reference");
    EXPECT_EQ(d.pointer, "/nodes/0/location");
    EXPECT_EQ(d.line, 5);
    EXPECT_NE(d.message.find("x"), std::string::npos);
  }
}

TEST(LoadInventoryTest, DuplicateNodeIdNamesTheId) {
  const std::string text = R"({
  "regions": [{"id": "west"}],
  "locations": [{"id": "w1", "region": "west"}],
  "nodes": [
    {"id": "g1", "location": "w1", "cpu_capacity": 8000, "mem_capacity": 1024},
    {"id": "g1", "location": "w1", "cpu_capacity": 8000, "mem_capacity": 1024}
  ]
})";
  try {
    load_inventory(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    ASSERT_FALSE(e.diagnostics().empty());
    EXPECT_EQ(e.diagnostics()[0].code, "duplicate-id");
    EXPECT_EQ(e.diagnostics()[0].line, 6);
    EXPECT_NE(e.diagnostics()[0].message.find("g1"), std::string::npos);
  }
}

TEST(LoadInventoryTest, ReportsEveryProblem) {
  const std::string text = R"({
  "regions": [{"id": "west"}],
  "locations": [{"id": "w1", "region": "nowhere"}],
  "nodes": [
    {"id": "g1", "location": "w1", "cpu_capacity": 0, "mem_capacity": 1024},
    {"id": "g2", "location": "w1", "cpu_capacity": 1000, "mem_capacity": 1024,
     "gpus": [{"model": "a100", "count": -1}]}
  ]
})";
  try {
    load_inventory(text);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    std::vector<std::string> codes;
    for (const auto &d : e.diagnostics()) codes.push_back(d.code);
    EXPECT_NE(std::find(codes.begin(), codes.end(), "unknown-reference"), codes.end());
    EXPECT_GE(std::count(codes.begin(), codes.end(), "nonpositive-capacity"), 2);
  }
}

TEST(LoadInventoryTest, ParseErrorCarriesLine) {
  try {
    load_inventory("{\n  \"regions\": [\n}");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    ASSERT_EQ(e.diagnostics().size(), 1u);
    EXPECT_EQ(e.diagnostics()[0].code, "parse-error");
    EXPECT_EQ(e.diagnostics()[0].line, 3);
  }
}

TEST(LoadInventoryTest, DeclaredModelsGateUnknownOnes) {
  json doc = json::parse(kTinyInventory);
  doc["gpu_models"] = json::array({{{"id", "h200"}, {"reserved", true}}});
  try {
    inventory_from_json(doc);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError &e) {
    EXPECT_EQ(e.diagnostics()[0].code, "unknown-reference");
  }
  doc["gpu_models"].push_back({{"id", "a100"}});
  Cluster c = inventory_from_json(doc);
  EXPECT_TRUE(c.is_reserved("h200"));
  EXPECT_FALSE(c.is_reserved("a100"));
}

TEST(LoadInventoryTest, RoundTrip) {
  Cluster c = load_inventory(testing::read_text(testing::data_path("inventory-3r.json")));
  Cluster again = inventory_from_json(inventory_to_json(c));
  EXPECT_EQ(inventory_to_json(c), inventory_to_json(again));
}

TEST(CapacityTest, PerRegionTotalsMatchDocumentColumns) {
  const std::string text = testing::read_text(testing::data_path("inventory-3r.json"));
  Cluster c = load_inventory(text);
  json doc = json::parse(text);
  ASSERT_EQ(doc["regions"].size(), 3u);
  ASSERT_EQ(doc["locations"].size(), 6u);
  ASSERT_EQ(doc["nodes"].size(), 12u);

  std::map<std::string, std::string> region_of;
  for (const auto &l : doc["locations"]) region_of[l["id"]] = l["region"];
  std::map<std::string, ResourceTotals> expected;
  for (const auto &r : doc["regions"]) expected[r["id"]];
  for (const auto &n : doc["nodes"]) {
    ResourceTotals &t = expected[region_of[n["location"]]];
    t.cpu_millicores += n["cpu_capacity"].get<std::int64_t>();
    t.mem_bytes += n["mem_capacity"].get<std::int64_t>();
    for (const auto &g : n["gpus"]) t.gpus[g["model"]] += g["count"].get<std::int64_t>();
  }

  ResourceTotals sum;
  for (const auto &[region, totals] : expected) {
    EXPECT_EQ(c.capacity(region), totals) << region;
    sum += c.capacity(region);
  }
  EXPECT_EQ(sum, c.capacity());
}

TEST(CapacityTest, EmptyClusterIsZero) {
  Cluster c;
  EXPECT_EQ(c.capacity(), ResourceTotals{});
  EXPECT_EQ(c.max_gpus_per_node(), 0);
}

TEST(CapacityTest, DownLocationExcluded) {
  Cluster c = load_inventory(kTinyInventory);
  EXPECT_TRUE(c.set_location_status("w1", LocationStatus::kDown));
  EXPECT_EQ(c.capacity().gpu_count("a100"), 0);
  EXPECT_EQ(c.capacity().cpu_millicores, 0);
}

TEST(CapacityTest, UnknownRegionThrows) {
  Cluster c = load_inventory(kTinyInventory);
  EXPECT_THROW(c.capacity("pacific"), std::invalid_argument);
}

TEST(LocationStatusTest, IdempotentAndReversible) {
  Cluster c = load_inventory(testing::read_text(testing::data_path("inventory-3r.json")));
  const ResourceTotals before = c.capacity();
  const std::string loc = c.locations()[2].id;

  EXPECT_TRUE(c.set_location_status(loc, LocationStatus::kDown));
  const ResourceTotals down = c.capacity();
  ResourceTotals expected;
  for (std::size_t i = 0; i < c.nodes().size(); ++i) {
    if (c.node(i).location == loc) continue;
    expected.cpu_millicores += c.node(i).cpu_capacity;
    expected.mem_bytes += c.node(i).mem_capacity;
    for (const auto &s : c.node(i).gpus) expected.gpus[s.model] += s.count;
  }
  EXPECT_EQ(down, expected);

  EXPECT_FALSE(c.set_location_status(loc, LocationStatus::kDown));
  EXPECT_EQ(c.capacity(), down);

  EXPECT_TRUE(c.set_location_status(loc, LocationStatus::kUp));
  EXPECT_EQ(c.capacity(), before);
  EXPECT_THROW(c.set_location_status("nope", LocationStatus::kDown), std::invalid_argument);
}

TEST(AllocationTest, RefusesOvercommit) {
  Cluster c = ClusterBuilder()
                  .region("r")
                  .location("l", "r")
                  .model("a100")
                  .node("n", "l", 4000, 8 * kGiB, {{"a100", 2}})
                  .build();
  ResourceRequest req{2000, 4 * kGiB, 2, "a100"};
  ASSERT_TRUE(c.fits(0, req));
  c.allocate(0, req);
  EXPECT_FALSE(c.fits(0, ResourceRequest{1000, kGiB, 1, "a100"}));
  EXPECT_THROW(c.allocate(0, ResourceRequest{1000, kGiB, 1, "a100"}), std::logic_error);
  EXPECT_THROW(c.allocate(0, ResourceRequest{3000, kGiB, 0, ""}), std::logic_error);
  EXPECT_EQ(c.allocation(0).gpu("a100"), 2);
  c.release(0, req);
  EXPECT_EQ(c.allocation(0).gpu_total(), 0);
  EXPECT_EQ(c.allocation(0).cpu, 0);
  EXPECT_THROW(c.release(0, req), std::logic_error);
}

TEST(AllocationTest, RandomSequencesNeverOvercommit) {
  std::mt19937_64 rng(11);
  Cluster c = load_inventory(testing::read_text(testing::data_path("inventory-3r.json")));
  std::vector<std::pair<std::size_t, ResourceRequest>> held;
  for (int step = 0; step < 5000; ++step) {
    if (!held.empty() && rng() % 3 == 0) {
      std::size_t k = rng() % held.size();
      c.release(held[k].first, held[k].second);
      held.erase(held.begin() + static_cast<std::ptrdiff_t>(k));
      continue;
    }
    std::size_t n = rng() % c.nodes().size();
    const Node &node = c.node(n);
    ResourceRequest req{static_cast<std::int64_t>(rng() % 16 + 1) * 1000,
                        static_cast<std::int64_t>(rng() % 64 + 1) * kGiB, 0, ""};
    if (!node.gpus.empty() && rng() % 2) {
      req.gpu_model = node.gpus[0].model;
      req.gpu_count = static_cast<std::int64_t>(rng() % 4 + 1);
    }
    if (c.fits(n, req)) {
      c.allocate(n, req);
      held.emplace_back(n, req);
    } else {
      EXPECT_THROW(c.allocate(n, req), std::logic_error);
    }
    for (std::size_t i = 0; i < c.nodes().size(); ++i) {
      const NodeAllocation &a = c.allocation(i);
      ASSERT_LE(a.cpu, c.node(i).cpu_capacity);
      ASSERT_LE(a.mem, c.node(i).mem_capacity);
      for (const auto &s : c.node(i).gpus) ASSERT_LE(a.gpu(s.model), s.count);
    }
  }
}

TEST(CheckInventoryTest, GpuSlotsMustBeDistinct) {
  std::vector<Region> regions{{"r"}};
  std::vector<Location> locations{{"l", "r", LocationStatus::kUp}};
  Node n;
  n.id = "n";
  n.location = "l";
  n.cpu_capacity = 1000;
  n.mem_capacity = 1000;
  n.gpus = {{"t4", 1}, {"t4", 2}};
  auto diags = check_inventory(regions, locations, {{"t4", false}}, {n});
  ASSERT_FALSE(diags.empty());
  EXPECT_EQ(diags[0].code, "duplicate-id");
  EXPECT_EQ(diags[0].pointer, "/nodes/0/gpus/1/model");
}

}  // namespace
}  // namespace stretchsim
