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

#include "stretchsim/scheduler.h"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <stdexcept>

#include "readers.h"

namespace stretchsim {

void check_policy(const PolicyConfig &policy) {
  if (policy.ordering == QueueOrdering::kFairShare && policy.fair_share_halflife <= 0) {
    throw std::invalid_argument("fair_share_halflife must be positive for fair-share ordering");
  }
  if (policy.fair_share_halflife <= 0) {
    throw std::invalid_argument("fair_share_halflife must be positive");
  }
}

std::string describe(const PolicyConfig &policy) {
  std::string out = policy.ordering == QueueOrdering::kFifo ? "fifo" : "fair-share";
  if (policy.quotas_enabled) out += "+quota";
  if (policy.reservations_enabled) out += "+reservation";
  if (policy.backfill_enabled) out += "+backfill";
  return out;
}

PolicyConfig parse_variant(std::string_view variant, const PolicyConfig &base) {
  PolicyConfig policy;
  policy.fair_share_halflife = base.fair_share_halflife;
  if (variant.empty()) throw std::invalid_argument("empty policy variant");
  std::size_t pos = 0;
  while (pos <= variant.size()) {
    std::size_t plus = variant.find('+', pos);
    std::string_view token =
        variant.substr(pos, plus == std::string_view::npos ? std::string_view::npos : plus - pos);
    if (token == "fifo") {
      policy.ordering = QueueOrdering::kFifo;
    } else if (token == "fair-share" || token == "fairshare") {
      policy.ordering = QueueOrdering::kFairShare;
    } else if (token == "quota" || token == "quotas") {
      policy.quotas_enabled = true;
    } else if (token == "reservation" || token == "reservations") {
      policy.reservations_enabled = true;
    } else if (token == "backfill") {
      policy.backfill_enabled = true;
    } else {
      throw std::invalid_argument(
          fmt::format("unknown policy flag '{}' in variant '{}'", token, variant));
    }
    if (plus == std::string_view::npos) break;
    pos = plus + 1;
  }
  return policy;
}

namespace {

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "on" || value == "1") return true;
  if (value == "false" || value == "off" || value == "0") return false;
  throw std::invalid_argument(fmt::format("policy override {}: expected true/false", key));
}

}  // namespace

void apply_policy_override(PolicyConfig &policy, std::string_view key_value) {
  auto eq = key_value.find('=');
  if (eq == std::string_view::npos) {
    throw std::invalid_argument(fmt::format("policy override '{}' is not KEY=VAL", key_value));
  }
  std::string_view key = key_value.substr(0, eq);
  std::string_view value = key_value.substr(eq + 1);
  if (key == "ordering") {
    if (value == "fifo") {
      policy.ordering = QueueOrdering::kFifo;
    } else if (value == "fair-share" || value == "fairshare") {
      policy.ordering = QueueOrdering::kFairShare;
    } else {
      throw std::invalid_argument(fmt::format("unknown ordering '{}'", value));
    }
  } else if (key == "quotas_enabled") {
    policy.quotas_enabled = parse_bool(key, value);
  } else if (key == "reservations_enabled") {
    policy.reservations_enabled = parse_bool(key, value);
  } else if (key == "backfill_enabled") {
    policy.backfill_enabled = parse_bool(key, value);
  } else if (key == "fair_share_halflife") {
    Seconds halflife = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), halflife);
    if (ec != std::errc() || ptr != value.data() + value.size() || halflife <= 0) {
      throw std::invalid_argument("fair_share_halflife must be a positive integer");
    }
    policy.fair_share_halflife = halflife;
  } else {
    throw std::invalid_argument(fmt::format("unknown policy key '{}'", key));
  }
}

std::int64_t RunningPod::remaining_gpu_seconds(Seconds now) const {
  return spec.gpu_count * std::max<Seconds>(0, end() - now);
}

void ClusterState::bind(const PodSpec &pod, std::size_t node, const std::string &model,
                        Seconds start) {
  if (running.contains(pod.id)) {
    throw std::logic_error(fmt::format("pod '{}' is already running", pod.id));
  }
  cluster.allocate(node, pod.request(model));
  running.emplace(pod.id, RunningPod{pod, node, pod.gpu_count > 0 ? model : std::string{}, start});
}

RunningPod ClusterState::unbind(std::string_view pod_id) {
  auto it = running.find(pod_id);
  if (it == running.end()) {
    throw std::logic_error(fmt::format("pod '{}' is not running", pod_id));
  }
  RunningPod pod = std::move(it->second);
  running.erase(it);
  cluster.release(pod.node, pod.request());
  return pod;
}

std::map<std::string, Quota, std::less<>> guaranteed_consumption(const RunningTable &running) {
  std::map<std::string, Quota, std::less<>> out;
  for (const auto &[id, pod] : running) {
    if (!pod.spec.guaranteed()) continue;
    Quota &q = out[pod.spec.ns];
    q.cpu_millicores += pod.spec.cpu;
    q.mem_bytes += pod.spec.mem;
    q.gpus += pod.spec.gpu_count;
  }
  return out;
}

bool within_quota(const PodSpec &pod, const NamespaceTable &namespaces,
                  const std::map<std::string, Quota, std::less<>> &consumption) {
  auto ns = namespaces.find(pod.ns);
  if (ns == namespaces.end() || !ns->second.quota) return true;
  const Quota &cap = *ns->second.quota;
  Quota used;
  if (auto it = consumption.find(pod.ns); it != consumption.end()) used = it->second;
  // Compared as cap - used to stay clear of overflow with unbounded caps.
  return pod.cpu <= cap.cpu_millicores - used.cpu_millicores &&
         pod.mem <= cap.mem_bytes - used.mem_bytes && pod.gpu_count <= cap.gpus - used.gpus;
}

std::vector<std::string> eligible_models(const PodSpec &pod, const Cluster &cluster,
                                         std::size_t node, const NamespaceTable &namespaces,
                                         const PolicyConfig &policy) {
  std::vector<std::string> out;
  if (pod.gpu_count == 0) return out;
  const Node &n = cluster.node(node);
  const Namespace *ns = nullptr;
  if (auto it = namespaces.find(pod.ns); it != namespaces.end()) ns = &it->second;

  auto gated = [&](const std::string &model) {
    return policy.reservations_enabled && pod.guaranteed() && cluster.is_reserved(model) &&
           !(ns && ns->holds_grant(model));
  };
  auto consider = [&](const std::string &model) {
    if (n.gpu_capacity(model) >= pod.gpu_count && !gated(model)) out.push_back(model);
  };
  if (pod.acceptable_models.empty()) {
    for (const auto &slot : n.gpus) consider(slot.model);
  } else {
    for (const auto &model : pod.acceptable_models) consider(model);
  }
  return out;
}

namespace {

bool placement_eligible(const PodSpec &pod, const Cluster &cluster, std::size_t node) {
  if (!cluster.node_up(node)) return false;
  if (pod.region_affinity && cluster.region_of(node) != *pod.region_affinity) return false;
  const Node &n = cluster.node(node);
  return pod.cpu <= n.cpu_capacity && pod.mem <= n.mem_capacity;
}

}  // namespace

std::vector<Candidate> filter_nodes(const PodSpec &pod, const Cluster &cluster,
                                    const NamespaceTable &namespaces,
                                    const PolicyConfig &policy) {
  std::vector<Candidate> out;
  for (std::size_t i = 0; i < cluster.nodes().size(); ++i) {
    if (!placement_eligible(pod, cluster, i)) continue;
    if (pod.gpu_count == 0) {
      if (cluster.fits(i, pod.request(""))) out.push_back(Candidate{i, cluster.node(i).id, {}});
      continue;
    }
    for (const auto &model : eligible_models(pod, cluster, i, namespaces, policy)) {
      if (cluster.fits(i, pod.request(model))) {
        out.push_back(Candidate{i, cluster.node(i).id, model});
        break;
      }
    }
  }
  return out;
}

double bin_pack_score(const PodSpec &pod, const Cluster &cluster, const Candidate &candidate) {
  const Node &n = cluster.node(candidate.node);
  const NodeAllocation &a = cluster.allocation(candidate.node);
  double cpu = static_cast<double>(a.cpu + pod.cpu) / static_cast<double>(n.cpu_capacity);
  double mem = static_cast<double>(a.mem + pod.mem) / static_cast<double>(n.mem_capacity);
  double gpu = 0.0;
  if (n.gpu_total() > 0) {
    gpu = static_cast<double>(a.gpu_total() + pod.gpu_count) / static_cast<double>(n.gpu_total());
  }
  return cpu + mem + 2.0 * gpu;
}

std::vector<Candidate> score_nodes(const PodSpec &pod, const Cluster &cluster,
                                   std::vector<Candidate> candidates) {
  std::vector<std::pair<double, Candidate>> scored;
  scored.reserve(candidates.size());
  for (auto &c : candidates) scored.emplace_back(bin_pack_score(pod, cluster, c), std::move(c));
  std::stable_sort(scored.begin(), scored.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second.node_id < b.second.node_id;
  });
  std::vector<Candidate> out;
  out.reserve(scored.size());
  for (auto &[score, c] : scored) out.push_back(std::move(c));
  return out;
}

std::vector<PodSpec> fair_share_order(std::vector<PodSpec> queue, const UsageSnapshot &usage,
                                      const NamespaceTable &namespaces) {
  auto ratio = [&](const std::string &ns) {
    double used = 0.0;
    if (auto it = usage.find(ns); it != usage.end()) used = it->second;
    double weight = 1.0;
    if (auto it = namespaces.find(ns); it != namespaces.end()) weight = it->second.share_weight;
    return used / weight;
  };
  std::vector<std::pair<double, PodSpec>> keyed;
  keyed.reserve(queue.size());
  for (auto &pod : queue) {
    double r = ratio(pod.ns);
    keyed.emplace_back(r, std::move(pod));
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto &a, const auto &b) {
    if (a.first != b.first) return a.first < b.first;
    if (a.second.arrival != b.second.arrival) return a.second.arrival < b.second.arrival;
    return a.second.id < b.second.id;
  });
  std::vector<PodSpec> out;
  out.reserve(keyed.size());
  for (auto &[r, pod] : keyed) out.push_back(std::move(pod));
  return out;
}

namespace {

constexpr std::size_t kDims = 3;  // cpu, mem, gpu of the chosen model

struct VictimItem {
  std::array<std::int64_t, kDims> amount;
  std::int64_t gpu_seconds;
  const std::string *id;
};

// Exact minimum-cardinality cover of a deficit vector, minimizing released
// GPU-seconds among covers of that size. Branch and bound over items in a
// fixed order; bounds use the s largest remaining amounts per dimension and
// the s smallest remaining GPU-seconds.
class VictimSearch {
 public:
  VictimSearch(std::vector<VictimItem> items, std::array<std::int64_t, kDims> deficit)
      : items_(std::move(items)), deficit_(deficit) {
    std::sort(items_.begin(), items_.end(), [](const VictimItem &a, const VictimItem &b) {
      if (a.amount[2] != b.amount[2]) return a.amount[2] > b.amount[2];
      if (a.amount[0] != b.amount[0]) return a.amount[0] > b.amount[0];
      if (a.amount[1] != b.amount[1]) return a.amount[1] > b.amount[1];
      return *a.id < *b.id;
    });
    const std::size_t n = items_.size();
    top_.assign(kDims, std::vector<std::vector<std::int64_t>>(n + 1));
    min_gs_.assign(n + 1, {});
    for (std::size_t i = 0; i <= n; ++i) {
      for (std::size_t d = 0; d < kDims; ++d) {
        std::vector<std::int64_t> vals;
        for (std::size_t j = i; j < n; ++j) vals.push_back(items_[j].amount[d]);
        std::sort(vals.rbegin(), vals.rend());
        top_[d][i] = prefix_sums(vals);
      }
      std::vector<std::int64_t> gs;
      for (std::size_t j = i; j < n; ++j) gs.push_back(items_[j].gpu_seconds);
      std::sort(gs.begin(), gs.end());
      min_gs_[i] = prefix_sums(gs);
    }
  }

  struct Result {
    std::vector<std::string> ids;
    std::int64_t gpu_seconds = 0;
  };

  std::optional<Result> run() {
    const std::size_t n = items_.size();
    std::size_t lower = 0;
    for (std::size_t d = 0; d < kDims; ++d) {
      if (deficit_[d] <= 0) continue;
      std::size_t s = 0;
      while (s <= n && top_[d][0][s] < deficit_[d]) ++s;
      if (s > n) return std::nullopt;
      lower = std::max(lower, s);
    }
    for (std::size_t k = lower; k <= n; ++k) {
      best_gs_ = std::numeric_limits<std::int64_t>::max();
      best_.clear();
      chosen_.clear();
      dfs(0, k, {0, 0, 0}, 0);
      if (!best_.empty() || (k == 0 && best_gs_ == 0)) {
        Result r;
        for (std::size_t idx : best_) r.ids.push_back(*items_[idx].id);
        std::sort(r.ids.begin(), r.ids.end());
        r.gpu_seconds = best_gs_;
        return r;
      }
    }
    return std::nullopt;
  }

 private:
  static std::vector<std::int64_t> prefix_sums(const std::vector<std::int64_t> &vals) {
    std::vector<std::int64_t> out(vals.size() + 1, 0);
    for (std::size_t i = 0; i < vals.size(); ++i) out[i + 1] = out[i] + vals[i];
    return out;
  }

  void dfs(std::size_t i, std::size_t k, std::array<std::int64_t, kDims> acc, std::int64_t gs) {
    const std::size_t chosen = chosen_.size();
    if (chosen == k) {
      for (std::size_t d = 0; d < kDims; ++d) {
        if (acc[d] < deficit_[d]) return;
      }
      if (gs < best_gs_) {
        best_gs_ = gs;
        best_ = chosen_;
      }
      return;
    }
    const std::size_t slots = k - chosen;
    if (items_.size() - i < slots) return;
    for (std::size_t d = 0; d < kDims; ++d) {
      if (acc[d] + top_[d][i][slots] < deficit_[d]) return;
    }
    if (gs + min_gs_[i][slots] >= best_gs_) return;

    const VictimItem &item = items_[i];
    chosen_.push_back(i);
    std::array<std::int64_t, kDims> with = acc;
    for (std::size_t d = 0; d < kDims; ++d) with[d] += item.amount[d];
    dfs(i + 1, k, with, gs + item.gpu_seconds);
    chosen_.pop_back();
    dfs(i + 1, k, acc, gs);
  }

  std::vector<VictimItem> items_;
  std::array<std::int64_t, kDims> deficit_;
  // top_[d][i][s]: sum of the s largest amounts in dimension d among items i..n-1.
  std::vector<std::vector<std::vector<std::int64_t>>> top_;
  // min_gs_[i][s]: sum of the s smallest GPU-seconds among items i..n-1.
  std::vector<std::vector<std::int64_t>> min_gs_;
  std::vector<std::size_t> chosen_;
  std::vector<std::size_t> best_;
  std::int64_t best_gs_ = 0;
};

}  // namespace

std::optional<Preemption> preempt(const PodSpec &pod, std::size_t node, const ClusterState &state,
                                  const NamespaceTable &namespaces, const PolicyConfig &policy,
                                  Seconds now) {
  const Cluster &cluster = state.cluster;
  if (!pod.guaranteed() || !placement_eligible(pod, cluster, node)) return std::nullopt;

  std::vector<std::optional<std::string>> options;
  if (pod.gpu_count == 0) {
    options.emplace_back();
  } else {
    for (auto &m : eligible_models(pod, cluster, node, namespaces, policy)) options.emplace_back(m);
  }

  std::vector<const RunningPod *> evictable;
  for (const auto &[id, running] : state.running) {
    if (running.node == node && running.spec.opportunistic()) evictable.push_back(&running);
  }

  const ResourceTotals free = cluster.free(node);
  std::optional<Preemption> best;
  for (const auto &model : options) {
    std::array<std::int64_t, kDims> deficit = {
        pod.cpu - free.cpu_millicores, pod.mem - free.mem_bytes,
        model ? pod.gpu_count - free.gpu_count(*model) : 0};
    std::vector<VictimItem> items;
    for (const RunningPod *r : evictable) {
      std::int64_t gpu = (model && r->model == *model) ? r->spec.gpu_count : 0;
      items.push_back(
          VictimItem{{r->spec.cpu, r->spec.mem, gpu}, r->remaining_gpu_seconds(now), &r->spec.id});
    }
    auto found = VictimSearch(std::move(items), deficit).run();
    if (!found) continue;
    if (!best || found->ids.size() < best->victims.size() ||
        (found->ids.size() == best->victims.size() &&
         found->gpu_seconds < best->victim_gpu_seconds)) {
      best = Preemption{std::move(found->ids), model, found->gpu_seconds};
    }
  }
  return best;
}

CycleResult schedule_cycle(std::vector<PodSpec> queue, ClusterState &state,
                           const NamespaceTable &namespaces, const UsageSnapshot &usage,
                           const PolicyConfig &policy, Seconds now) {
  std::vector<PodSpec> order = policy.ordering == QueueOrdering::kFairShare
                                   ? fair_share_order(queue, usage, namespaces)
                                   : queue;
  auto consumption = guaranteed_consumption(state.running);
  CycleResult result;
  std::vector<std::string> placed;

  auto bind = [&](const PodSpec &pod, std::size_t node, const std::optional<std::string> &model,
                  std::vector<std::string> victims) {
    state.bind(pod, node, model.value_or(""), now);
    if (pod.guaranteed()) {
      Quota &q = consumption[pod.ns];
      q.cpu_millicores += pod.cpu;
      q.mem_bytes += pod.mem;
      q.gpus += pod.gpu_count;
    }
    result.decisions.push_back(
        ScheduleDecision{pod.id, state.cluster.node(node).id, model, now, std::move(victims)});
    placed.push_back(pod.id);
  };

  for (const PodSpec &pod : order) {
    if (pod.opportunistic() && !policy.backfill_enabled) continue;
    if (pod.guaranteed() && policy.quotas_enabled && !within_quota(pod, namespaces, consumption)) {
      continue;
    }
    auto candidates = filter_nodes(pod, state.cluster, namespaces, policy);
    if (!candidates.empty()) {
      Candidate best = score_nodes(pod, state.cluster, std::move(candidates)).front();
      bind(pod, best.node, best.model, {});
      continue;
    }
    if (!pod.guaranteed() || !policy.backfill_enabled) continue;

    std::optional<std::pair<std::size_t, Preemption>> chosen;
    for (std::size_t i = 0; i < state.cluster.nodes().size(); ++i) {
      auto p = preempt(pod, i, state, namespaces, policy, now);
      if (!p) continue;
      if (!chosen || p->victims.size() < chosen->second.victims.size() ||
          (p->victims.size() == chosen->second.victims.size() &&
           p->victim_gpu_seconds < chosen->second.victim_gpu_seconds)) {
        chosen.emplace(i, std::move(*p));
      }
    }
    if (!chosen) continue;
    for (const auto &victim : chosen->second.victims) state.unbind(victim);
    bind(pod, chosen->first, chosen->second.model, chosen->second.victims);
  }

  std::sort(placed.begin(), placed.end());
  for (auto &pod : queue) {
    if (!std::binary_search(placed.begin(), placed.end(), pod.id)) {
      result.pending.push_back(std::move(pod));
    }
  }
  return result;
}

namespace detail {

std::optional<PolicyConfig> read_policy(FieldReader &reader, const json &j,
                                        const std::string &pointer) {
  if (!reader.expect_object(j, pointer)) return std::nullopt;
  const std::size_t before = reader.diagnostics().size();
  PolicyConfig policy;
  if (auto ordering = reader.string(j, "ordering", pointer, false)) {
    if (*ordering == "fifo") {
      policy.ordering = QueueOrdering::kFifo;
    } else if (*ordering == "fair-share" || *ordering == "fairshare") {
      policy.ordering = QueueOrdering::kFairShare;
    } else {
      reader.error("invalid-policy", child(pointer, "ordering"),
                   "ordering must be 'fifo' or 'fair-share'");
    }
  }
  if (auto v = reader.boolean(j, "quotas_enabled", pointer, false)) policy.quotas_enabled = *v;
  if (auto v = reader.boolean(j, "reservations_enabled", pointer, false)) {
    policy.reservations_enabled = *v;
  }
  if (auto v = reader.boolean(j, "backfill_enabled", pointer, false)) policy.backfill_enabled = *v;
  if (auto v = reader.integer(j, "fair_share_halflife", pointer, false)) {
    if (*v <= 0) {
      reader.error("invalid-policy", child(pointer, "fair_share_halflife"),
                   "fair_share_halflife must be positive");
    } else {
      policy.fair_share_halflife = *v;
    }
  }
  if (reader.diagnostics().size() != before) return std::nullopt;
  return policy;
}

}  // namespace detail

}  // namespace stretchsim
