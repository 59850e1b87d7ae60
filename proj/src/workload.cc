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

#include "stretchsim/workload.h"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "readers.h"

namespace stretchsim {

using nlohmann::json;

std::string_view to_string(Priority p) {
  return p == Priority::kGuaranteed ? "guaranteed" : "opportunistic";
}

std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::kUnknownNamespace:
      return "unknown-namespace";
    case Rejection::kUnknownModel:
      return "unknown-model";
    case Rejection::kUnknownRegion:
      return "unknown-region";
    case Rejection::kNeverFits:
      return "never-fits";
  }
  return "never-fits";
}

bool PodSpec::accepts(std::string_view model) const {
  return acceptable_models.empty() ||
         std::find(acceptable_models.begin(), acceptable_models.end(), model) !=
             acceptable_models.end();
}

ResourceRequest PodSpec::request(std::string_view model) const {
  ResourceRequest r;
  r.cpu_millicores = cpu;
  r.mem_bytes = mem;
  r.gpu_count = gpu_count;
  if (gpu_count > 0) r.gpu_model = std::string(model);
  return r;
}

std::optional<Rejection> validate_pod(const PodSpec &pod, const Cluster &cluster,
                                      const NamespaceTable &namespaces) {
  if (!namespaces.contains(pod.ns)) return Rejection::kUnknownNamespace;
  for (const auto &model : pod.acceptable_models) {
    if (!cluster.find_model(model)) return Rejection::kUnknownModel;
  }
  if (pod.region_affinity && !cluster.has_region(*pod.region_affinity)) {
    return Rejection::kUnknownRegion;
  }
  for (std::size_t i = 0; i < cluster.nodes().size(); ++i) {
    const Node &node = cluster.node(i);
    if (pod.region_affinity && cluster.region_of(i) != *pod.region_affinity) continue;
    if (pod.cpu > node.cpu_capacity || pod.mem > node.mem_capacity) continue;
    if (pod.gpu_count == 0) return std::nullopt;
    for (const auto &slot : node.gpus) {
      if (pod.accepts(slot.model) && slot.count >= pod.gpu_count) return std::nullopt;
    }
  }
  return Rejection::kNeverFits;
}

void check_generator_params(const GeneratorParams &p) {
  auto fail = [](const std::string &what) { throw std::invalid_argument(what); };
  if (p.namespaces.empty()) fail("generator namespace set is empty");
  if (!p.namespace_weights.empty() && p.namespace_weights.size() != p.namespaces.size()) {
    fail("namespace_weights must match the namespace list");
  }
  for (double w : p.namespace_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) fail("namespace weights must be nonnegative");
  }
  if (!(p.arrival_rate_per_hour >= 0.0) || !std::isfinite(p.arrival_rate_per_hour)) {
    fail("arrival rate must be a nonnegative number");
  }
  if (p.pod_count < 0) fail("pod_count must be nonnegative");
  if (p.min_duration <= 0 || p.max_duration < p.min_duration) {
    fail("duration bounds must satisfy 0 < min <= max");
  }
  if (!(p.opportunistic_fraction >= 0.0 && p.opportunistic_fraction <= 1.0)) {
    fail("opportunistic_fraction must lie in [0, 1]");
  }
  if (p.gpu_request.empty()) fail("gpu_request distribution is empty");
  double total = 0.0;
  for (const auto &g : p.gpu_request) {
    if (g.count < 0 || !(g.weight >= 0.0)) fail("gpu_request entries need count >= 0, weight >= 0");
    total += g.weight;
  }
  if (!(total > 0.0)) fail("gpu_request weights sum to zero");
  total = 0.0;
  for (const auto &m : p.model_choices) {
    if (!(m.weight >= 0.0)) fail("model_choices weights must be nonnegative");
    total += m.weight;
  }
  if (p.model_choices.empty() || !(total > 0.0)) fail("model_choices weights sum to zero");
  if (p.cpu_per_gpu < 0 || p.mem_per_gpu < 0 || p.mem_per_core < 0) {
    fail("per-GPU and per-core sizes must be nonnegative");
  }
  if (p.cpu_only_min <= 0 || p.cpu_only_max < p.cpu_only_min) {
    fail("cpu_only bounds must satisfy 0 < min <= max");
  }
  if (!(p.affinity_fraction >= 0.0 && p.affinity_fraction <= 1.0)) {
    fail("affinity_fraction must lie in [0, 1]");
  }
  if (p.affinity_fraction > 0.0 && p.affinity_regions.empty()) {
    fail("affinity_fraction > 0 needs affinity_regions");
  }
}

namespace {

// Distribution transforms are written out over the raw engine output so a
// trace is identical on every standard library implementation.
class TraceRng {
 public:
  explicit TraceRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(engine_() % span);
  }

  template <typename Weights>
  std::size_t pick(const Weights &weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double target = uniform() * total;
    double running = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] <= 0.0) continue;
      last_positive = i;
      running += weights[i];
      if (target < running) return i;
    }
    return last_positive;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace

WorkloadTrace generate_workload(const GeneratorParams &params, std::uint64_t seed) {
  check_generator_params(params);
  WorkloadTrace trace;
  trace.seed = seed;
  if (params.arrival_rate_per_hour == 0.0 || params.pod_count == 0) return trace;

  TraceRng rng(seed);
  std::vector<double> ns_weights = params.namespace_weights;
  if (ns_weights.empty()) ns_weights.assign(params.namespaces.size(), 1.0);
  std::vector<double> gpu_weights;
  for (const auto &g : params.gpu_request) gpu_weights.push_back(g.weight);
  std::vector<double> model_weights;
  for (const auto &m : params.model_choices) model_weights.push_back(m.weight);

  const double rate_per_second = params.arrival_rate_per_hour / 3600.0;
  const double log_min = std::log(static_cast<double>(params.min_duration));
  const double log_max = std::log(static_cast<double>(params.max_duration));
  double clock = 0.0;

  trace.pods.reserve(static_cast<std::size_t>(params.pod_count));
  for (std::int64_t i = 0; i < params.pod_count; ++i) {
    clock += rng.exponential(rate_per_second);
    PodSpec pod;
    pod.id = fmt::format("pod-{:06d}", i);
    pod.arrival = static_cast<Seconds>(std::floor(clock));
    pod.priority = rng.uniform() < params.opportunistic_fraction ? Priority::kOpportunistic
                                                                 : Priority::kGuaranteed;
    std::size_t ns_index = rng.pick(ns_weights);
    pod.ns = (pod.opportunistic() && params.opportunistic_namespace)
                 ? *params.opportunistic_namespace
                 : params.namespaces[ns_index];
    pod.gpu_count = params.gpu_request[rng.pick(gpu_weights)].count;
    const auto &choice = params.model_choices[rng.pick(model_weights)];
    if (pod.gpu_count > 0) pod.acceptable_models = choice.models;

    double d = std::exp(log_min + rng.uniform() * (log_max - log_min));
    pod.duration = std::clamp(static_cast<Seconds>(std::llround(d)), params.min_duration,
                              params.max_duration);

    std::int64_t cpu_only = rng.uniform_int(params.cpu_only_min / 100, params.cpu_only_max / 100) * 100;
    if (pod.gpu_count > 0) {
      pod.cpu = pod.gpu_count * params.cpu_per_gpu;
      pod.mem = pod.gpu_count * params.mem_per_gpu;
    } else {
      pod.cpu = std::max<std::int64_t>(cpu_only, params.cpu_only_min);
      pod.mem = pod.cpu * params.mem_per_core / 1000;
    }

    if (rng.uniform() < params.affinity_fraction) {
      pod.region_affinity = params.affinity_regions[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(params.affinity_regions.size()) - 1))];
    }
    trace.pods.push_back(std::move(pod));
  }
  return trace;
}

json pod_to_json(const PodSpec &pod) {
  json j = {{"id", pod.id},
            {"namespace", pod.ns},
            {"cpu", pod.cpu},
            {"mem", pod.mem},
            {"gpu_count", pod.gpu_count},
            {"acceptable_models", pod.acceptable_models},
            {"priority", std::string(to_string(pod.priority))},
            {"duration", pod.duration},
            {"arrival", pod.arrival}};
  j["region_affinity"] = pod.region_affinity ? json(*pod.region_affinity) : json(nullptr);
  return j;
}

json trace_to_json(const WorkloadTrace &trace) {
  json arr = json::array();
  for (const auto &pod : trace.pods) arr.push_back(pod_to_json(pod));
  return arr;
}

namespace detail {

std::optional<PodSpec> read_pod(FieldReader &reader, const json &j, const std::string &pointer) {
  if (!reader.expect_object(j, pointer)) return std::nullopt;
  const std::size_t before = reader.diagnostics().size();
  PodSpec pod;
  auto id = reader.string(j, "id", pointer);
  auto ns = reader.string(j, "namespace", pointer);
  auto cpu = reader.integer(j, "cpu", pointer, false);
  auto mem = reader.integer(j, "mem", pointer, false);
  auto gpus = reader.integer(j, "gpu_count", pointer, false);
  auto models = reader.strings(j, "acceptable_models", pointer, false);
  auto region = reader.string(j, "region_affinity", pointer, false);
  auto priority = reader.string(j, "priority", pointer, false);
  auto duration = reader.integer(j, "duration", pointer);
  auto arrival = reader.integer(j, "arrival", pointer);

  if (cpu && *cpu < 0) reader.error("invalid-field", child(pointer, "cpu"), "cpu must be >= 0");
  if (mem && *mem < 0) reader.error("invalid-field", child(pointer, "mem"), "mem must be >= 0");
  if (gpus && *gpus < 0) {
    reader.error("invalid-field", child(pointer, "gpu_count"), "gpu_count must be >= 0");
  }
  if (duration && *duration <= 0) {
    reader.error("invalid-field", child(pointer, "duration"), "duration must be > 0");
  }
  if (arrival && *arrival < 0) {
    reader.error("invalid-field", child(pointer, "arrival"), "arrival must be >= 0");
  }
  if (priority && *priority != "guaranteed" && *priority != "opportunistic") {
    reader.error("invalid-field", child(pointer, "priority"),
                 "priority must be 'guaranteed' or 'opportunistic'");
  }
  if (reader.diagnostics().size() != before) return std::nullopt;

  pod.id = *id;
  pod.ns = *ns;
  pod.cpu = cpu.value_or(0);
  pod.mem = mem.value_or(0);
  pod.gpu_count = gpus.value_or(0);
  pod.acceptable_models = models.value_or(std::vector<std::string>{});
  pod.region_affinity = region;
  pod.priority = (priority && *priority == "opportunistic") ? Priority::kOpportunistic
                                                            : Priority::kGuaranteed;
  pod.duration = *duration;
  pod.arrival = *arrival;
  return pod;
}

std::optional<Namespace> read_namespace(FieldReader &reader, const json &j,
                                        const std::string &pointer) {
  if (!reader.expect_object(j, pointer)) return std::nullopt;
  const std::size_t before = reader.diagnostics().size();
  Namespace ns;
  auto id = reader.string(j, "id", pointer);
  auto weight = reader.number(j, "share_weight", pointer, false);
  auto grants = reader.strings(j, "grants", pointer, false);
  if (weight && !(*weight > 0.0 && std::isfinite(*weight))) {
    reader.error("invalid-field", child(pointer, "share_weight"), "share_weight must be > 0");
  }
  if (const json *q = reader.member(j, "quota", pointer, false)) {
    const std::string qp = child(pointer, "quota");
    if (reader.expect_object(*q, qp)) {
      Quota quota;
      auto cpu = reader.integer(*q, "cpu", qp, false);
      auto mem = reader.integer(*q, "mem", qp, false);
      auto gpus = reader.integer(*q, "gpus", qp, false);
      quota.cpu_millicores = cpu.value_or(INT64_MAX);
      quota.mem_bytes = mem.value_or(INT64_MAX);
      quota.gpus = gpus.value_or(INT64_MAX);
      if (quota.cpu_millicores < 0 || quota.mem_bytes < 0 || quota.gpus < 0) {
        reader.error("invalid-field", qp, "quota fields must be nonnegative");
      }
      ns.quota = quota;
    }
  }
  if (reader.diagnostics().size() != before) return std::nullopt;
  ns.id = *id;
  ns.share_weight = weight.value_or(1.0);
  if (grants) ns.grants.insert(grants->begin(), grants->end());
  return ns;
}

std::optional<GeneratorParams> read_generator(FieldReader &reader, const json &j,
                                              const std::string &pointer) {
  if (!reader.expect_object(j, pointer)) return std::nullopt;
  const std::size_t before = reader.diagnostics().size();
  GeneratorParams p;
  if (auto v = reader.strings(j, "namespaces", pointer, false)) p.namespaces = *v;
  if (const json *w = reader.array(j, "namespace_weights", pointer, false)) {
    for (std::size_t i = 0; i < w->size(); ++i) {
      if (!(*w)[i].is_number()) {
        reader.error("invalid-field", child(child(pointer, "namespace_weights"), i),
                     "expected a number");
      } else {
        p.namespace_weights.push_back((*w)[i].get<double>());
      }
    }
  }
  p.opportunistic_namespace = reader.string(j, "opportunistic_namespace", pointer, false);
  if (auto v = reader.number(j, "arrival_rate_per_hour", pointer)) p.arrival_rate_per_hour = *v;
  if (auto v = reader.integer(j, "pod_count", pointer)) p.pod_count = *v;
  if (const json *d = reader.member(j, "duration_seconds", pointer, false)) {
    const std::string dp = child(pointer, "duration_seconds");
    if (reader.expect_object(*d, dp)) {
      if (auto v = reader.integer(*d, "min", dp)) p.min_duration = *v;
      if (auto v = reader.integer(*d, "max", dp)) p.max_duration = *v;
    }
  }
  if (auto v = reader.number(j, "opportunistic_fraction", pointer, false)) {
    p.opportunistic_fraction = *v;
  }
  if (const json *g = reader.array(j, "gpu_request", pointer, false)) {
    p.gpu_request.clear();
    for (std::size_t i = 0; i < g->size(); ++i) {
      const std::string gp = child(child(pointer, "gpu_request"), i);
      if (!reader.expect_object((*g)[i], gp)) continue;
      auto count = reader.integer((*g)[i], "count", gp);
      auto weight = reader.number((*g)[i], "weight", gp, false);
      if (count) p.gpu_request.push_back({*count, weight.value_or(1.0)});
    }
  }
  if (const json *m = reader.array(j, "model_choices", pointer, false)) {
    p.model_choices.clear();
    for (std::size_t i = 0; i < m->size(); ++i) {
      const std::string mp = child(child(pointer, "model_choices"), i);
      if (!reader.expect_object((*m)[i], mp)) continue;
      auto models = reader.strings((*m)[i], "models", mp);
      auto weight = reader.number((*m)[i], "weight", mp, false);
      if (models) p.model_choices.push_back({*models, weight.value_or(1.0)});
    }
  }
  if (auto v = reader.integer(j, "cpu_per_gpu", pointer, false)) p.cpu_per_gpu = *v;
  if (auto v = reader.integer(j, "mem_per_gpu", pointer, false)) p.mem_per_gpu = *v;
  if (const json *c = reader.member(j, "cpu_only", pointer, false)) {
    const std::string cp = child(pointer, "cpu_only");
    if (reader.expect_object(*c, cp)) {
      if (auto v = reader.integer(*c, "min", cp)) p.cpu_only_min = *v;
      if (auto v = reader.integer(*c, "max", cp)) p.cpu_only_max = *v;
    }
  }
  if (auto v = reader.integer(j, "mem_per_core", pointer, false)) p.mem_per_core = *v;
  if (auto v = reader.strings(j, "affinity_regions", pointer, false)) p.affinity_regions = *v;
  if (auto v = reader.number(j, "affinity_fraction", pointer, false)) p.affinity_fraction = *v;
  if (reader.diagnostics().size() != before) return std::nullopt;
  return p;
}

}  // namespace detail

}  // namespace stretchsim
