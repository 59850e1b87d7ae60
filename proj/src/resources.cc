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
#include "stretchsim/resources.h"

#include <numeric>

namespace stretchsim {

std::string_view to_string(Resource r) { return r == Resource::kGpu ? "gpu" : "cpu"; }

std::optional<Resource> parse_resource(std::string_view s) {
  if (s == "gpu") return Resource::kGpu;
  if (s == "cpu") return Resource::kCpu;
  return std::nullopt;
}

std::int64_t ResourceTotals::gpu_total() const {
  return std::accumulate(gpus.begin(), gpus.end(), std::int64_t{0},
                         [](std::int64_t acc, const auto &kv) { return acc + kv.second; });
}

std::int64_t ResourceTotals::gpu_count(std::string_view model) const {
  auto it = gpus.find(std::string(model));
  return it == gpus.end() ? 0 : it->second;
}

ResourceTotals &ResourceTotals::operator+=(const ResourceTotals &other) {
  cpu_millicores += other.cpu_millicores;
  mem_bytes += other.mem_bytes;
  for (const auto &[model, count] : other.gpus) {
    gpus[model] += count;
  }
  return *this;
}

}  // namespace stretchsim
