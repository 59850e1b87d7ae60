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

// Diagnostic-collecting readers for the sub-documents of a scenario file.

#include <optional>
#include <string>

#include "json_fields.h"
#include "stretchsim/scheduler.h"
#include "stretchsim/workload.h"

namespace stretchsim::detail {

std::optional<PodSpec> read_pod(FieldReader &reader, const json &j, const std::string &pointer);
std::optional<Namespace> read_namespace(FieldReader &reader, const json &j,
                                        const std::string &pointer);
std::optional<GeneratorParams> read_generator(FieldReader &reader, const json &j,
                                              const std::string &pointer);
std::optional<PolicyConfig> read_policy(FieldReader &reader, const json &j,
                                        const std::string &pointer);

}  // namespace stretchsim::detail
