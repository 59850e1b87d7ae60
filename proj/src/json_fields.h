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

// Field readers that turn JSON shape problems into Diagnostics instead of
// exceptions, so a loader can report every problem in one pass.

#include <cstdint>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "stretchsim/diagnostics.h"

namespace stretchsim::detail {

using nlohmann::json;

class FieldReader {
 public:
  FieldReader(const SourceMap *map, std::string base) : map_(map), base_(std::move(base)) {}

  void error(std::string code, const std::string &pointer, std::string message);

  const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }
  std::vector<Diagnostic> take() { return std::move(diagnostics_); }
  bool ok() const { return diagnostics_.empty(); }
  void merge(std::vector<Diagnostic> more);

  /// Prefix applied to every pointer this reader reports.
  const std::string &base() const { return base_; }
  int line_of(const std::string &pointer) const;

  bool expect_object(const json &j, const std::string &pointer);

  const json *member(const json &obj, std::string_view key, const std::string &pointer,
                     bool required);
  const json *array(const json &obj, std::string_view key, const std::string &pointer,
                    bool required);

  std::optional<std::string> string(const json &obj, std::string_view key,
                                    const std::string &pointer, bool required = true);
  std::optional<std::int64_t> integer(const json &obj, std::string_view key,
                                      const std::string &pointer, bool required = true);
  std::optional<double> number(const json &obj, std::string_view key, const std::string &pointer,
                               bool required = true);
  std::optional<bool> boolean(const json &obj, std::string_view key, const std::string &pointer,
                              bool required = true);
  std::optional<std::vector<std::string>> strings(const json &obj, std::string_view key,
                                                  const std::string &pointer,
                                                  bool required = true);

 private:
  const SourceMap *map_;
  std::string base_;
  std::vector<Diagnostic> diagnostics_;
};

inline std::string child(const std::string &pointer, std::string_view key) {
  return pointer + "/" + escape_pointer_token(key);
}

inline std::string child(const std::string &pointer, std::size_t index) {
  return pointer + "/" + std::to_string(index);
}

}  // namespace stretchsim::detail
