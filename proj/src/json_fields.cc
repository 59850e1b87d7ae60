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
#include "json_fields.h"

#include <fmt/format.h>

namespace stretchsim::detail {

void FieldReader::error(std::string code, const std::string &pointer, std::string message) {
  std::string full = base_ + pointer;
  diagnostics_.push_back(Diagnostic{std::move(code), full, line_of(full), std::move(message)});
}

void FieldReader::merge(std::vector<Diagnostic> more) {
  for (auto &d : more) {
    d.pointer = base_ + d.pointer;
    if (d.line == 0) {
      d.line = line_of(d.pointer);
    }
    diagnostics_.push_back(std::move(d));
  }
}

int FieldReader::line_of(const std::string &pointer) const {
  return map_ ? map_->line_of(pointer) : 0;
}

bool FieldReader::expect_object(const json &j, const std::string &pointer) {
  if (!j.is_object()) {
    error("invalid-field", pointer, "expected an object");
    return false;
  }
  return true;
}

const json *FieldReader::member(const json &obj, std::string_view key, const std::string &pointer,
                                bool required) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    if (required) {
      error("missing-field", child(pointer, key), fmt::format("missing required field '{}'", key));
    }
    return nullptr;
  }
  return &*it;
}

const json *FieldReader::array(const json &obj, std::string_view key, const std::string &pointer,
                               bool required) {
  const json *j = member(obj, key, pointer, required);
  if (j && !j->is_array()) {
    error("invalid-field", child(pointer, key), fmt::format("'{}' must be an array", key));
    return nullptr;
  }
  return j;
}

std::optional<std::string> FieldReader::string(const json &obj, std::string_view key,
                                               const std::string &pointer, bool required) {
  const json *j = member(obj, key, pointer, required);
  if (!j) return std::nullopt;
  if (!j->is_string()) {
    error("invalid-field", child(pointer, key), fmt::format("'{}' must be a string", key));
    return std::nullopt;
  }
  return j->get<std::string>();
}

std::optional<std::int64_t> FieldReader::integer(const json &obj, std::string_view key,
                                                 const std::string &pointer, bool required) {
  const json *j = member(obj, key, pointer, required);
  if (!j) return std::nullopt;
  if (!j->is_number_integer()) {
    error("invalid-field", child(pointer, key), fmt::format("'{}' must be an integer", key));
    return std::nullopt;
  }
  if (j->is_number_unsigned() && j->get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    error("invalid-field", child(pointer, key), fmt::format("'{}' is out of range", key));
    return std::nullopt;
  }
  return j->get<std::int64_t>();
}

std::optional<double> FieldReader::number(const json &obj, std::string_view key,
                                          const std::string &pointer, bool required) {
  const json *j = member(obj, key, pointer, required);
  if (!j) return std::nullopt;
  if (!j->is_number()) {
    error("invalid-field", child(pointer, key), fmt::format("'{}' must be a number", key));
    return std::nullopt;
  }
  return j->get<double>();
}

std::optional<bool> FieldReader::boolean(const json &obj, std::string_view key,
                                         const std::string &pointer, bool required) {
  const json *j = member(obj, key, pointer, required);
  if (!j) return std::nullopt;
  if (!j->is_boolean()) {
    error("invalid-field", child(pointer, key), fmt::format("'{}' must be true or false", key));
    return std::nullopt;
  }
  return j->get<bool>();
}

std::optional<std::vector<std::string>> FieldReader::strings(const json &obj,
                                                             std::string_view key,
                                                             const std::string &pointer,
                                                             bool required) {
  const json *j = array(obj, key, pointer, required);
  if (!j) return std::nullopt;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j->size(); ++i) {
    if (!(*j)[i].is_string()) {
      error("invalid-field", child(child(pointer, key), i), "expected a string");
      return std::nullopt;
    }
    out.push_back((*j)[i].get<std::string>());
  }
  return out;
}

}  // namespace stretchsim::detail
