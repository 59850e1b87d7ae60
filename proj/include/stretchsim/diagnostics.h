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

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stretchsim {

/// A single structured validation finding.
///
/// `code` is a stable machine-readable identifier (e.g. "duplicate-id",
/// "unknown-namespace"); `pointer` is the RFC 6901 JSON pointer of the
/// offending value; `line` is the 1-based source line, or 0 when unknown.
struct Diagnostic {
  std::string code;
  std::string pointer;
  int line = 0;
  std::string message;

  bool operator==(const Diagnostic &) const = default;
};

std::string format_diagnostic(const Diagnostic &d, std::string_view source_name);

/// Thrown by loaders when a document or object violates its invariants.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics);
  ValidationError(std::string code, std::string pointer, std::string message);

  const std::vector<Diagnostic> &diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Maps JSON pointers in a text document to the line they start on.
class SourceMap {
 public:
  SourceMap() = default;

  /// Indexes `text`. Returns an empty map if the text does not parse.
  static SourceMap build(std::string_view text);

  /// Line of `pointer`, falling back to the closest indexed ancestor.
  int line_of(std::string_view pointer) const;

  bool empty() const noexcept { return lines_.empty(); }

 private:
  friend class SourceMapBuilder;
  std::map<std::string, int, std::less<>> lines_;
};

/// 1-based line containing byte offset `offset` of `text`.
int line_at_offset(std::string_view text, std::size_t offset);

std::string escape_pointer_token(std::string_view token);

}  // namespace stretchsim
