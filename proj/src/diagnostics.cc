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
#include "stretchsim/diagnostics.h"

#include <fmt/format.h>

#include <algorithm>
#include <iterator>
#include <json.hpp>

namespace stretchsim {

std::string format_diagnostic(const Diagnostic &d, std::string_view source_name) {
  std::string where(source_name);
  if (d.line > 0) {
    where += fmt::format(":{}", d.line);
  }
  return fmt::format("{}: error[{}] {}: {}", where, d.code,
                     d.pointer.empty() ? "/" : d.pointer, d.message);
}

namespace {

std::string summarize(const std::vector<Diagnostic> &diagnostics) {
  if (diagnostics.empty()) {
    return "validation failed";
  }
  std::string out = fmt::format("[{}] {}: {}", diagnostics.front().code,
                                diagnostics.front().pointer, diagnostics.front().message);
  if (diagnostics.size() > 1) {
    out += fmt::format(" (and {} more)", diagnostics.size() - 1);
  }
  return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(summarize(diagnostics)), diagnostics_(std::move(diagnostics)) {}

ValidationError::ValidationError(std::string code, std::string pointer, std::string message)
    : ValidationError(std::vector<Diagnostic>{
          Diagnostic{std::move(code), std::move(pointer), 0, std::move(message)}}) {}

int line_at_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

std::string escape_pointer_token(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

namespace {

// Tracks how many newlines the JSON lexer has consumed. The lexer reads one
// character past a number, so a trailing newline is not attributed to the
// token that precedes it.
struct LineCounter {
  int newlines = 0;
  bool last_was_newline = false;

  int current_line() const { return 1 + newlines - (last_was_newline ? 1 : 0); }
};

class CountingIterator {
 public:
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char *;
  using reference = const char &;

  CountingIterator() = default;
  CountingIterator(const char *p, LineCounter *counter) : p_(p), counter_(counter) {}

  reference operator*() const { return *p_; }
  CountingIterator &operator++() {
    counter_->last_was_newline = (*p_ == '\n');
    if (counter_->last_was_newline) {
      ++counter_->newlines;
    }
    ++p_;
    return *this;
  }
  CountingIterator operator++(int) {
    CountingIterator copy = *this;
    ++*this;
    return copy;
  }
  bool operator==(const CountingIterator &other) const { return p_ == other.p_; }
  bool operator!=(const CountingIterator &other) const { return p_ != other.p_; }

 private:
  const char *p_ = nullptr;
  LineCounter *counter_ = nullptr;
};

}  // namespace

class SourceMapBuilder {
 public:
  using json = nlohmann::json;
  using number_integer_t = json::number_integer_t;
  using number_unsigned_t = json::number_unsigned_t;
  using number_float_t = json::number_float_t;
  using string_t = json::string_t;
  using binary_t = json::binary_t;

  SourceMapBuilder(SourceMap *map, const LineCounter *counter) : map_(map), counter_(counter) {}

  bool null() { return value(); }
  bool boolean(bool) { return value(); }
  bool number_integer(number_integer_t) { return value(); }
  bool number_unsigned(number_unsigned_t) { return value(); }
  bool number_float(number_float_t, const string_t &) { return value(); }
  bool string(string_t &) { return value(); }
  bool binary(binary_t &) { return value(); }

  bool start_object(std::size_t) {
    frames_.push_back(Frame{enter(), false, 0, {}});
    return true;
  }
  bool key(string_t &k) {
    frames_.back().key = escape_pointer_token(k);
    record(frames_.back().pointer + "/" + frames_.back().key);
    return true;
  }
  bool end_object() {
    frames_.pop_back();
    return true;
  }
  bool start_array(std::size_t) {
    frames_.push_back(Frame{enter(), true, 0, {}});
    return true;
  }
  bool end_array() {
    frames_.pop_back();
    return true;
  }
  bool parse_error(std::size_t, const std::string &, const nlohmann::detail::exception &) {
    return false;
  }

 private:
  struct Frame {
    std::string pointer;
    bool is_array;
    std::size_t index;
    std::string key;
  };

  // Pointer of the value about to be produced; records its line.
  std::string enter() {
    std::string pointer;
    if (!frames_.empty()) {
      Frame &top = frames_.back();
      pointer = top.pointer + "/" + (top.is_array ? std::to_string(top.index++) : top.key);
    }
    record(pointer);
    return pointer;
  }

  bool value() {
    enter();
    return true;
  }

  void record(const std::string &pointer) { map_->lines_.try_emplace(pointer, counter_->current_line()); }

  SourceMap *map_;
  const LineCounter *counter_;
  std::vector<Frame> frames_;
};

SourceMap SourceMap::build(std::string_view text) {
  SourceMap map;
  LineCounter counter;
  SourceMapBuilder builder(&map, &counter);
  CountingIterator first(text.data(), &counter);
  CountingIterator last(text.data() + text.size(), &counter);
  if (!nlohmann::json::sax_parse(first, last, &builder)) {
    return SourceMap{};
  }
  return map;
}

int SourceMap::line_of(std::string_view pointer) const {
  std::string probe(pointer);
  while (true) {
    if (auto it = lines_.find(probe); it != lines_.end()) {
      return it->second;
    }
    if (probe.empty()) {
      return 0;
    }
    auto slash = probe.rfind('/');
    probe.resize(slash == std::string::npos ? 0 : slash);
  }
}

}  // namespace stretchsim
