// Copyright 2026 The hllrt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Attack-set files.
//
//   # seed=7
//   # target_C=100000
//   # phase=3
//   # estimate=98723
//   # size=4134
//   <element>
//   ...
//
// Metadata lines come first; every other line is one element, in insertion
// order. A file with no metadata is a plain element stream.

#pragma once

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "hllrt/attack.hpp"

namespace hllrt {

class AttackSetFormatError : public std::runtime_error {
 public:
  AttackSetFormatError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline void write_attack_set(std::ostream& out, const AttackSet& set) {
  out << "# seed=" << set.source_seed << '\n'
      << "# target_C=" << set.target_cardinality << '\n'
      << "# phase=" << set.phase << '\n'
      << "# estimate=" << set.achieved_estimate << '\n'
      << "# size=" << set.size() << '\n';
  for (const auto& e : set.elements) {
    if (e.empty() || e.front() == '#' || e.find_first_of("\r\n") != std::string::npos) {
      throw std::invalid_argument("element cannot be represented in a line-oriented file");
    }
    out << e << '\n';
  }
}

inline AttackSet read_attack_set(std::istream& in) {
  AttackSet set;
  std::optional<std::uint64_t> declared_size;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  bool in_body = false;

  auto parse_u64 = [&](std::string_view text, const std::string& key) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
      throw AttackSetFormatError(lineno, "bad value for '" + key + "': '" + std::string(text) + "'");
    }
    return v;
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') {
      if (in_body) throw AttackSetFormatError(lineno, "metadata after the first element");
      std::string_view body(line);
      body.remove_prefix(1);
      while (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      const auto eq = body.find('=');
      if (eq == std::string_view::npos) throw AttackSetFormatError(lineno, "metadata line without '='");
      const std::string key(body.substr(0, eq));
      const auto value = body.substr(eq + 1);
      if (key == "seed") {
        set.source_seed = parse_u64(value, key);
      } else if (key == "target_C") {
        set.target_cardinality = parse_u64(value, key);
      } else if (key == "phase") {
        const auto p = parse_u64(value, key);
        if (p > 3) throw AttackSetFormatError(lineno, "phase must be 0..3");
        set.phase = static_cast<int>(p);
      } else if (key == "estimate") {
        set.achieved_estimate = parse_u64(value, key);
      } else if (key == "size") {
        declared_size = parse_u64(value, key);
      } else {
        throw AttackSetFormatError(lineno, "unknown metadata key '" + key + "'");
      }
      continue;
    }
    if (line.empty()) continue;
    in_body = true;
    if (!seen.insert(line).second) throw AttackSetFormatError(lineno, "duplicate element '" + line + "'");
    set.elements.push_back(line);
  }
  if (declared_size && *declared_size != set.size()) {
    throw AttackSetFormatError(lineno, "size=" + std::to_string(*declared_size) + " but file holds " +
                                           std::to_string(set.size()) + " elements");
  }
  return set;
}

inline void save_attack_set(const std::string& path, const AttackSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_attack_set(out, set);
  if (!out.flush()) throw std::runtime_error("failed writing " + path);
}

inline AttackSet load_attack_set(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_attack_set(in);
}

}  // namespace hllrt
