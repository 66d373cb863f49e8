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

// Sketch snapshots for debugging and persistence.
//
// Binary layout, little-endian:
//   "HLLS" | u32 register_count | u8 width | u8 salted | u64 salt | R bytes
// The JSON form carries the same fields. switch_factor is not persisted;
// decoded sketches use the default.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hllrt/sketch.hpp"

namespace hllrt {

class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t get_le(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= std::uint64_t{static_cast<unsigned char>(in[at + i])} << (8 * i);
  }
  return v;
}

}  // namespace detail

inline constexpr std::size_t kSnapshotHeaderSize = 4 + 4 + 1 + 1 + 8;

inline std::string encode_snapshot(const HllSketch& sketch) {
  const auto& p = sketch.params();
  std::string out = "HLLS";
  out.reserve(kSnapshotHeaderSize + sketch.size());
  detail::put_le(out, p.register_count, 4);
  detail::put_le(out, p.register_width, 1);
  detail::put_le(out, p.salt ? 1 : 0, 1);
  detail::put_le(out, p.salt.value_or(0), 8);
  for (auto r : sketch.registers()) out.push_back(static_cast<char>(r));
  return out;
}

inline HllSketch decode_snapshot(const std::string& bytes) {
  if (bytes.size() < kSnapshotHeaderSize || bytes.compare(0, 4, "HLLS") != 0) {
    throw SnapshotError("not an HLLS snapshot");
  }
  HllParams params;
  params.register_count = static_cast<std::uint32_t>(detail::get_le(bytes, 4, 4));
  params.register_width = static_cast<std::uint8_t>(detail::get_le(bytes, 8, 1));
  const auto salted = detail::get_le(bytes, 9, 1);
  if (salted > 1) throw SnapshotError("salted flag must be 0 or 1");
  if (salted == 1) params.salt = detail::get_le(bytes, 10, 8);
  try {
    params.validate();
  } catch (const InvalidParams& e) {
    throw SnapshotError(e.what());
  }
  if (bytes.size() != kSnapshotHeaderSize + params.register_count) {
    throw SnapshotError("snapshot length does not match register count");
  }
  std::vector<std::uint8_t> regs(bytes.begin() + kSnapshotHeaderSize, bytes.end());
  try {
    return HllSketch::from_registers(params, regs);
  } catch (const InvalidParams& e) {
    throw SnapshotError(e.what());
  }
}

inline nlohmann::json snapshot_to_json(const HllSketch& sketch) {
  const auto& p = sketch.params();
  auto regs = sketch.registers();
  return {{"magic", "HLLS"},
          {"register_count", p.register_count},
          {"register_width", p.register_width},
          {"salted", p.salt.has_value()},
          {"salt", p.salt.value_or(0)},
          {"registers", std::vector<std::uint8_t>(regs.begin(), regs.end())}};
}

inline HllSketch snapshot_from_json(const nlohmann::json& j) {
  try {
    if (j.at("magic").get<std::string>() != "HLLS") throw SnapshotError("bad magic");
    HllParams params;
    params.register_count = j.at("register_count").get<std::uint32_t>();
    params.register_width = j.at("register_width").get<std::uint8_t>();
    if (j.at("salted").get<bool>()) params.salt = j.at("salt").get<std::uint64_t>();
    params.validate();
    std::vector<std::uint8_t> regs;
    for (const auto& v : j.at("registers")) {
      const auto x = v.get<std::int64_t>();
      if (x < 0 || x > 255) throw SnapshotError("register value out of byte range");
      regs.push_back(static_cast<std::uint8_t>(x));
    }
    return HllSketch::from_registers(params, regs);
  } catch (const nlohmann::json::exception& e) {
    throw SnapshotError(std::string("malformed snapshot JSON: ") + e.what());
  } catch (const InvalidParams& e) {
    throw SnapshotError(e.what());
  }
}

}  // namespace hllrt
