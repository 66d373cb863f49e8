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

#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hllrt/hash.hpp"

namespace hllrt {

class InvalidParams : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ParamsMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EmptyElement : public std::invalid_argument {
 public:
  EmptyElement() : std::invalid_argument("element must be non-empty") {}
};

// Seed used when a sketch is not salted. Any fixed value works; all unsalted
// sketches built from this header share it and are therefore mergeable.
inline constexpr std::uint64_t kUnsaltedSeed = 0xadc83b19ULL;

struct HllParams {
  std::uint32_t register_count = 4096;
  std::uint8_t register_width = 6;
  std::optional<std::uint64_t> salt;
  double switch_factor = 2.5;

  static constexpr std::uint32_t kMinRegisters = 16;
  static constexpr std::uint32_t kMaxRegisters = 1u << 20;

  // Throws InvalidParams describing the first violated constraint.
  void validate() const {
    if (register_count < kMinRegisters || register_count > kMaxRegisters ||
        !std::has_single_bit(register_count)) {
      throw InvalidParams("register_count must be a power of two in [16, 2^20], got " +
                          std::to_string(register_count));
    }
    if (register_width < 4 || register_width > 8) {
      throw InvalidParams("register_width must be in [4, 8], got " +
                          std::to_string(register_width));
    }
    if (!(switch_factor > 0.0) || !std::isfinite(switch_factor)) {
      throw InvalidParams("switch_factor must be a positive finite number");
    }
  }

  std::uint32_t index_bits() const noexcept {
    return static_cast<std::uint32_t>(std::countr_zero(register_count));
  }
  std::uint8_t max_register_value() const noexcept {
    return static_cast<std::uint8_t>((1u << register_width) - 1u);
  }
  std::uint64_t seed() const noexcept { return salt.value_or(kUnsaltedSeed); }

  // Same R, width and salt: the sketches hash identically and can be merged.
  // switch_factor only affects estimation, so it is not compared.
  bool hash_compatible(const HllParams& other) const noexcept {
    return register_count == other.register_count && register_width == other.register_width &&
           salt == other.salt;
  }

  friend bool operator==(const HllParams&, const HllParams&) = default;
};

// Bias-correction constant for the harmonic-mean estimator.
inline double alpha_for(std::uint32_t register_count) noexcept {
  switch (register_count) {
    case 16: return 0.673;
    case 32: return 0.697;
    case 64: return 0.709;
    default: return 0.7213 / (1.0 + 1.079 / static_cast<double>(register_count));
  }
}

struct HashSplit {
  std::uint32_t index = 0;
  std::uint8_t rank = 1;

  friend bool operator==(const HashSplit&, const HashSplit&) = default;
};

// Low log2(R) bits of the hash pick the register; the rank is one plus the
// number of leading zeros in the remaining 64 - log2(R) bits, clamped to the
// largest value a register can hold.
inline HashSplit hash_split(std::string_view element, const HllParams& params) {
  if (element.empty()) throw EmptyElement();
  const std::uint64_t h = murmur64a(element, params.seed());
  const std::uint32_t p = params.index_bits();
  const std::uint32_t rest_bits = 64 - p;
  const std::uint64_t g = h >> p;
  const std::uint32_t leading = g == 0 ? rest_bits
                                       : static_cast<std::uint32_t>(std::countl_zero(g)) - p;
  const std::uint32_t rank = std::min<std::uint32_t>(leading + 1, params.max_register_value());
  return {static_cast<std::uint32_t>(h & (params.register_count - 1)),
          static_cast<std::uint8_t>(rank)};
}

struct InsertOutcome {
  std::uint32_t index = 0;
  std::uint8_t old_value = 0;
  std::uint8_t new_value = 0;

  bool changed() const noexcept { return new_value > old_value; }
  int increment() const noexcept { return int{new_value} - int{old_value}; }
};

class HllSketch {
 public:
  explicit HllSketch(HllParams params = {}) : params_(std::move(params)) {
    params_.validate();
    registers_.assign(params_.register_count, 0);
    histogram_.fill(0);
    histogram_[0] = params_.register_count;
  }

  // Rebuilds a sketch from a register array, e.g. a decoded snapshot.
  static HllSketch from_registers(HllParams params, std::span<const std::uint8_t> registers) {
    HllSketch s(std::move(params));
    if (registers.size() != s.params_.register_count) {
      throw InvalidParams("register array has " + std::to_string(registers.size()) +
                          " entries, expected " + std::to_string(s.params_.register_count));
    }
    for (std::size_t i = 0; i < registers.size(); ++i) {
      if (registers[i] > s.params_.max_register_value()) {
        throw InvalidParams("register " + std::to_string(i) + " holds " +
                            std::to_string(registers[i]) + ", above the width limit");
      }
      s.set_register(static_cast<std::uint32_t>(i), registers[i]);
    }
    return s;
  }

  const HllParams& params() const noexcept { return params_; }
  std::span<const std::uint8_t> registers() const noexcept { return registers_; }
  std::uint32_t size() const noexcept { return params_.register_count; }

  InsertOutcome insert(const HashSplit& split) {
    InsertOutcome out{split.index, registers_[split.index], registers_[split.index]};
    if (split.rank > out.old_value) {
      set_register(split.index, split.rank);
      out.new_value = split.rank;
    }
    return out;
  }

  InsertOutcome insert_observed(std::string_view element) {
    return insert(hash_split(element, params_));
  }

  // Returns true iff the target register grew.
  bool insert(std::string_view element) { return insert_observed(element).changed(); }

  std::uint32_t zero_registers() const noexcept { return histogram_[0]; }

  // Z = sum of 2^-r_i, evaluated from the register-value histogram so the
  // result depends only on the register contents, not on insertion history.
  double harmonic_denominator() const noexcept {
    double z = 0.0;
    for (std::size_t v = histogram_.size(); v-- > 0;) {
      if (histogram_[v] != 0) z += std::ldexp(static_cast<double>(histogram_[v]), -static_cast<int>(v));
    }
    return z;
  }

  double raw_estimate() const noexcept {
    const double r = params_.register_count;
    return alpha_for(params_.register_count) * r * r / harmonic_denominator();
  }

  // R * ln(R / V) over V zero registers; falls back to the raw estimate when
  // every register is set.
  double linear_counting_estimate() const noexcept {
    const std::uint32_t zeros = zero_registers();
    if (zeros == 0) return raw_estimate();
    const double r = params_.register_count;
    return r * std::log(r / static_cast<double>(zeros));
  }

  std::uint64_t estimate() const noexcept {
    const double r = params_.register_count;
    if (zero_registers() > 0) {
      const double lc = linear_counting_estimate();
      if (lc <= params_.switch_factor * r) return static_cast<std::uint64_t>(std::llround(lc));
    }
    return static_cast<std::uint64_t>(std::llround(raw_estimate()));
  }

  void clear() {
    std::fill(registers_.begin(), registers_.end(), std::uint8_t{0});
    histogram_.fill(0);
    histogram_[0] = params_.register_count;
  }

  friend bool operator==(const HllSketch& a, const HllSketch& b) {
    return a.params_.hash_compatible(b.params_) && a.registers_ == b.registers_;
  }

 private:
  void set_register(std::uint32_t index, std::uint8_t value) {
    --histogram_[registers_[index]];
    ++histogram_[value];
    registers_[index] = value;
  }

  HllParams params_;
  std::vector<std::uint8_t> registers_;
  std::array<std::uint32_t, 256> histogram_{};
};

// Register-wise maximum of two sketches built with the same hashing.
inline HllSketch merge(const HllSketch& a, const HllSketch& b) {
  if (!a.params().hash_compatible(b.params())) {
    throw ParamsMismatch("cannot merge sketches with different register count, width or salt");
  }
  std::vector<std::uint8_t> out(a.size());
  const auto ra = a.registers();
  const auto rb = b.registers();
  std::transform(ra.begin(), ra.end(), rb.begin(), out.begin(),
                 [](std::uint8_t x, std::uint8_t y) { return std::max(x, y); });
  return HllSketch::from_registers(a.params(), out);
}

// For every register, the first element of `stream` that brought it to its
// final value. Inserting the returned (at most R) elements into an empty
// sketch reproduces the register array of the whole stream.
template <typename Range>
std::vector<std::string> witness_set(const HllParams& params, const Range& stream) {
  HllSketch full(params);
  std::vector<std::optional<std::string>> first_at(params.register_count);
  for (const auto& element : stream) {
    const auto out = full.insert_observed(element);
    if (out.changed()) first_at[out.index] = std::string(element);
  }
  std::vector<std::string> witnesses;
  for (auto& w : first_at) {
    if (w) witnesses.push_back(std::move(*w));
  }
  return witnesses;
}

}  // namespace hllrt
