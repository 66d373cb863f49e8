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

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

#include "hllrt/sketch.hpp"

namespace hllrt {

// Base for failures of the service behind an oracle (network, protocol,
// server-side errors). The attack turns these into resumable aborts.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Black-box view of a cardinality sketch: insert elements and read integer
// estimates. Nothing about registers, hashing or R is reachable from here.
//
// Contract: estimate() has no side effects on the estimated set; after
// reset() it returns 0; re-inserting an element never changes it.
class CardinalityOracle {
 public:
  virtual ~CardinalityOracle() = default;

  virtual void reset() = 0;
  virtual void insert(std::string_view element) = 0;
  virtual std::uint64_t estimate() = 0;

  // insert() followed by estimate(). Remote oracles pipeline the pair.
  virtual std::uint64_t insert_and_estimate(std::string_view element) {
    insert(element);
    return estimate();
  }

  // Inserts without intermediate estimates. Remote oracles pipeline these.
  virtual void insert_all(std::span<const std::string> elements) {
    for (const auto& e : elements) insert(e);
  }
};

using OracleFactory = std::function<std::unique_ptr<CardinalityOracle>()>;

class InProcessOracle final : public CardinalityOracle {
 public:
  explicit InProcessOracle(HllParams params) : sketch_(std::move(params)) {}

  void reset() override { sketch_.clear(); }
  void insert(std::string_view element) override { sketch_.insert(element); }
  std::uint64_t estimate() override { return sketch_.estimate(); }

  // Defender-side access; the attack only ever sees the base class.
  const HllSketch& sketch() const noexcept { return sketch_; }

 private:
  HllSketch sketch_;
};

inline std::unique_ptr<CardinalityOracle> make_oracle(const HllParams& params) {
  return std::make_unique<InProcessOracle>(params);
}

// Every oracle from the factory hashes identically, the attacker's
// "same hash functions" capability.
inline OracleFactory inprocess_factory(HllParams params) {
  params.validate();
  return [params] { return make_oracle(params); };
}

// Decorator counting traffic through an oracle.
class CountingOracle final : public CardinalityOracle {
 public:
  struct Counts {
    std::uint64_t resets = 0;
    std::uint64_t insertions = 0;
    std::uint64_t estimates = 0;
  };

  CountingOracle(std::unique_ptr<CardinalityOracle> inner, std::shared_ptr<Counts> counts)
      : inner_(std::move(inner)), counts_(std::move(counts)) {}

  void reset() override {
    ++counts_->resets;
    inner_->reset();
  }
  void insert(std::string_view element) override {
    ++counts_->insertions;
    inner_->insert(element);
  }
  std::uint64_t estimate() override {
    ++counts_->estimates;
    return inner_->estimate();
  }
  std::uint64_t insert_and_estimate(std::string_view element) override {
    ++counts_->insertions;
    ++counts_->estimates;
    return inner_->insert_and_estimate(element);
  }
  void insert_all(std::span<const std::string> elements) override {
    counts_->insertions += elements.size();
    inner_->insert_all(elements);
  }

 private:
  std::unique_ptr<CardinalityOracle> inner_;
  std::shared_ptr<Counts> counts_;
};

inline OracleFactory counting_factory(OracleFactory inner,
                                      std::shared_ptr<CountingOracle::Counts> counts) {
  return [inner = std::move(inner), counts = std::move(counts)] {
    return std::make_unique<CountingOracle>(inner(), counts);
  };
}

}  // namespace hllrt
