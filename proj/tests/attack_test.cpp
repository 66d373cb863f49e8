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


#include "hllrt/attack.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include "hllrt/analysis.hpp"

namespace hllrt {
namespace {

HllParams params_with(std::uint32_t r) {
  HllParams p;
  p.register_count = r;
  return p;
}

std::vector<std::string> stream_of(std::uint64_t seed, std::uint64_t c) {
  ElementGenerator g(seed);
  std::vector<std::string> out;
  for (std::uint64_t i = 0; i < c; ++i) out.push_back(g.next());
  return out;
}

// Records every call so tests can check what the attack actually asked.
class LoggingOracle final : public CardinalityOracle {
 public:
  struct Log {
    std::vector<std::string> calls;
  };
  LoggingOracle(HllParams p, std::shared_ptr<Log> log) : sketch_(p), log_(std::move(log)) {}
  void reset() override {
    log_->calls.push_back("reset");
    sketch_.clear();
  }
  void insert(std::string_view e) override {
    log_->calls.push_back("insert");
    sketch_.insert(e);
  }
  std::uint64_t estimate() override {
    log_->calls.push_back("estimate");
    return sketch_.estimate();
  }

 private:
  HllSketch sketch_;
  std::shared_ptr<Log> log_;
};

TEST(ElementGenerator, DeterministicAndDistinct) {
  ElementGenerator a(3), b(3), c(4);
  std::unordered_set<std::string> seen;
  for (int i = 0; i < 10000; ++i) {
    const auto x = a.next();
    EXPECT_EQ(x, b.next());
    EXPECT_EQ(x.size(), 16u);
    EXPECT_TRUE(seen.insert(x).second);
  }
  EXPECT_NE(ElementGenerator(3).element(0), c.element(0));
  a.rewind();
  EXPECT_EQ(a.next(), ElementGenerator(3).element(0));
}

TEST(Phase1, SingleElement) {
  auto o = make_oracle(params_with(4096));
  const auto [y, rep] = phase1(*o, ElementGenerator(1), 1);
  ASSERT_EQ(y.size(), 1u);
  EXPECT_EQ(y.elements[0], ElementGenerator(1).element(0));
  EXPECT_EQ(rep.oracle_estimate, 1u);
  EXPECT_THROW(phase1(*o, ElementGenerator(1), 0), std::invalid_argument);
}

TEST(Phase1, KeepsExactlyTheEstimateRaisingElements) {
  const auto p = params_with(16);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto o = make_oracle(p);
    const auto [y, rep] = phase1(*o, ElementGenerator(seed), 200);
    // Replay the stream on a bare sketch and rebuild the expected set.
    HllSketch s(p);
    std::vector<std::string> expected;
    std::uint64_t prev = s.estimate();
    for (const auto& e : stream_of(seed, 200)) {
      s.insert(e);
      if (s.estimate() > prev) expected.push_back(e);
      prev = s.estimate();
    }
    EXPECT_EQ(y.elements, expected);
    EXPECT_EQ(rep.insertions_performed, 200u);
    EXPECT_EQ(rep.estimate_queries, 201u);
    EXPECT_EQ(rep.oracle_estimate, s.estimate());
  }
}

TEST(Phase2, NoAdditionsWhenMaximaAlreadyPresent) {
  const auto p = params_with(256);
  const std::uint64_t c = 5000;
  AttackSet y;
  y.phase = 1;
  y.target_cardinality = c;
  y.source_seed = 17;
  y.elements = witness_set(p, stream_of(17, c));
  auto o = make_oracle(p);
  const auto [y2, rep] = phase2(*o, y, ElementGenerator(17));
  EXPECT_EQ(y2.elements, y.elements);
  EXPECT_EQ(rep.insertions_performed, c);  // preload plus the rest of the stream
}

TEST(Phase2, AdditionsTrackTheMissedMaximaCount) {
  const auto p = params_with(256);
  const std::uint64_t c = 100000;
  double additions = 0;
  const int seeds = 20;
  for (int seed = 1; seed <= seeds; ++seed) {
    auto o1 = make_oracle(p);
    const auto [y, r1] = phase1(*o1, ElementGenerator(seed), c);
    auto o2 = make_oracle(p);
    const auto [y2, r2] = phase2(*o2, y, ElementGenerator(seed));
    ASSERT_GE(y2.size(), y.size());
    additions += static_cast<double>(y2.size() - y.size());
  }
  const double mean = additions / seeds;
  const double predicted = analysis::expected_missed_lpca(256, c);
  EXPECT_GE(mean, predicted / 3) << "mean additions " << mean;
  EXPECT_LE(mean, predicted * 3) << "mean additions " << mean;
}

TEST(Phase3, OneElementPerRegisterIsReversed) {
  const auto p = params_with(64);
  // 32 elements on distinct registers: every insertion fills a zero
  // register while the low-range estimator is in use.
  AttackSet y2;
  y2.phase = 2;
  y2.target_cardinality = 1;
  std::set<std::uint32_t> used;
  ElementGenerator g(5);
  while (y2.size() < 32) {
    auto e = g.next();
    if (used.insert(hash_split(e, p).index).second) y2.elements.push_back(std::move(e));
  }
  auto o = make_oracle(p);
  const auto [v, rep] = phase3(*o, y2);
  std::vector<std::string> reversed(y2.elements.rbegin(), y2.elements.rend());
  EXPECT_EQ(v.elements, reversed);
}

TEST(Phase3, RegistersAreDominatedByPhaseTwo) {
  const auto p = params_with(64);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto res = generate_attack_set(2000, inprocess_factory(p), seed);
    HllSketch from_v(p), from_y2(p);
    for (const auto& e : res.v.elements) from_v.insert(e);
    for (const auto& e : res.y2.elements) from_y2.insert(e);
    for (std::uint32_t i = 0; i < 64; ++i) ASSERT_LE(from_v.registers()[i], from_y2.registers()[i]);
    // V is a subset of Y2 and of the stream.
    const std::unordered_set<std::string> y2(res.y2.elements.begin(), res.y2.elements.end());
    for (const auto& e : res.v.elements) ASSERT_TRUE(y2.count(e));
  }
}

TEST(Attack, ReportsAndBounds) {
  const auto p = params_with(1024);
  const std::uint64_t c = 30000;
  const auto counts = std::make_shared<CountingOracle::Counts>();
  const auto res = generate_attack_set(c, counting_factory(inprocess_factory(p), counts), 2);
  EXPECT_EQ(res.reports[0].phase, 1);
  EXPECT_EQ(res.reports[2].phase, 3);
  EXPECT_EQ(res.reports[0].set_size, res.y1.size());
  EXPECT_EQ(res.reports[1].set_size, res.y2.size());
  EXPECT_EQ(res.reports[2].set_size, res.v.size());
  EXPECT_LE(*res.reports[0].estimate, *res.reports[1].estimate);
  EXPECT_EQ(counts->insertions, res.total_insertions());
  EXPECT_EQ(res.total_insertions(), 2 * c + res.y2.size());
  EXPECT_LE(res.total_insertions(), 3 * c);
  EXPECT_EQ(counts->resets, 3u);
  EXPECT_NEAR(static_cast<double>(res.reports[2].oracle_estimate), static_cast<double>(c), 0.05 * c);
  EXPECT_LE(res.v.size(), 1024u);
}

TEST(Attack, UsesOnlyTheBlackBoxInterface) {
  const auto log = std::make_shared<LoggingOracle::Log>();
  const auto p = params_with(64);
  const OracleFactory factory = [&] { return std::make_unique<LoggingOracle>(p, log); };
  const auto res = generate_attack_set(500, factory, 3);
  std::size_t inserts = 0, estimates = 0;
  for (const auto& c : log->calls) {
    inserts += c == "insert";
    estimates += c == "estimate";
  }
  EXPECT_EQ(inserts, res.total_insertions());
  // One baseline query per phase, one query per filtered insertion, none
  // for the phase-2 preload.
  EXPECT_EQ(estimates, 3 + 500 + (500 - res.y1.size()) + res.y2.size());
}

TEST(Attack, TransfersToAnIndependentOracle) {
  const auto p = params_with(2048);
  const auto res = generate_attack_set(40000, inprocess_factory(p), 4);
  InProcessOracle other(p);
  EXPECT_EQ(verify(other, res.v), res.reports[2].oracle_estimate);
}

TEST(Verify, EmptyAndPermutations) {
  const auto p = params_with(1024);
  auto o = make_oracle(p);
  EXPECT_EQ(verify(*o, AttackSet{}), 0u);
  const auto res = generate_attack_set(20000, inprocess_factory(p), 6);
  auto base = make_oracle(p);
  const auto expected = verify(*base, res.v);
  auto shuffled = res.v;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(shuffled.elements.begin(), shuffled.elements.end(), rng);
    auto fresh = make_oracle(p);
    EXPECT_EQ(verify(*fresh, shuffled), expected);
  }
}

TEST(Attack, ReferenceScaleRuns) {
  // Full-size runs at R=4096: phase-2 and phase-3 sizes and estimates.
  const auto p = params_with(4096);
  const auto r20 = generate_attack_set(20000, inprocess_factory(p), 1);
  EXPECT_NEAR(static_cast<double>(r20.y2.size()), 7321.0, 0.10 * 7321);
  EXPECT_NEAR(static_cast<double>(*r20.reports[1].estimate), 19739.0, 0.10 * 19739);
  EXPECT_NEAR(static_cast<double>(r20.v.size()), 4096.0, 0.02 * 4096);
  EXPECT_NEAR(static_cast<double>(r20.reports[2].oracle_estimate), 20000.0, 0.03 * 20000);

  const auto r60 = generate_attack_set(60000, inprocess_factory(p), 1);
  auto o60 = make_oracle(p);
  EXPECT_NEAR(static_cast<double>(verify(*o60, r60.v)), 60000.0, 0.03 * 60000);

  const auto r100 = generate_attack_set(100000, inprocess_factory(p), 1);
  auto o100 = make_oracle(p);
  EXPECT_NEAR(static_cast<double>(r100.v.size()), 4096.0, 0.02 * 4096);
  EXPECT_NEAR(static_cast<double>(verify(*o100, r100.v)), 100000.0, 0.03 * 100000);
}

TEST(Attack, ResumeFromEitherCheckpoint) {
  const auto p = params_with(256);
  const auto full = generate_attack_set(4000, inprocess_factory(p), 8);
  const auto from1 = resume_attack(full.y1, inprocess_factory(p));
  EXPECT_EQ(from1.v.elements, full.v.elements);
  EXPECT_EQ(from1.y2.elements, full.y2.elements);
  const auto from2 = resume_attack(full.y2, inprocess_factory(p));
  EXPECT_EQ(from2.v.elements, full.v.elements);
  EXPECT_THROW(resume_attack(full.v, inprocess_factory(p)), std::invalid_argument);
}

TEST(Attack, FailingFactoryAbortsWithCheckpoint) {
  const auto p = params_with(256);
  int made = 0;
  const OracleFactory flaky = [&]() -> std::unique_ptr<CardinalityOracle> {
    if (++made == 3) throw OracleError("service unavailable");
    return make_oracle(p);
  };
  try {
    generate_attack_set(1000, flaky, 1);
    FAIL() << "expected AttackAborted";
  } catch (const AttackAborted& e) {
    EXPECT_EQ(e.failed_phase(), 3);
    ASSERT_TRUE(e.checkpoint());
    EXPECT_EQ(e.checkpoint()->phase, 2);
    EXPECT_EQ(e.completed_reports().size(), 2u);
  }
}

}  // namespace
}  // namespace hllrt
