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
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "hllrt/attack.hpp"
#include "hllrt/oracle.hpp"
#include "hllrt/remote.hpp"

namespace hllrt {

struct ExperimentConfig {
  std::uint32_t registers = 4096;
  std::uint8_t width = 6;
  std::vector<std::uint64_t> cardinalities;
  std::vector<std::uint64_t> seeds;
  std::string target = "inproc";  // or redis://host:port/key
  unsigned threads = 0;           // 0: hardware concurrency (in-process only)

  void validate() const {
    if (cardinalities.empty()) throw std::invalid_argument("at least one cardinality is required");
    if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
    for (auto c : cardinalities) {
      if (c < 1) throw std::invalid_argument("cardinalities must be >= 1");
    }
    if (!is_inprocess()) parse_endpoint(target);
  }

  bool is_inprocess() const { return target == "inproc"; }

  HllParams params() const {
    HllParams p;
    p.register_count = registers;
    p.register_width = width;
    p.validate();
    return p;
  }
};

struct ExperimentRecord {
  std::uint32_t registers = 0;
  std::uint64_t cardinality = 0;
  std::uint64_t seed = 0;
  int phase = 0;
  std::uint64_t set_size = 0;
  std::uint64_t estimate = 0;
  std::uint64_t insertions = 0;
  double wall_time_ms = 0.0;
};

// Thrown when a run fails; carries every record completed before it.
class ExperimentAborted : public std::runtime_error {
 public:
  ExperimentAborted(const std::string& what, std::vector<ExperimentRecord> partial, bool target_failure)
      : std::runtime_error(what), partial_(std::move(partial)), target_failure_(target_failure) {}

  const std::vector<ExperimentRecord>& partial() const noexcept { return partial_; }
  // True when the oracle's service failed (as opposed to a local error).
  bool target_failure() const noexcept { return target_failure_; }

 private:
  std::vector<ExperimentRecord> partial_;
  bool target_failure_;
};

inline constexpr const char* kExperimentCsvHeader = "R,C,seed,phase,set_size,estimate,insertions,wall_time_ms";

inline void write_csv_row(std::ostream& out, const ExperimentRecord& r) {
  out << r.registers << ',' << r.cardinality << ',' << r.seed << ',' << r.phase << ',' << r.set_size << ','
      << r.estimate << ',' << r.insertions << ',' << std::fixed << std::setprecision(3) << r.wall_time_ms
      << std::defaultfloat << '\n';
}

inline OracleFactory factory_for(const ExperimentConfig& config) {
  if (config.is_inprocess()) return inprocess_factory(config.params());
  return remote_factory(parse_endpoint(config.target));
}

// One attack run (all three phases) plus a fresh-oracle verification of V,
// flattened to three records.
struct RunOutcome {
  AttackResult attack;
  std::uint64_t verify_estimate = 0;
  std::vector<ExperimentRecord> records;
};

inline RunOutcome run_single(const ExperimentConfig& config, const OracleFactory& factory, std::uint64_t c,
                             std::uint64_t seed) {
  RunOutcome out;
  out.attack = generate_attack_set(c, factory, seed);
  {
    auto oracle = factory();
    oracle->reset();
    out.verify_estimate = verify(*oracle, out.attack.v);
  }
  out.attack.reports[2].estimate = out.verify_estimate;
  out.attack.v.achieved_estimate = out.verify_estimate;
  for (const auto& rep : out.attack.reports) {
    out.records.push_back({config.registers, c, seed, rep.phase, rep.set_size, rep.estimate.value_or(0),
                           rep.insertions_performed, rep.wall_time_ms});
  }
  return out;
}

// Runs every (C, seed) pair. Records come back ordered by C, then seed, then
// phase, regardless of how many threads ran them. `on_done` (if set) sees
// each finished run, serialized.
inline std::vector<ExperimentRecord> run_experiment(
    const ExperimentConfig& config, const std::function<void(const RunOutcome&)>& on_done = {}) {
  config.validate();
  const auto factory = factory_for(config);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> jobs;
  for (auto c : config.cardinalities) {
    for (auto s : config.seeds) jobs.emplace_back(c, s);
  }
  std::vector<std::vector<ExperimentRecord>> slots(jobs.size());

  // A remote target is a single key on a single server: run sequentially.
  unsigned threads = 1;
  if (config.is_inprocess()) {
    threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  }

  std::atomic<std::size_t> next{0};
  std::mutex mu;
  std::exception_ptr failure;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        auto outcome = run_single(config, factory, jobs[i].first, jobs[i].second);
        std::lock_guard lock(mu);
        slots[i] = outcome.records;
        if (on_done) on_done(outcome);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next = jobs.size();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<ExperimentRecord> records;
  for (auto& s : slots) records.insert(records.end(), s.begin(), s.end());
  if (failure) {
    try {
      std::rethrow_exception(failure);
    } catch (const AttackAborted& e) {
      throw ExperimentAborted(e.what(), std::move(records), true);
    } catch (const OracleError& e) {
      throw ExperimentAborted(e.what(), std::move(records), true);
    } catch (const std::exception& e) {
      throw ExperimentAborted(e.what(), std::move(records), false);
    }
  }
  return records;
}

struct AggregateRow {
  std::uint64_t cardinality = 0;
  int phase = 0;
  double mean_size = 0.0;
  double mean_estimate = 0.0;
  std::size_t runs = 0;
};

// Mean over seeds per (C, phase).
inline std::vector<AggregateRow> aggregate(const std::vector<ExperimentRecord>& records) {
  std::map<std::pair<std::uint64_t, int>, AggregateRow> acc;
  for (const auto& r : records) {
    auto& row = acc[{r.cardinality, r.phase}];
    row.cardinality = r.cardinality;
    row.phase = r.phase;
    row.mean_size += static_cast<double>(r.set_size);
    row.mean_estimate += static_cast<double>(r.estimate);
    ++row.runs;
  }
  std::vector<AggregateRow> out;
  for (auto& [key, row] : acc) {
    row.mean_size /= static_cast<double>(row.runs);
    row.mean_estimate /= static_cast<double>(row.runs);
    out.push_back(row);
  }
  return out;
}

// Two tables shaped like "estimate per phase" and "set size per phase",
// one column per cardinality.
inline void print_aggregate_tables(std::ostream& out, const std::vector<AggregateRow>& rows) {
  std::vector<std::uint64_t> cs;
  for (const auto& r : rows) {
    if (std::find(cs.begin(), cs.end(), r.cardinality) == cs.end()) cs.push_back(r.cardinality);
  }
  auto table = [&](const char* title, auto pick) {
    out << title << '\n' << std::setw(12) << "C";
    for (auto c : cs) out << std::setw(12) << c;
    out << '\n';
    for (int phase = 1; phase <= 3; ++phase) {
      out << std::setw(12) << ("phase " + std::to_string(phase));
      for (auto c : cs) {
        const auto it = std::find_if(rows.begin(), rows.end(),
                                     [&](const AggregateRow& r) { return r.cardinality == c && r.phase == phase; });
        out << std::setw(12) << std::fixed << std::setprecision(1) << (it == rows.end() ? 0.0 : pick(*it));
      }
      out << '\n';
    }
    out << std::defaultfloat;
  };
  table("mean estimate", [](const AggregateRow& r) { return r.mean_estimate; });
  table("mean set size", [](const AggregateRow& r) { return r.mean_size; });
}

inline void write_plot_data(std::ostream& out, const std::vector<AggregateRow>& rows) {
  out << "C,phase,mean_size,mean_estimate\n";
  for (const auto& r : rows) {
    out << r.cardinality << ',' << r.phase << ',' << std::fixed << std::setprecision(2) << r.mean_size << ','
        << r.mean_estimate << std::defaultfloat << '\n';
  }
}

}  // namespace hllrt
