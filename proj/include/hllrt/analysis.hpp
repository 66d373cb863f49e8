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

// Closed-form predictions for why phase 1 of the inflation attack misses
// register maxima, and how much estimate it loses as a result.
//
// Notation: R registers, N (or C) distinct stream elements, C_est the
// current estimate, alpha the harmonic-mean constant, Z = sum 2^-r_i.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "hllrt/sketch.hpp"

namespace hllrt::analysis {

// Registers whose final maximum arrives while the low-range estimator is in
// use but is not the first element in that register: about 1.5 R^2 / N.
inline double expected_missed_lpca(std::uint64_t registers, std::uint64_t n) {
  if (n < registers) throw std::domain_error("expected_missed_lpca needs N >= R");
  const double r = static_cast<double>(registers);
  return 1.5 * r * r / static_cast<double>(n);
}

// Change in Z when a register moves from c_old to c_new.
inline double z_delta(int c_old, int c_new) {
  if (c_new < c_old) throw std::domain_error("z_delta needs c_new >= c_old");
  if (c_old < 0) throw std::domain_error("register values are non-negative");
  return std::ldexp(1.0, -c_old) - std::ldexp(1.0, -c_new);
}

struct Increment {
  double exact = 0.0;
  double approx = 0.0;
};

// Estimate change caused by a Z decrease of `delta`.
//   exact:  alpha R^2 delta / (Z (Z - delta))
//   approx: delta C_est^2 / (alpha R^2)
inline Increment estimate_increment(double delta, std::uint64_t c_est, std::uint64_t registers, double alpha,
                                    double z) {
  if (!(z > delta)) throw std::domain_error("estimate_increment needs Z > delta");
  if (delta < 0.0) throw std::domain_error("delta must be non-negative");
  const double r2 = static_cast<double>(registers) * static_cast<double>(registers);
  const double c = static_cast<double>(c_est);
  return {alpha * r2 * delta / (z * (z - delta)), delta * c * c / (alpha * r2)};
}

// Largest delta whose increment stays below 0.5 and so can vanish under
// integer rounding: 0.5 alpha R^2 / C_est^2.
inline double undetectable_delta_threshold(std::uint64_t registers, std::uint64_t c_est, double alpha) {
  if (c_est < 1) throw std::domain_error("C_est must be at least 1");
  const double r = static_cast<double>(registers);
  const double c = static_cast<double>(c_est);
  return 0.5 * alpha * r * r / (c * c);
}

// A register must hold more than this for an increase to be invisible:
// 1 + log2(alpha) + 2 log2(C_est / R).
inline double miss_condition_register_value(std::uint64_t registers, std::uint64_t c_est, double alpha) {
  const double ratio = static_cast<double>(c_est) / static_cast<double>(registers);
  return 1.0 + std::log2(alpha) + 2.0 * std::log2(ratio);
}

// Typical register value at estimate C_est: 1 + log2(C_est / R).
inline double expected_register_value(std::uint64_t registers, std::uint64_t c_est) {
  return 1.0 + std::log2(static_cast<double>(c_est) / static_cast<double>(registers));
}

struct Phase1RatioModel {
  // Multiplier on R^2 / C for the number of affected registers.
  double affected_scale = 1.0;
  // Mean 2^-r of an affected register after it falls back to its first
  // element (2^-2 for a value of two).
  double reverted_contribution = 0.25;
};

// Ratio estimate(phase-1 set) / estimate(full stream). About (R^2/C) *
// affected_scale registers fall back from a typical full-stream contribution
// of R/C to reverted_contribution, which grows the denominator:
//   Z_a = Z_full + affected_scale (R^2/C) (reverted_contribution - R/C)
//   ratio = Z_full / Z_a
inline double predicted_phase1_ratio(std::uint64_t registers, std::uint64_t c, double z_full,
                                     Phase1RatioModel model = {}) {
  if (c < 5 * registers) throw std::domain_error("predicted_phase1_ratio needs C >= 5R");
  if (!(z_full > 0.0)) throw std::domain_error("Z_full must be positive");
  const double r = static_cast<double>(registers);
  const double cc = static_cast<double>(c);
  const double adjusted = z_full + model.affected_scale * (r * r / cc) * (model.reverted_contribution - r / cc);
  return z_full / adjusted;
}

// Z of a typical full-stream sketch at cardinality C, from the harmonic-mean
// estimator solved for Z.
inline double typical_z(std::uint64_t registers, std::uint64_t c) {
  const double r = static_cast<double>(registers);
  return alpha_for(static_cast<std::uint32_t>(registers)) * r * r / static_cast<double>(c);
}

}  // namespace hllrt::analysis
