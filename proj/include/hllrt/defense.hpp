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

// Detectors for crafted insertion sets.
//
// SnsGuard feeds every element to a mergeable public sketch and to a shadow
// sketch hashed with a secret salt. A set crafted against the public hashing
// looks like |set| random elements to the shadow, so the two estimates split.
//
// StatsMonitor watches the per-insertion register outcome: once the
// estimate exceeds R, honest traffic rarely changes a register and, when it
// does, raises it by about two on average.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "hllrt/sketch.hpp"

namespace hllrt {

enum class Detector { kSns, kStats };

inline const char* to_string(Detector d) { return d == Detector::kSns ? "SNS" : "STATS"; }

struct DetectionReport {
  bool alarm = false;
  Detector detector = Detector::kSns;
  std::uint64_t public_estimate = 0;
  std::optional<std::uint64_t> shadow_estimate;  // SNS only
  std::optional<double> divergence;              // SNS only
  double change_fraction = 0.0;
  std::optional<double> mean_increment;          // STATS only
};

inline nlohmann::json to_json(const DetectionReport& r) {
  nlohmann::json j{{"alarm", r.alarm},
                   {"detector", to_string(r.detector)},
                   {"public_estimate", r.public_estimate},
                   {"change_fraction", r.change_fraction}};
  if (r.shadow_estimate) j["shadow_estimate"] = *r.shadow_estimate;
  if (r.divergence) j["divergence"] = *r.divergence;
  if (r.mean_increment) j["mean_increment"] = *r.mean_increment;
  return j;
}

// Five standard errors of a single HLL estimate.
inline double default_sns_threshold(std::uint32_t register_count) {
  return 5.0 * 1.04 / std::sqrt(static_cast<double>(register_count));
}

inline std::uint64_t random_salt() {
  std::random_device rd;
  return (std::uint64_t{rd()} << 32) ^ rd();
}

class SnsGuard {
 public:
  // `public_params` is the shared (normally unsalted) configuration; the
  // shadow copies it with `shadow_salt`.
  SnsGuard(HllParams public_params, std::uint64_t shadow_salt, std::optional<double> threshold = {})
      : public_(public_params), shadow_(with_salt(public_params, shadow_salt)),
        threshold_(threshold.value_or(default_sns_threshold(public_params.register_count))) {
    if (public_params.salt && *public_params.salt == shadow_salt) {
      throw InvalidParams("shadow salt must differ from the public hashing");
    }
    if (!(threshold_ > 0.0)) throw InvalidParams("SNS threshold must be positive");
  }

  static SnsGuard with_random_salt(HllParams public_params, std::optional<double> threshold = {}) {
    std::uint64_t salt = random_salt();
    while (public_params.salt && salt == *public_params.salt) salt = random_salt();
    return SnsGuard(std::move(public_params), salt, threshold);
  }

  void insert(std::string_view element) {
    if (public_.insert(element)) ++changes_;
    shadow_.insert(element);
    ++insertions_;
  }

  // Alarm iff |E_pub - E_shadow| / max(E_pub, E_shadow, 1) > threshold.
  DetectionReport check() const {
    const auto pub = public_.estimate();
    const auto sh = shadow_.estimate();
    const double hi = static_cast<double>(std::max<std::uint64_t>({pub, sh, 1}));
    const double div = std::abs(static_cast<double>(pub) - static_cast<double>(sh)) / hi;
    DetectionReport r;
    r.detector = Detector::kSns;
    r.alarm = div > threshold_;
    r.public_estimate = pub;
    r.shadow_estimate = sh;
    r.divergence = div;
    r.change_fraction = insertions_ == 0 ? 0.0 : static_cast<double>(changes_) / static_cast<double>(insertions_);
    return r;
  }

  const HllSketch& public_sketch() const noexcept { return public_; }
  double threshold() const noexcept { return threshold_; }

 private:
  static HllParams with_salt(HllParams p, std::uint64_t salt) {
    p.salt = salt;
    return p;
  }

  HllSketch public_;
  HllSketch shadow_;  // never exposed
  double threshold_;
  std::uint64_t insertions_ = 0;
  std::uint64_t changes_ = 0;
};

struct StatsMonitorConfig {
  std::size_t window = 0;  // 0 selects 4 * R at the first observation
  double fraction_threshold = 0.5;
  double increment_threshold = 4.0;
};

class StatsMonitor {
 public:
  explicit StatsMonitor(StatsMonitorConfig config = {}) : config_(config) {
    if (config_.fraction_threshold < 0.0 || config_.increment_threshold < 0.0) {
      throw InvalidParams("stats thresholds must be non-negative");
    }
  }

  // Records one insertion outcome. The change fraction is taken over the
  // insertions currently in the window; the mean increment over the changing
  // ones among them.
  DetectionReport observe(bool changed, int increment, std::uint64_t current_estimate,
                          std::uint32_t register_count) {
    if (changed && increment < 1) throw std::invalid_argument("a changing insertion has increment >= 1");
    if (config_.window == 0) config_.window = 4 * static_cast<std::size_t>(register_count);
    window_.push_back({changed, changed ? increment : 0});
    changed_ += changed ? 1 : 0;
    increment_sum_ += changed ? increment : 0;
    if (window_.size() > config_.window) {
      const auto old = window_.front();
      window_.pop_front();
      changed_ -= old.changed ? 1 : 0;
      increment_sum_ -= old.increment;
    }

    DetectionReport r;
    r.detector = Detector::kStats;
    r.public_estimate = current_estimate;
    r.change_fraction = static_cast<double>(changed_) / static_cast<double>(window_.size());
    r.mean_increment =
        changed_ == 0 ? 0.0 : static_cast<double>(increment_sum_) / static_cast<double>(changed_);
    r.alarm = current_estimate > register_count &&
              (r.change_fraction > config_.fraction_threshold || *r.mean_increment > config_.increment_threshold);
    return r;
  }

  // Inserts into `sketch` and observes the outcome.
  DetectionReport insert(HllSketch& sketch, std::string_view element) {
    const auto out = sketch.insert_observed(element);
    return observe(out.changed(), out.increment(), sketch.estimate(), sketch.size());
  }

  const StatsMonitorConfig& config() const noexcept { return config_; }

 private:
  struct Outcome {
    bool changed;
    int increment;
  };

  StatsMonitorConfig config_;
  std::deque<Outcome> window_;
  std::uint64_t changed_ = 0;
  std::int64_t increment_sum_ = 0;
};

}  // namespace hllrt
