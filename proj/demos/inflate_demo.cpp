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

// Builds a ~R element set that makes a 4096-register sketch report ~100k,
// then shows both detectors catching it.

#include <iostream>

#include "hllrt/attack.hpp"
#include "hllrt/defense.hpp"

int main() {
  hllrt::HllParams params;  // R = 4096, 6-bit registers, unsalted
  const auto result = hllrt::generate_attack_set(100'000, hllrt::inprocess_factory(params), /*seed=*/7);

  hllrt::HllSketch victim(params);
  for (const auto& e : result.v.elements) victim.insert(e);
  std::cout << "attack set size " << result.v.size() << ", estimate " << victim.estimate() << '\n';

  auto guard = hllrt::SnsGuard::with_random_salt(params);
  hllrt::StatsMonitor monitor;
  hllrt::HllSketch watched(params);
  hllrt::DetectionReport stats;
  for (const auto& e : result.v.elements) {
    guard.insert(e);
    stats = monitor.insert(watched, e);
  }
  const auto sns = guard.check();
  std::cout << "SNS: public " << sns.public_estimate << " vs shadow " << *sns.shadow_estimate
            << (sns.alarm ? " -> alarm" : " -> quiet") << '\n';
  std::cout << "stats: change fraction " << stats.change_fraction << (stats.alarm ? " -> alarm" : " -> quiet")
            << '\n';
}
