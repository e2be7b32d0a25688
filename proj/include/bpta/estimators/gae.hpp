// Copyright 2026 The BPTA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "bpta/autodiff/matrix.hpp"
#include "bpta/error.hpp"

namespace bpta::estimators {

struct AdvantageBatch {
  std::vector<double> advantages;
  std::vector<double> targets;  // advantage + V(s), before any normalisation
  double mean = 0.0;
  double std = 0.0;
};

// Generalised advantage estimation over one trajectory segment.
// `values` has one more entry than `rewards`: the bootstrap value of the
// state after the last step. A done flag cuts both the bootstrap and the
// recursion.
inline AdvantageBatch gae(std::span<const double> rewards, std::span<const double> values,
                          std::span<const bool> dones, double gamma, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || dones.size() != n) {
    throw ShapeError("gae", "expected values = rewards + 1 and dones = rewards");
  }
  if (!(gamma > 0.0 && gamma <= 1.0) || !(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("gae", "gamma must lie in (0, 1] and lambda in [0, 1]");
  }
  AdvantageBatch out;
  out.advantages.assign(n, 0.0);
  out.targets.assign(n, 0.0);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double live = dones[t] ? 0.0 : 1.0;
    const double delta = rewards[t] + gamma * values[t + 1] * live - values[t];
    running = delta + gamma * lambda * live * running;
    out.advantages[t] = running;
    out.targets[t] = running + values[t];
  }
  double s = 0.0;
  for (double a : out.advantages) s += a;
  out.mean = n ? s / static_cast<double>(n) : 0.0;
  double v = 0.0;
  for (double a : out.advantages) v += (a - out.mean) * (a - out.mean);
  out.std = n ? std::sqrt(v / static_cast<double>(n)) : 0.0;
  return out;
}

// Centres to mean 0 and scales to unit (population) standard deviation.
// A constant batch is only centred.
inline std::vector<double> normalize(std::span<const double> x) {
  const std::size_t n = x.size();
  if (n == 0) return {};
  double s = 0.0;
  for (double a : x) s += a;
  const double mean = s / static_cast<double>(n);
  double v = 0.0;
  for (double a : x) v += (a - mean) * (a - mean);
  const double sd = std::sqrt(v / static_cast<double>(n));
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = sd > 0.0 ? (x[i] - mean) / sd : x[i] - mean;
  return out;
}

}  // namespace bpta::estimators
