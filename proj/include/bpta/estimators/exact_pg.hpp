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

#include <array>
#include <cmath>

#include "bpta/envs/matrix_game.hpp"

namespace bpta::estimators {

// Tabular softmax policies for a two-player matrix game: player 1 has three
// logits, player 2 has one row of three logits per player-1 action.
struct TabularJointPolicy {
  std::array<double, 3> logits1{};
  std::array<std::array<double, 3>, 3> logits2{};
};

struct ExactPolicyGradient {
  double value = 0.0;  // expected per-step payoff
  std::array<double, 3> grad1{};
  std::array<std::array<double, 3>, 3> grad2{};
  std::array<double, 3> p1{};
  std::array<std::array<double, 3>, 3> p2{};
};

inline std::array<double, 3> softmax3(const std::array<double, 3>& z) {
  const double mx = std::max({z[0], z[1], z[2]});
  std::array<double, 3> p{};
  double s = 0.0;
  for (std::size_t k = 0; k < 3; ++k) s += (p[k] = std::exp(z[k] - mx));
  for (double& v : p) v /= s;
  return p;
}

// Exact gradient of the expected payoff by enumerating all nine joint
// actions, using dp_k/dz_l = p_k (delta_kl - p_l).
inline ExactPolicyGradient exact_pg_oracle(const envs::MatrixGame& game, const TabularJointPolicy& pol) {
  ExactPolicyGradient out;
  out.p1 = softmax3(pol.logits1);
  for (std::size_t a = 0; a < 3; ++a) out.p2[a] = softmax3(pol.logits2[a]);

  std::array<double, 3> row_value{};  // E[payoff | player 1 plays a]
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) row_value[a] += out.p2[a][b] * game.payoff(a, b);
    out.value += out.p1[a] * row_value[a];
  }
  for (std::size_t k = 0; k < 3; ++k) {
    double g = 0.0;
    for (std::size_t a = 0; a < 3; ++a) g += out.p1[a] * ((a == k ? 1.0 : 0.0) - out.p1[k]) * row_value[a];
    out.grad1[k] = g;
  }
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t k = 0; k < 3; ++k) {
      double g = 0.0;
      for (std::size_t b = 0; b < 3; ++b)
        g += out.p2[a][b] * ((b == k ? 1.0 : 0.0) - out.p2[a][k]) * game.payoff(a, b);
      out.grad2[a][k] = out.p1[a] * g;
    }
  return out;
}

}  // namespace bpta::estimators
