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
#include <string>
#include <vector>

#include "bpta/envs/env.hpp"

namespace bpta::envs {

using Payoff = std::array<std::array<double, 3>, 3>;

// Stateless two-player cooperative game over three actions (A, B, C).
// Runs exactly `episode_length` steps; observation is constant.
class MatrixGame : public DecPomdpEnv {
 public:
  MatrixGame(std::string name, Payoff payoff, std::size_t episode_length = 200)
      : name_(std::move(name)), payoff_(payoff), episode_length_(episode_length),
        spaces_{ActionSpace::discrete(3), ActionSpace::discrete(3)} {
    if (episode_length_ == 0) throw ConfigError(name_, "episode length must be positive");
  }

  std::string name() const override { return name_; }
  std::size_t num_agents() const override { return 2; }
  const std::vector<ActionSpace>& action_spaces() const override { return spaces_; }
  // Constant 1 plus a one-hot agent id.
  std::vector<std::size_t> observation_dims() const override { return {3, 3}; }
  std::vector<double> state() const override { return {1.0}; }
  std::size_t state_dim() const override { return 1; }
  std::size_t episode_length() const override { return episode_length_; }

  const Payoff& table() const noexcept { return payoff_; }

  double payoff(std::size_t a1, std::size_t a2) const {
    if (a1 > 2 || a2 > 2) throw DomainError(name_, "action index out of range");
    return payoff_[a1][a2];
  }

  // Expected per-step reward of independent action distributions.
  double exact_value(const std::array<double, 3>& p1, const std::array<double, 3>& p2) const {
    check_distribution(p1);
    check_distribution(p2);
    double v = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) v += p1[a] * p2[b] * payoff_[a][b];
    return v;
  }

  // Expected per-step reward when player 2 conditions on player 1's action:
  // p2[a] is the distribution of player 2 given player 1 chose a.
  double exact_value(const std::array<double, 3>& p1, const std::array<std::array<double, 3>, 3>& p2) const {
    check_distribution(p1);
    for (const auto& row : p2) check_distribution(row);
    double v = 0.0;
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b) v += p1[a] * p2[a][b] * payoff_[a][b];
    return v;
  }

 protected:
  JointObservation do_reset() override {
    t_ = 0;
    return observe();
  }

  StepResult do_step(const JointAction& action) override {
    StepResult r;
    r.reward = payoff(action[0].index, action[1].index);
    ++t_;
    r.done = t_ >= episode_length_;
    r.observations = observe();
    return r;
  }

 private:
  JointObservation observe() const { return {{1.0, 1.0, 0.0}, {1.0, 0.0, 1.0}}; }

  void check_distribution(const std::array<double, 3>& p) const {
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) throw DomainError(name_, "negative probability");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw DomainError(name_, "distribution does not sum to 1");
  }

  std::string name_;
  Payoff payoff_;
  std::size_t episode_length_;
  std::vector<ActionSpace> spaces_;
  std::size_t t_ = 0;
};

inline constexpr Payoff kClimbingPayoff{{{11, -30, 0}, {-30, 7, 0}, {0, 6, 5}}};
inline constexpr Payoff kPenaltyPayoff{{{-100, 0, 10}, {0, 2, 0}, {10, 0, -100}}};

inline MatrixGame climbing(std::size_t episode_length = 200) {
  return MatrixGame("climbing", kClimbingPayoff, episode_length);
}

inline MatrixGame penalty(std::size_t episode_length = 200) {
  return MatrixGame("penalty", kPenaltyPayoff, episode_length);
}

}  // namespace bpta::envs
