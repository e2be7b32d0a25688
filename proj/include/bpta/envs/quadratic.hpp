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
#include <string>
#include <vector>

#include "bpta/envs/env.hpp"

namespace bpta::envs {

// Two agents with scalar continuous actions and a one-step episode:
// r(a1, a2) = -(a1 + a2 - c)^2.
class QuadraticTeamGame : public DecPomdpEnv {
 public:
  explicit QuadraticTeamGame(double target = 0.0)
      : target_(target), spaces_{ActionSpace::continuous(1), ActionSpace::continuous(1)} {}

  std::string name() const override { return "quadratic"; }
  std::size_t num_agents() const override { return 2; }
  const std::vector<ActionSpace>& action_spaces() const override { return spaces_; }
  std::vector<std::size_t> observation_dims() const override { return {1, 1}; }
  std::vector<double> state() const override { return {1.0}; }
  std::size_t state_dim() const override { return 1; }
  std::size_t episode_length() const override { return 1; }

  double target() const noexcept { return target_; }

  double reward(double a1, double a2) const {
    const double e = a1 + a2 - target_;
    return -e * e;
  }

 protected:
  JointObservation do_reset() override { return {{1.0}, {1.0}}; }

  StepResult do_step(const JointAction& action) override {
    if (action[0].values.size() != 1 || action[1].values.size() != 1) {
      throw ShapeError(name(), "actions must be scalars");
    }
    StepResult r;
    r.reward = reward(action[0].values[0], action[1].values[0]);
    r.done = true;
    r.observations = {{1.0}, {1.0}};
    return r;
  }

 private:
  double target_;
  std::vector<ActionSpace> spaces_;
};

// Gradient of J = E[-(a1 + a2 - c)^2] for a1 = mu1 + sigma1*e1 and
// a2 = w*a1 + b + sigma2*e2, e1, e2 ~ N(0, 1). Closed form:
//   J = -[((1+w)mu1 + b - c)^2 + (1+w)^2 sigma1^2 + sigma2^2].
struct QuadraticGradient {
  double value = 0.0;
  double d_mu1 = 0.0;
  double d_sigma1 = 0.0;
  double d_w = 0.0;
  double d_b = 0.0;
  double d_sigma2 = 0.0;
};

inline QuadraticGradient quadratic_exact_gradient(double mu1, double sigma1, double w, double b, double sigma2,
                                                  double c) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw DomainError("quadratic_exact_gradient", "sigma must be positive");
  const double k = 1.0 + w;
  const double m = k * mu1 + b - c;
  QuadraticGradient g;
  g.value = -(m * m + k * k * sigma1 * sigma1 + sigma2 * sigma2);
  g.d_mu1 = -2.0 * k * m;
  g.d_sigma1 = -2.0 * k * k * sigma1;
  g.d_w = -(2.0 * m * mu1 + 2.0 * k * sigma1 * sigma1);
  g.d_b = -2.0 * m;
  g.d_sigma2 = -2.0 * sigma2;
  return g;
}

}  // namespace bpta::envs
