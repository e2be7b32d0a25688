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

#include <cstddef>
#include <string>
#include <vector>

#include "bpta/error.hpp"
#include "bpta/spaces.hpp"

namespace bpta::envs {

// One agent's action as passed to an environment.
struct Action {
  std::size_t index = 0;       // discrete spaces
  std::vector<double> values;  // continuous spaces
};

using JointAction = std::vector<Action>;
using JointObservation = std::vector<std::vector<double>>;

struct StepResult {
  JointObservation observations;
  double reward = 0.0;  // shared by the whole team
  bool done = false;
};

// Decentralised partially observable environment with a shared team reward.
// The base class enforces the reset/step/done contract; concrete games
// implement do_reset and do_step.
class DecPomdpEnv {
 public:
  virtual ~DecPomdpEnv() = default;

  virtual std::string name() const = 0;
  virtual std::size_t num_agents() const = 0;
  virtual const std::vector<ActionSpace>& action_spaces() const = 0;
  virtual std::vector<std::size_t> observation_dims() const = 0;
  // Input of the centralised critic.
  virtual std::vector<double> state() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t episode_length() const = 0;

  JointObservation reset() {
    needs_reset_ = false;
    return do_reset();
  }

  StepResult step(const JointAction& action) {
    if (needs_reset_) throw InternalError(name(), "step called before reset or after episode end");
    if (action.size() != num_agents()) throw ShapeError(name(), "joint action has wrong agent count");
    StepResult r = do_step(action);
    if (r.done) needs_reset_ = true;
    return r;
  }

 protected:
  virtual JointObservation do_reset() = 0;
  virtual StepResult do_step(const JointAction& action) = 0;

 private:
  bool needs_reset_ = true;
};

}  // namespace bpta::envs
