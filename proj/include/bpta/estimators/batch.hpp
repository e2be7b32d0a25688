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

#include <vector>

#include "bpta/policy/joint_policy.hpp"

namespace bpta::estimators {

using ad::Matrix;
using ad::Tape;
using ad::Tensor;

// Everything needed to rebuild the policy graphs of one update batch.
// Per-agent entries are indexed by agent id.
struct PolicyBatch {
  std::vector<Matrix> obs;
  std::vector<ActionBatch> actions;
  std::vector<policy::NoiseBatch> noise;
  std::vector<Matrix> old_log_probs;  // (rows x 1)
  Matrix advantages;                  // (rows x 1)

  std::size_t rows() const noexcept { return advantages.rows(); }

  PolicyBatch slice(std::size_t begin, std::size_t end) const {
    PolicyBatch b;
    for (std::size_t i = 0; i < obs.size(); ++i) {
      b.obs.push_back(obs[i].slice_rows(begin, end));
      b.actions.push_back(actions[i].slice(begin, end));
      b.noise.push_back(noise[i].slice_rows(begin, end));
      b.old_log_probs.push_back(old_log_probs[i].slice_rows(begin, end));
    }
    b.advantages = advantages.slice_rows(begin, end);
    return b;
  }
};

struct SurrogateConfig {
  double clip = 0.2;
  double entropy_coef = 0.01;
  double peer_coef = 1.0;
};

// Loss graph for one agent. Minimising `loss` maximises the surrogate.
struct AgentLoss {
  Tensor loss;
  std::vector<Tensor> params;  // agent's trainable tensors on the tape
  Tensor ratio;                // (rows x 1)
  double objective = 0.0;      // surrogate value without the entropy bonus
  double entropy = 0.0;        // batch mean
};

}  // namespace bpta::estimators
