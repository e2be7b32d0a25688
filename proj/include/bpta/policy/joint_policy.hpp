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

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "bpta/policy/agent_policy.hpp"
#include "bpta/policy/dependency.hpp"

namespace bpta::policy {

// What each agent hands to its successors during a joint forward pass.
enum class FeedMode {
  kHard,     // constant encoding of the hard action (environment rollout)
  kRelaxed,  // reparameterised action g(theta, eps); gradients chain through agents
  kLeaf,     // fresh differentiable leaf holding the hard encoding; each
             // successor sees only its direct dependence
};

struct JointSample {
  std::vector<ActionBatch> actions;   // per agent id
  std::vector<Tensor> fed;            // per agent id, what successors consumed
  std::vector<Tensor> log_probs;      // per agent id, (rows x 1)
  std::vector<AgentGraph> graphs;     // per agent id
  std::vector<bool> evaluated;        // per agent id
  Tensor joint_log_prob;              // sum over evaluated agents
};

struct ProjectionSpec {
  bool enabled = false;
  std::size_t dim = 32;
  bool learned = false;
};

// Ordered collection of per-agent policies wired auto-regressively: agent i
// conditions on the actions of its forward set F_i. Parameters are not shared.
class JointPolicy {
 public:
  JointPolicy() = default;

  JointPolicy(std::vector<ActionSpace> spaces, std::vector<std::size_t> obs_dims, ExecutionOrder order,
              DependencySets deps, MlpShape shape, double tau, ProjectionSpec proj, Rng& rng)
      : order_(std::move(order)), deps_(std::move(deps)), spaces_(std::move(spaces)) {
    const std::size_t n = spaces_.size();
    if (obs_dims.size() != n || order_.size() != n || deps_.size() != n) {
      throw ConfigError("JointPolicy", "agent count mismatch");
    }
    // One frozen projection per producing agent, shared by all consumers.
    std::vector<std::optional<Matrix>> projections(n);
    if (proj.enabled) {
      for (std::size_t j = 0; j < n; ++j)
        if (spaces_[j].is_discrete()) projections[j] = random_projection(spaces_[j].size, proj.dim, rng);
    }
    agents_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<ActionEncoding> enc;
      for (std::size_t j : deps_.forward(i)) enc.push_back(ActionEncoding{spaces_[j], projections[j], proj.learned});
      agents_.emplace_back(spaces_[i], obs_dims[i], std::move(enc), shape, tau, rng);
    }
  }

  std::size_t size() const noexcept { return agents_.size(); }
  const ExecutionOrder& order() const noexcept { return order_; }
  const DependencySets& deps() const noexcept { return deps_; }
  AgentPolicy& agent(std::size_t i) { return agents_.at(i); }
  const AgentPolicy& agent(std::size_t i) const { return agents_.at(i); }
  const ActionSpace& space(std::size_t i) const { return spaces_.at(i); }

  // Evaluates agents in execution order up to and including position
  // `last_position`. With `stored` the hard actions are taken from it,
  // otherwise they are drawn from the noise.
  JointSample forward(Tape& tape, std::span<const Matrix> obs, std::span<const NoiseBatch> noise, FeedMode mode,
                      const std::vector<ActionBatch>* stored = nullptr,
                      std::size_t last_position = std::numeric_limits<std::size_t>::max()) const {
    const std::size_t n = size();
    if (obs.size() != n || noise.size() != n) throw ShapeError("JointPolicy::forward", "per-agent input count");
    JointSample s;
    s.actions.resize(n);
    s.fed.resize(n);
    s.log_probs.resize(n);
    s.graphs.resize(n);
    s.evaluated.assign(n, false);
    const std::size_t stop = std::min(last_position, n - 1);
    for (std::size_t pos = 0; pos <= stop; ++pos) {
      const std::size_t i = order_.agent_at(pos);
      std::vector<Tensor> preceding;
      for (std::size_t j : deps_.forward(i)) {
        if (!s.evaluated[j]) {
          throw InternalError("JointPolicy::forward", "agent " + std::to_string(i) + " consumes the action of agent " +
                                                          std::to_string(j) + " before it was produced");
        }
        preceding.push_back(s.fed[j]);
      }
      const AgentPolicy& a = agents_[i];
      AgentGraph g = a.forward(tape, tape.constant(obs[i]), preceding);
      s.actions[i] = stored ? (*stored)[i] : a.hard_action(g, noise[i]);
      s.log_probs[i] = a.log_prob(g, s.actions[i]);
      switch (mode) {
        case FeedMode::kHard: s.fed[i] = tape.constant(s.actions[i].encoded(spaces_[i])); break;
        case FeedMode::kRelaxed: s.fed[i] = a.reparam(g, noise[i], s.actions[i]); break;
        case FeedMode::kLeaf: s.fed[i] = tape.variable(s.actions[i].encoded(spaces_[i])); break;
      }
      s.graphs[i] = std::move(g);
      s.evaluated[i] = true;
      s.joint_log_prob = s.joint_log_prob.valid() ? ad::add(s.joint_log_prob, s.log_probs[i]) : s.log_probs[i];
    }
    return s;
  }

 private:
  std::vector<AgentPolicy> agents_;
  ExecutionOrder order_;
  DependencySets deps_;
  std::vector<ActionSpace> spaces_;
};

// Convenience wrapper used by callers that only need the joint distribution.
inline JointSample joint_forward(Tape& tape, const JointPolicy& joint, std::span<const Matrix> obs,
                                 std::span<const NoiseBatch> noise, FeedMode mode,
                                 const std::vector<ActionBatch>* stored = nullptr) {
  return joint.forward(tape, obs, noise, mode, stored);
}

}  // namespace bpta::policy
