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

#include "bpta/estimators/batch.hpp"
#include "bpta/estimators/ratio_chain.hpp"

namespace bpta::estimators {

namespace detail {

struct OwnGraph {
  policy::AgentGraph graph;
  Tensor log_prob;
  Tensor ratio;
  Tensor entropy;  // (rows x 1)
};

// Agent i's forward pass with its predecessors' stored actions as constants.
inline OwnGraph own_graph(Tape& tape, const policy::JointPolicy& joint, std::size_t agent, const PolicyBatch& b) {
  const auto& a = joint.agent(agent);
  std::vector<Tensor> preceding;
  for (std::size_t j : joint.deps().forward(agent))
    preceding.push_back(tape.constant(b.actions[j].encoded(joint.space(j))));
  OwnGraph g;
  g.graph = a.forward(tape, tape.constant(b.obs[agent]), preceding);
  g.log_prob = a.log_prob(g.graph, b.actions[agent]);
  g.ratio = ratio_of(g.log_prob, b.old_log_probs[agent]);
  g.entropy = a.entropy(g.graph);
  return g;
}

inline AgentLoss finish(Tensor per_sample, OwnGraph& g, const SurrogateConfig& cfg) {
  Tensor objective = ad::mean(per_sample);
  Tensor ent = ad::mean(g.entropy);
  AgentLoss out;
  out.loss = ad::sub(ad::neg(objective), ad::scale(ent, cfg.entropy_coef));
  out.params = g.graph.params;
  out.ratio = g.ratio;
  out.objective = objective.value().item();
  out.entropy = ent.value().item();
  return out;
}

inline AgentLoss clipped_surrogate(Tape& tape, const policy::JointPolicy& joint, std::size_t agent,
                                   const PolicyBatch& b, const SurrogateConfig& cfg) {
  OwnGraph g = own_graph(tape, joint, agent, b);
  Tensor adv = tape.constant(b.advantages);
  Tensor unclipped = ad::mul(g.ratio, adv);
  Tensor clipped = ad::mul(ad::clip(g.ratio, 1.0 - cfg.clip, 1.0 + cfg.clip), adv);
  return finish(ad::minimum(unclipped, clipped), g, cfg);
}

}  // namespace detail

// Independent PPO surrogate for agent i: -E[min(r A, clip(r) A)] - c_H H.
// Requires an agent with an empty forward set.
inline AgentLoss mappo_loss(Tape& tape, const policy::JointPolicy& joint, std::size_t agent, const PolicyBatch& b,
                            const SurrogateConfig& cfg) {
  if (!joint.deps().forward(agent).empty()) {
    throw InternalError("mappo_loss", "agent conditions on other agents; use armappo_loss");
  }
  return detail::clipped_surrogate(tape, joint, agent, b, cfg);
}

// Auto-regressive PPO surrogate: the same clipped objective with the
// predecessors' actions entering as constants.
inline AgentLoss armappo_loss(Tape& tape, const policy::JointPolicy& joint, std::size_t agent, const PolicyBatch& b,
                              const SurrogateConfig& cfg) {
  return detail::clipped_surrogate(tape, joint, agent, b, cfg);
}

// Bidirectional surrogate. Per sample, with r the agent's ratio, M the
// successors' ratio product and dM its gradient with respect to this agent's
// action:
//   u = (r M + detach(r) <dM, g(theta, eps)>) A
//   v = (clip(r) M + detach(clip(r)) <dM, g(theta, eps)>) A
// and the loss is -mean(min(u, v)) - c_H H. The inner product is scaled by
// peer_coef.
inline AgentLoss bppo_loss(Tape& tape, const policy::JointPolicy& joint, std::size_t agent, const PolicyBatch& b,
                           const PeerInputs& peer, const SurrogateConfig& cfg) {
  if (peer.agent != agent) throw InternalError("bppo_loss", "peer inputs belong to another agent");
  const std::size_t rows = b.rows();
  if (peer.m.rows() != rows || peer.grad_m.rows() != rows) throw ShapeError("bppo_loss", "chain rows mismatch");
  detail::OwnGraph g = detail::own_graph(tape, joint, agent, b);
  const auto& a = joint.agent(agent);
  Tensor action = a.reparam(g.graph, b.noise[agent], b.actions[agent]);
  Tensor peer_term = ad::scale(ad::sum_rows(ad::mul(tape.constant(peer.grad_m), action)), cfg.peer_coef);
  Tensor m = tape.constant(peer.m);
  Tensor adv = tape.constant(b.advantages);
  Tensor clipped_ratio = ad::clip(g.ratio, 1.0 - cfg.clip, 1.0 + cfg.clip);
  Tensor u = ad::mul(ad::add(ad::mul(g.ratio, m), ad::mul(ad::detach(g.ratio), peer_term)), adv);
  Tensor v = ad::mul(ad::add(ad::mul(clipped_ratio, m), ad::mul(ad::detach(clipped_ratio), peer_term)), adv);
  return detail::finish(ad::minimum(u, v), g, cfg);
}

inline AgentLoss bppo_loss(Tape& tape, const policy::JointPolicy& joint, std::size_t agent, const PolicyBatch& b,
                           const RatioChain& chain, const SurrogateConfig& cfg) {
  return bppo_loss(tape, joint, agent, b, chain.peer_inputs(agent), cfg);
}

}  // namespace bpta::estimators
