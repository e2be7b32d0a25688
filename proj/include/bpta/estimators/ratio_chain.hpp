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

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "bpta/estimators/batch.hpp"

namespace bpta::estimators {

// How successors' actions are rebuilt when differentiating their ratios with
// respect to a predecessor's action.
enum class PeerPath {
  kFullChain,   // successors re-materialised as g(theta_j, eps_j); indirect paths included
  kDirectOnly,  // successor actions held fixed; only the immediate input dependence
};

inline PeerPath parse_peer_path(const std::string& s) {
  if (s == "full") return PeerPath::kFullChain;
  if (s == "direct") return PeerPath::kDirectOnly;
  throw ConfigError("peer_path", "unknown mode '" + s + "' (expected full | direct)");
}

// What an agent's loss needs from its successors.
struct PeerInputs {
  std::size_t agent = 0;
  Matrix m;       // M^{i+1:n}, (rows x 1)
  Matrix grad_m;  // d M^{i+1:n} / d a^i, (rows x |a^i|)
};

// Running product of updated-to-old ratios over the agents already updated
// in this pass, and its gradient with respect to the actions of the agents
// still waiting. Agents are processed from the last execution position to
// the first.
class RatioChain {
 public:
  RatioChain(const policy::JointPolicy& joint, std::size_t rows)
      : order_(joint.order()), m_(rows, 1, 1.0), next_(joint.size()) {
    grads_.reserve(joint.size());
    for (std::size_t i = 0; i < joint.size(); ++i) grads_.emplace_back(rows, joint.space(i).encoded_dim());
  }

  bool finished() const noexcept { return next_ == 0; }
  // Execution position of the agent whose update comes next.
  std::size_t next_position() const {
    if (finished()) throw InternalError("RatioChain", "all agents already processed");
    return next_ - 1;
  }
  std::size_t next_agent() const { return order_.agent_at(next_position()); }

  // M^{i+1:n} for the next agent i.
  const Matrix& m() const noexcept { return m_; }
  // d M^{i+1:n} / d a^agent for any agent not yet processed.
  const Matrix& grad_wrt(std::size_t agent) const { return grads_.at(agent); }
  // c_consumer^producer = d ratio_consumer / d a^producer, once cached.
  const Matrix* cached(std::size_t consumer, std::size_t producer) const {
    auto it = cache_.find({consumer, producer});
    return it == cache_.end() ? nullptr : &it->second;
  }

  PeerInputs peer_inputs(std::size_t agent) const {
    if (agent != next_agent()) {
      throw InternalError("RatioChain", "update order violation: expected agent " + std::to_string(next_agent()) +
                                            ", got " + std::to_string(agent));
    }
    return PeerInputs{agent, m_, grads_[agent]};
  }

  // Folds agent `agent` (the next one) into the chain given its ratio under
  // the updated parameters and the cached action-gradients c_agent^j.
  void fold(std::size_t agent, const Matrix& ratio, std::map<std::size_t, Matrix> c) {
    if (agent != next_agent()) {
      throw InternalError("RatioChain", "chain step out of reverse order: expected agent " +
                                            std::to_string(next_agent()) + ", got " + std::to_string(agent));
    }
    if (ratio.rows() != m_.rows() || ratio.cols() != 1) throw ShapeError("RatioChain", "ratio shape");
    const std::size_t rows = m_.rows();
    for (std::size_t pos = 0; pos + 1 < next_; ++pos) {
      const std::size_t j = order_.agent_at(pos);
      Matrix& g = grads_[j];
      auto it = c.find(j);
      // d M^{i:n} = c_i^j M^{i+1:n} + ratio_i dM^{i+1:n}
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = 0; k < g.cols(); ++k) {
          const double cij = it == c.end() ? 0.0 : it->second(r, k);
          g(r, k) = cij * m_(r, 0) + ratio(r, 0) * g(r, k);
        }
    }
    for (std::size_t r = 0; r < rows; ++r) m_(r, 0) *= ratio(r, 0);
    for (auto& [j, cj] : c) cache_[{agent, j}] = std::move(cj);
    --next_;
  }

 private:
  policy::ExecutionOrder order_;
  Matrix m_;
  std::vector<Matrix> grads_;
  std::map<std::pair<std::size_t, std::size_t>, Matrix> cache_;
  std::size_t next_;
};

// Ratio pi_i / pi_i_old of one agent on the tape, (rows x 1).
inline Tensor ratio_of(const Tensor& log_prob, const Matrix& old_log_prob) {
  Tape& t = log_prob.tape();
  return ad::exp(ad::sub(log_prob, t.constant(old_log_prob)));
}

// After agent `agent` finished its update: rebuilds its ratio under the new
// parameters, differentiates it with respect to every predecessor's action,
// and folds it into the chain.
inline void chain_step(RatioChain& chain, const policy::JointPolicy& joint, std::size_t agent,
                       const PolicyBatch& batch, PeerPath path) {
  if (agent != chain.next_agent()) {
    throw InternalError("chain_step", "called out of reverse order: expected agent " +
                                          std::to_string(chain.next_agent()) + ", got " + std::to_string(agent));
  }
  const std::size_t pos = joint.order().position_of(agent);
  Tape tape;
  const auto mode = path == PeerPath::kFullChain ? policy::FeedMode::kRelaxed : policy::FeedMode::kLeaf;
  auto s = joint.forward(tape, batch.obs, batch.noise, mode, &batch.actions, pos);
  Tensor ratio = ratio_of(s.log_probs[agent], batch.old_log_probs[agent]);
  std::map<std::size_t, Matrix> c;
  for (std::size_t q = 0; q < pos; ++q) {
    const std::size_t j = joint.order().agent_at(q);
    c.emplace(j, tape.grad_of(ratio, s.fed[j]).grad);
  }
  chain.fold(agent, ratio.value(), std::move(c));
}

}  // namespace bpta::estimators
