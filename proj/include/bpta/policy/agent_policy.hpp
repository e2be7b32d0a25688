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
#include <numbers>
#include <string>
#include <vector>

#include "bpta/autodiff/ops.hpp"
#include "bpta/policy/encoding.hpp"
#include "bpta/policy/mlp.hpp"
#include "bpta/spaces.hpp"

namespace bpta::policy {

// One agent's forward pass on a tape.
struct AgentGraph {
  std::vector<Tensor> params;  // same order as AgentPolicy::parameters()
  Tensor head;                 // logits (categorical) or mean (Gaussian)
  Tensor log_std;              // Gaussian only, (1 x d)
};

// Exogenous noise for one agent: Gumbel(0,1) per class for discrete spaces,
// standard normal per dimension for continuous ones. (rows x k).
using NoiseBatch = Matrix;

inline NoiseBatch sample_noise(const ActionSpace& space, std::size_t rows, Rng& rng) {
  return space.is_discrete() ? rng.gumbel_matrix(rows, space.size) : rng.normal_matrix(rows, space.size);
}

struct SampleResult {
  ActionBatch action;
  Tensor relaxed;   // straight-through one-hot (categorical) or mu + sigma*eps
  Tensor log_prob;  // (rows x 1), evaluated at the hard action
};

// Policy of a single agent: ReLU MLP trunk with a categorical or
// diagonal-Gaussian head. The input is the agent's observation followed by
// the encodings of its predecessors' actions.
class AgentPolicy {
 public:
  AgentPolicy() = default;

  AgentPolicy(ActionSpace space, std::size_t obs_dim, std::vector<ActionEncoding> preceding, MlpShape shape,
              double tau, Rng& rng)
      : space_(space), obs_dim_(obs_dim), preceding_(std::move(preceding)), tau_(tau) {
    if (space_.is_discrete() && !(tau_ > 0.0)) throw ConfigError("AgentPolicy", "temperature must be positive");
    std::size_t in = obs_dim_;
    for (const auto& e : preceding_) in += e.output_dim();
    net_ = MlpParams::init(in, space_.size, shape, 0.01, rng);
    if (!space_.is_discrete()) log_std_ = Matrix(1, space_.size, 0.0);
  }

  const ActionSpace& space() const noexcept { return space_; }
  std::size_t obs_dim() const noexcept { return obs_dim_; }
  std::size_t input_dim() const { return net_.input_dim(); }
  double tau() const noexcept { return tau_; }
  void set_tau(double tau) {
    if (!(tau > 0.0)) throw ConfigError("AgentPolicy", "temperature must be positive");
    tau_ = tau;
  }
  const std::vector<ActionEncoding>& preceding() const noexcept { return preceding_; }
  // Replaces the projection of the k-th predecessor; the width must not change.
  void set_projection(std::size_t k, Matrix projection) {
    auto& e = preceding_.at(k);
    if (!e.projection || e.projection->shape() != projection.shape()) {
      throw ShapeError("AgentPolicy::set_projection", "projection shape must match the existing one");
    }
    e.projection = std::move(projection);
  }
  MlpParams& net() noexcept { return net_; }
  const MlpParams& net() const noexcept { return net_; }
  Matrix& log_std() noexcept { return log_std_; }
  const Matrix& log_std() const noexcept { return log_std_; }

  // Trainable tensors: MLP (W0, b0, ...), then log-std, then learned
  // projections in predecessor order.
  std::vector<Matrix*> parameters() {
    auto out = net_.parameters();
    if (!space_.is_discrete()) out.push_back(&log_std_);
    for (auto& e : preceding_)
      if (e.projection && e.learned) out.push_back(&*e.projection);
    return out;
  }

  std::vector<std::string> parameter_names() const {
    std::vector<std::string> out;
    for (std::size_t l = 0; l < net_.weights.size(); ++l) {
      out.push_back("w" + std::to_string(l));
      out.push_back("b" + std::to_string(l));
    }
    if (!space_.is_discrete()) out.push_back("log_std");
    for (std::size_t k = 0; k < preceding_.size(); ++k)
      if (preceding_[k].projection && preceding_[k].learned) out.push_back("proj" + std::to_string(k));
    return out;
  }

  AgentGraph forward(Tape& tape, Tensor obs, std::span<const Tensor> preceding) const {
    if (obs.shape().cols != obs_dim_) throw ShapeError("AgentPolicy::forward", "observation width mismatch");
    std::vector<Tensor> learned;
    Tensor enc = encode_preceding(tape, preceding, preceding_, &learned);
    Tensor input = enc.valid() ? ad::concat_cols({obs, enc}) : obs;
    MlpGraph mlp = mlp_forward(tape, net_, input);
    AgentGraph g;
    g.params = std::move(mlp.params);
    g.head = mlp.output;
    if (!space_.is_discrete()) {
      g.log_std = tape.variable(log_std_);
      g.params.push_back(g.log_std);
    }
    for (auto& p : learned) g.params.push_back(p);
    return g;
  }

  // log pi(action | input), (rows x 1).
  Tensor log_prob(const AgentGraph& g, const ActionBatch& action) const {
    if (space_.is_discrete()) return ad::pick(ad::log_softmax(g.head), action.indices);
    Tape& t = g.head.tape();
    Tensor a = t.constant(action.values);
    Tensor z = ad::div(ad::sub(a, g.head), ad::exp(g.log_std));
    const double half_log_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
    Tensor per_dim = ad::add_scalar(ad::neg(ad::add(ad::scale(ad::square(z), 0.5), g.log_std)), -half_log_2pi);
    return ad::sum_rows(per_dim);
  }

  // Entropy per row, (rows x 1).
  Tensor entropy(const AgentGraph& g) const {
    if (space_.is_discrete()) {
      Tensor lp = ad::log_softmax(g.head);
      return ad::neg(ad::sum_rows(ad::mul(ad::softmax(g.head), lp)));
    }
    const double c = 0.5 + 0.5 * std::log(2.0 * std::numbers::pi);
    Tape& t = g.head.tape();
    Tensor ones = t.constant(Matrix(g.head.shape().rows, 1, 1.0));
    return ad::mul(ones, ad::add_scalar(ad::sum(g.log_std), c * static_cast<double>(space_.size)));
  }

  // Hard action implied by the noise: argmax(logits + G) or mu + sigma*eps.
  ActionBatch hard_action(const AgentGraph& g, const NoiseBatch& noise) const {
    const Matrix& h = g.head.value();
    check_noise(noise, h.rows());
    ActionBatch out;
    if (space_.is_discrete()) {
      out.indices.resize(h.rows());
      for (std::size_t r = 0; r < h.rows(); ++r) {
        std::size_t best = 0;
        double best_v = h(r, 0) + noise(r, 0);
        for (std::size_t c = 1; c < h.cols(); ++c) {
          const double v = h(r, c) + noise(r, c);
          if (v > best_v) best_v = v, best = c;
        }
        out.indices[r] = best;
      }
    } else {
      out.values = Matrix(h.rows(), h.cols());
      const Matrix& ls = g.log_std.value();
      for (std::size_t r = 0; r < h.rows(); ++r)
        for (std::size_t c = 0; c < h.cols(); ++c) out.values(r, c) = h(r, c) + std::exp(ls(0, c)) * noise(r, c);
    }
    return out;
  }

  // Reparameterised action g(theta, eps). Categorical: forward value is the
  // one-hot of `hard`, gradient is that of softmax((logits + G) / tau).
  // Gaussian: mu + sigma * eps.
  Tensor reparam(const AgentGraph& g, const NoiseBatch& noise, const ActionBatch& hard) const {
    Tape& t = g.head.tape();
    check_noise(noise, g.head.shape().rows);
    Tensor eps = t.constant(noise);
    if (space_.is_discrete()) {
      Tensor relaxed = ad::softmax(ad::scale(ad::add(g.head, eps), 1.0 / tau_));
      return ad::straight_through(ad::one_hot(hard.indices, space_.size), relaxed);
    }
    return ad::add(g.head, ad::mul(ad::exp(g.log_std), eps));
  }

  // Greedy action: argmax logits or the mean.
  ActionBatch greedy_action(const AgentGraph& g) const {
    if (!space_.is_discrete()) return ActionBatch{{}, g.head.value()};
    return hard_action(g, Matrix(g.head.shape().rows, space_.size, 0.0));
  }

 private:
  void check_noise(const NoiseBatch& noise, std::size_t rows) const {
    if (noise.rows() != rows || noise.cols() != space_.size) {
      throw ShapeError("AgentPolicy", "noise shape " + noise.shape().str() + " does not match action space");
    }
  }

  ActionSpace space_;
  std::size_t obs_dim_ = 0;
  std::vector<ActionEncoding> preceding_;
  double tau_ = 1.0;
  MlpParams net_;
  Matrix log_std_;
};

// Draws one action with the reparameterisation trick: the hard action from
// the noise and the differentiable relaxed action that successors consume.
inline SampleResult sample_reparam(const AgentPolicy& agent, Tensor obs, std::span<const Tensor> preceding,
                                   const NoiseBatch& noise) {
  AgentGraph g = agent.forward(obs.tape(), obs, preceding);
  SampleResult s;
  s.action = agent.hard_action(g, noise);
  s.relaxed = agent.reparam(g, noise, s.action);
  s.log_prob = agent.log_prob(g, s.action);
  return s;
}

}  // namespace bpta::policy
