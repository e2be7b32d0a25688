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

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "bpta/config.hpp"
#include "bpta/envs/registry.hpp"
#include "bpta/estimators/gae.hpp"
#include "bpta/estimators/surrogate.hpp"
#include "bpta/policy/joint_policy.hpp"
#include "bpta/random.hpp"
#include "bpta/trainer/buffer.hpp"
#include "bpta/trainer/optimizer.hpp"

namespace bpta::trainer {

using ad::Tape;
using ad::Tensor;
using estimators::PeerInputs;
using estimators::PolicyBatch;

struct IterationMetrics {
  std::size_t iteration = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t seed = 0;
  double mean_return = 0.0;  // mean per-step team reward of the collected batch
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double mean_grad_m = 0.0;  // mean |dM/da| over agents that have successors
  double wall_clock = 0.0;   // seconds since the trainer was created
};

struct UpdateStats {
  double policy_loss = 0.0;
  double entropy = 0.0;
  double mean_ratio = 0.0;
  double mean_grad_m = 0.0;
  double value_loss_before = 0.0;
  double value_loss_after = 0.0;
};

struct Advantages {
  Matrix advantages;  // (rows x 1), normalised if configured
  Matrix targets;     // (rows x 1), value regression targets
};

// State of one training run: policies, critic, optimisers, environments and
// per-worker random streams.
class Trainer {
 public:
  Trainer(ExperimentConfig cfg, std::uint64_t seed)
      : cfg_(std::move(cfg)), seed_(seed), start_(std::chrono::steady_clock::now()) {
    cfg_.validate();
    algo_ = cfg_.algo();
    peer_path_ = estimators::parse_peer_path(cfg_.peer_path);
    for (std::size_t w = 0; w < cfg_.rollout_threads; ++w) {
      envs_.push_back(envs::make_env(cfg_.env, cfg_.episode_length, cfg_.quadratic_target));
      worker_rngs_.emplace_back(seed, 1 + w);
    }
    const auto& env = *envs_.front();
    steps_per_iter_ = cfg_.steps_per_iter == 0 ? env.episode_length() : cfg_.steps_per_iter;
    if (steps_per_iter_ % env.episode_length() != 0) {
      throw ConfigError("steps_per_iter", "must be a multiple of the episode length " +
                                              std::to_string(env.episode_length()));
    }
    if (steps_per_iter_ * cfg_.rollout_threads < cfg_.num_mini_batch) {
      throw ConfigError("num_mini_batch", "more minibatches than samples");
    }
    Rng init(seed, 0);
    const std::size_t n = env.num_agents();
    auto order = policy::ExecutionOrder::make(policy::parse_order_mode(cfg_.execution_order), n, init);
    auto deps = algo_ == Algorithm::kMappo ? policy::DependencySets::none(order) : policy::DependencySets::full(order);
    policy::ProjectionSpec proj{cfg_.uses_projection(), cfg_.proj_dim, cfg_.proj_learned};
    const policy::MlpShape shape{cfg_.hidden_layers, cfg_.hidden_dim};
    joint_ = policy::JointPolicy(env.action_spaces(), env.observation_dims(), std::move(order), std::move(deps),
                                 shape, cfg_.tau, proj, init);
    critic_ = policy::MlpParams::init(env.state_dim(), 1, shape, 1.0, init);
    const AdamConfig actor{cfg_.actor_lr, 0.9, 0.999, cfg_.adam_eps, cfg_.weight_decay, cfg_.max_grad_norm};
    actor_opt_.assign(n, Adam(actor));
    critic_opt_ = Adam(AdamConfig{cfg_.critic_lr, 0.9, 0.999, cfg_.adam_eps, cfg_.weight_decay, cfg_.max_grad_norm});
  }

  const ExperimentConfig& config() const noexcept { return cfg_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t iteration() const noexcept { return iteration_; }
  std::uint64_t env_steps() const noexcept { return env_steps_; }
  std::size_t steps_per_iter() const noexcept { return steps_per_iter_; }
  std::uint64_t steps_per_iteration_total() const noexcept { return steps_per_iter_ * cfg_.rollout_threads; }
  std::size_t total_iterations() const {
    return static_cast<std::size_t>(cfg_.env_steps / steps_per_iteration_total());
  }

  policy::JointPolicy& joint() noexcept { return joint_; }
  const policy::JointPolicy& joint() const noexcept { return joint_; }
  policy::MlpParams& critic() noexcept { return critic_; }
  const policy::MlpParams& critic() const noexcept { return critic_; }
  Adam& actor_optimizer(std::size_t agent) { return actor_opt_.at(agent); }
  const Adam& actor_optimizer(std::size_t agent) const { return actor_opt_.at(agent); }
  Adam& critic_optimizer() noexcept { return critic_opt_; }
  const Adam& critic_optimizer() const noexcept { return critic_opt_; }
  std::vector<Rng>& worker_rngs() noexcept { return worker_rngs_; }
  const std::vector<Rng>& worker_rngs() const noexcept { return worker_rngs_; }
  const envs::DecPomdpEnv& env() const { return *envs_.front(); }

  // Agents in the order their parameters were last updated.
  const std::vector<std::size_t>& last_update_order() const noexcept { return update_order_; }

  void set_agent_lr(std::size_t agent, double lr) { actor_opt_.at(agent).set_lr(lr); }
  void set_counters(std::size_t iteration, std::uint64_t env_steps) {
    iteration_ = iteration;
    env_steps_ = env_steps;
  }

  // Runs every worker for steps_per_iter steps from a fresh reset.
  RolloutBuffer collect() {
    const auto& proto = *envs_.front();
    const std::size_t n = proto.num_agents(), W = envs_.size();
    const auto& spaces = proto.action_spaces();
    const auto obs_dims = proto.observation_dims();
    RolloutBuffer buf(steps_per_iter_, W, spaces, obs_dims, proto.state_dim());
    std::vector<envs::JointObservation> obs(W);
    for (std::size_t w = 0; w < W; ++w) obs[w] = envs_[w]->reset();
    for (std::size_t t = 0; t < steps_per_iter_; ++t) {
      std::vector<Matrix> o(n), noise(n);
      for (std::size_t i = 0; i < n; ++i) {
        o[i] = Matrix(W, obs_dims[i]);
        noise[i] = Matrix(W, spaces[i].size);
      }
      Matrix states(W, proto.state_dim());
      for (std::size_t w = 0; w < W; ++w) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t c = 0; c < obs_dims[i]; ++c) o[i](w, c) = obs[w].at(i).at(c);
          Matrix e = policy::sample_noise(spaces[i], 1, worker_rngs_[w]);
          for (std::size_t c = 0; c < spaces[i].size; ++c) noise[i](w, c) = e(0, c);
        }
        const auto s = envs_[w]->state();
        for (std::size_t c = 0; c < s.size(); ++c) states(w, c) = s[c];
      }
      Tape tape;
      auto sample = joint_.forward(tape, o, noise, policy::FeedMode::kHard);
      const Matrix v = value(tape, states);
      std::vector<Matrix> lp(n);
      for (std::size_t i = 0; i < n; ++i) lp[i] = sample.log_probs[i].value();
      std::vector<double> rewards(W), values(W);
      std::vector<bool> dones(W);
      for (std::size_t w = 0; w < W; ++w) {
        envs::JointAction ja(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (spaces[i].is_discrete()) {
            ja[i].index = sample.actions[i].indices[w];
          } else {
            auto row = sample.actions[i].values.row_span(w);
            ja[i].values.assign(row.begin(), row.end());
          }
        }
        envs::StepResult r = envs_[w]->step(ja);
        rewards[w] = r.reward;
        values[w] = v(w, 0);
        dones[w] = r.done;
        obs[w] = r.done ? envs_[w]->reset() : std::move(r.observations);
      }
      buf.append(o, sample.actions, noise, lp, states, rewards, values, dones);
    }
    std::vector<double> bootstrap(W, 0.0);
    const auto& last = buf.dones();
    Matrix final_states(W, proto.state_dim());
    for (std::size_t w = 0; w < W; ++w) {
      const auto s = envs_[w]->state();
      for (std::size_t c = 0; c < s.size(); ++c) final_states(w, c) = s[c];
    }
    Tape tape;
    const Matrix v = value(tape, final_states);
    for (std::size_t w = 0; w < W; ++w)
      if (!last[(steps_per_iter_ - 1) * W + w]) bootstrap[w] = v(w, 0);
    buf.seal(std::move(bootstrap));
    return buf;
  }

  // GAE per worker over the whole buffer, then optional normalisation of
  // the advantages across the batch.
  Advantages advantages(const RolloutBuffer& buf) const {
    const std::size_t T = buf.steps(), W = buf.workers();
    Advantages out{Matrix(T * W, 1), Matrix(T * W, 1)};
    std::vector<double> all(T * W);
    for (std::size_t w = 0; w < W; ++w) {
      std::vector<double> r(T), v(T + 1);
      std::unique_ptr<bool[]> d(new bool[T]);
      for (std::size_t t = 0; t < T; ++t) {
        r[t] = buf.rewards()[t * W + w];
        v[t] = buf.values()[t * W + w];
        d[t] = buf.dones()[t * W + w];
      }
      v[T] = buf.bootstrap()[w];
      auto g = estimators::gae(r, v, std::span<const bool>(d.get(), T), cfg_.gamma, cfg_.gae_lambda);
      for (std::size_t t = 0; t < T; ++t) {
        all[t * W + w] = g.advantages[t];
        out.targets(t * W + w, 0) = g.targets[t];
      }
    }
    if (cfg_.normalize_advantages) all = estimators::normalize(all);
    for (std::size_t k = 0; k < all.size(); ++k) out.advantages(k, 0) = all[k];
    return out;
  }

  PolicyBatch policy_batch(const RolloutBuffer& buf, const Matrix& advantages) const {
    PolicyBatch b;
    b.obs = buf.obs();
    b.actions = buf.actions();
    b.noise = buf.noise();
    b.old_log_probs = buf.log_probs();
    b.advantages = advantages;
    return b;
  }

  // Recomputes log-probs of the stored actions under the current parameters.
  void check_log_probs(const PolicyBatch& b) const {
    Tape tape;
    auto s = joint_.forward(tape, b.obs, b.noise, policy::FeedMode::kHard, &b.actions);
    for (std::size_t i = 0; i < joint_.size(); ++i) {
      const double d = ad::max_abs_diff(s.log_probs[i].value(), b.old_log_probs[i]);
      if (!(d <= 1e-6)) {
        throw InternalError("Trainer::update", "stored log-probs of agent " + std::to_string(i) +
                                                   " differ from recomputed ones by " + std::to_string(d));
      }
    }
  }

  // Policy updates (sequential or simultaneous) followed by critic regression.
  UpdateStats update(const RolloutBuffer& buf) {
    if (!buf.sealed()) throw InternalError("Trainer::update", "buffer not sealed");
    const Advantages adv = advantages(buf);
    const PolicyBatch batch = policy_batch(buf, adv.advantages);
    check_log_probs(batch);
    UpdateStats st = cfg_.update_scheme == "simultaneous" ? simultaneous_update(batch) : sequential_update(batch);
    st.value_loss_before = value_loss(buf.states(), adv.targets);
    update_critic(buf.states(), adv.targets);
    st.value_loss_after = value_loss(buf.states(), adv.targets);
    return st;
  }

  UpdateStats sequential_update(const PolicyBatch& batch) {
    const std::size_t n = joint_.size();
    update_order_.clear();
    Accumulator acc;
    estimators::RatioChain chain(joint_, batch.rows());
    for (std::size_t pos = n; pos-- > 0;) {
      const std::size_t agent = joint_.order().agent_at(pos);
      if (algo_ == Algorithm::kBppo) {
        const PeerInputs peer = chain.peer_inputs(agent);
        acc.add(update_agent(agent, batch, &peer), pos + 1 < n ? &peer : nullptr);
        estimators::chain_step(chain, joint_, agent, batch, peer_path_);
      } else {
        acc.add(update_agent(agent, batch, nullptr), nullptr);
      }
    }
    return acc.finish();
  }

  UpdateStats simultaneous_update(const PolicyBatch& batch) {
    const std::size_t n = joint_.size();
    update_order_.clear();
    std::vector<PeerInputs> snapshot(n);
    if (algo_ == Algorithm::kBppo) {
      estimators::RatioChain chain(joint_, batch.rows());
      for (std::size_t pos = n; pos-- > 0;) {
        const std::size_t agent = joint_.order().agent_at(pos);
        snapshot[agent] = chain.peer_inputs(agent);
        estimators::chain_step(chain, joint_, agent, batch, peer_path_);
      }
    }
    Accumulator acc;
    for (std::size_t pos = n; pos-- > 0;) {
      const std::size_t agent = joint_.order().agent_at(pos);
      const PeerInputs* peer = algo_ == Algorithm::kBppo ? &snapshot[agent] : nullptr;
      acc.add(update_agent(agent, batch, peer), pos + 1 < n ? peer : nullptr);
    }
    return acc.finish();
  }

  // One collect + update; advances counters.
  IterationMetrics iterate() {
    RolloutBuffer buf = collect();
    UpdateStats st = update(buf);
    ++iteration_;
    env_steps_ += buf.rows();
    IterationMetrics m;
    m.iteration = iteration_;
    m.env_steps = env_steps_;
    m.seed = seed_;
    m.mean_return = buf.mean_reward();
    m.policy_loss = st.policy_loss;
    m.value_loss = st.value_loss_before;
    m.entropy = st.entropy;
    m.mean_ratio = st.mean_ratio;
    m.mean_grad_m = st.mean_grad_m;
    m.wall_clock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return m;
  }

  // Iterates until the step budget is spent. The callback sees every row.
  void train(const std::function<void(const IterationMetrics&)>& on_iteration = {}) {
    while (env_steps_ + steps_per_iteration_total() <= cfg_.env_steps) {
      IterationMetrics m = iterate();
      if (on_iteration) on_iteration(m);
    }
  }

  // Critic prediction for a batch of states, (rows x 1).
  Matrix value(Tape& tape, const Matrix& states) const {
    return policy::mlp_forward(tape, critic_, tape.constant(states)).output.value();
  }

  double value_loss(const Matrix& states, const Matrix& targets) const {
    Tape tape;
    const Matrix v = value(tape, states);
    double s = 0.0;
    for (std::size_t r = 0; r < v.rows(); ++r) s += (v(r, 0) - targets(r, 0)) * (v(r, 0) - targets(r, 0));
    return s / static_cast<double>(v.rows());
  }

 private:
  struct AgentStats {
    double loss = 0.0, entropy = 0.0, ratio = 0.0;
  };

  struct Accumulator {
    double loss = 0.0, entropy = 0.0, ratio = 0.0, grad_m = 0.0;
    std::size_t agents = 0, peers = 0;

    void add(const AgentStats& s, const PeerInputs* peer) {
      loss += s.loss;
      entropy += s.entropy;
      ratio += s.ratio;
      ++agents;
      if (peer) {
        double a = 0.0;
        for (double x : peer->grad_m.data()) a += std::abs(x);
        grad_m += peer->grad_m.data().size() ? a / static_cast<double>(peer->grad_m.data().size()) : 0.0;
        ++peers;
      }
    }

    UpdateStats finish() const {
      UpdateStats u;
      const double k = agents ? static_cast<double>(agents) : 1.0;
      u.policy_loss = loss / k;
      u.entropy = entropy / k;
      u.mean_ratio = ratio / k;
      u.mean_grad_m = peers ? grad_m / static_cast<double>(peers) : 0.0;
      return u;
    }
  };

  static PeerInputs slice(const PeerInputs& p, std::size_t b, std::size_t e) {
    return PeerInputs{p.agent, p.m.slice_rows(b, e), p.grad_m.slice_rows(b, e)};
  }

  // ppo_epoch passes over num_mini_batch contiguous minibatches. Reports the
  // statistics of the last epoch.
  AgentStats update_agent(std::size_t agent, const PolicyBatch& batch, const PeerInputs* peer) {
    update_order_.push_back(agent);
    const estimators::SurrogateConfig sc{cfg_.ppo_clip, cfg_.entropy_coef, cfg_.peer_coef};
    const std::size_t rows = batch.rows(), mbs = cfg_.num_mini_batch;
    AgentStats last;
    for (std::size_t epoch = 0; epoch < cfg_.ppo_epoch; ++epoch) {
      AgentStats acc;
      for (std::size_t k = 0; k < mbs; ++k) {
        const std::size_t b = rows * k / mbs, e = rows * (k + 1) / mbs;
        const bool whole = b == 0 && e == rows;
        const PolicyBatch mb = whole ? PolicyBatch{} : batch.slice(b, e);
        const PolicyBatch& use = whole ? batch : mb;
        Tape tape;
        estimators::AgentLoss loss;
        switch (algo_) {
          case Algorithm::kBppo:
            loss = estimators::bppo_loss(tape, joint_, agent, use, whole ? *peer : slice(*peer, b, e), sc);
            break;
          case Algorithm::kMappo:
            loss = estimators::mappo_loss(tape, joint_, agent, use, sc);
            break;
          case Algorithm::kArmappo:
          case Algorithm::kArmappoProj:
            loss = estimators::armappo_loss(tape, joint_, agent, use, sc);
            break;
        }
        tape.backward(loss.loss);
        std::vector<Matrix> grads;
        grads.reserve(loss.params.size());
        for (const auto& p : loss.params) grads.push_back(p.grad());
        actor_opt_[agent].step(joint_.agent(agent).parameters(), std::move(grads));
        const double w = static_cast<double>(e - b) / static_cast<double>(rows);
        acc.loss += w * loss.loss.value().item();
        acc.entropy += w * loss.entropy;
        double rs = 0.0;
        for (double x : loss.ratio.value().data()) rs += x;
        acc.ratio += rs / static_cast<double>(rows);
      }
      last = acc;
    }
    return last;
  }

  void update_critic(const Matrix& states, const Matrix& targets) {
    const std::size_t rows = states.rows(), mbs = cfg_.num_mini_batch;
    for (std::size_t epoch = 0; epoch < cfg_.ppo_epoch; ++epoch) {
      for (std::size_t k = 0; k < mbs; ++k) {
        const std::size_t b = rows * k / mbs, e = rows * (k + 1) / mbs;
        Tape tape;
        auto g = policy::mlp_forward(tape, critic_, tape.constant(states.slice_rows(b, e)));
        Tensor loss = ad::mean(ad::square(ad::sub(g.output, tape.constant(targets.slice_rows(b, e)))));
        tape.backward(loss);
        std::vector<Matrix> grads;
        for (const auto& p : g.params) grads.push_back(p.grad());
        critic_opt_.step(critic_.parameters(), std::move(grads));
      }
    }
  }

  ExperimentConfig cfg_;
  std::uint64_t seed_;
  Algorithm algo_ = Algorithm::kBppo;
  estimators::PeerPath peer_path_ = estimators::PeerPath::kFullChain;
  std::vector<std::unique_ptr<envs::DecPomdpEnv>> envs_;
  std::vector<Rng> worker_rngs_;
  std::size_t steps_per_iter_ = 0;
  policy::JointPolicy joint_;
  policy::MlpParams critic_;
  std::vector<Adam> actor_opt_;
  Adam critic_opt_;
  std::size_t iteration_ = 0;
  std::uint64_t env_steps_ = 0;
  std::vector<std::size_t> update_order_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace bpta::trainer
