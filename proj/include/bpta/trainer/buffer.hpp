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

#include <string>
#include <vector>

#include "bpta/autodiff/matrix.hpp"
#include "bpta/error.hpp"
#include "bpta/spaces.hpp"

namespace bpta::trainer {

using ad::Matrix;

// Transitions of one collection pass. Row t * workers + w holds step t of
// worker w. Filled step by step, then sealed; afterwards read-only.
class RolloutBuffer {
 public:
  RolloutBuffer() = default;

  RolloutBuffer(std::size_t steps, std::size_t workers, const std::vector<ActionSpace>& spaces,
                const std::vector<std::size_t>& obs_dims, std::size_t state_dim)
      : steps_(steps), workers_(workers), spaces_(spaces), states_(steps * workers, state_dim) {
    if (spaces.size() != obs_dims.size()) throw ShapeError("RolloutBuffer", "agent count mismatch");
    const std::size_t rows = steps * workers;
    for (std::size_t i = 0; i < spaces.size(); ++i) {
      obs_.emplace_back(rows, obs_dims[i]);
      noise_.emplace_back(rows, spaces[i].size);
      log_probs_.emplace_back(rows, 1);
      ActionBatch a;
      if (spaces[i].is_discrete()) a.indices.assign(rows, 0);
      else a.values = Matrix(rows, spaces[i].size);
      actions_.push_back(std::move(a));
    }
    rewards_.assign(rows, 0.0);
    values_.assign(rows, 0.0);
    dones_.assign(rows, false);
    bootstrap_.assign(workers, 0.0);
  }

  std::size_t steps() const noexcept { return steps_; }
  std::size_t workers() const noexcept { return workers_; }
  std::size_t rows() const noexcept { return steps_ * workers_; }
  std::size_t num_agents() const noexcept { return spaces_.size(); }
  std::size_t filled() const noexcept { return filled_; }
  bool sealed() const noexcept { return sealed_; }

  // Appends one step for all workers. Per-agent matrices have one row per
  // worker.
  void append(const std::vector<Matrix>& obs, const std::vector<ActionBatch>& actions,
              const std::vector<Matrix>& noise, const std::vector<Matrix>& log_probs, const Matrix& states,
              const std::vector<double>& rewards, const std::vector<double>& values, const std::vector<bool>& dones) {
    if (sealed_) throw InternalError("RolloutBuffer::append", "buffer is sealed");
    if (filled_ == steps_) throw InternalError("RolloutBuffer::append", "buffer is full");
    const std::size_t n = num_agents(), w = workers_;
    if (obs.size() != n || actions.size() != n || noise.size() != n || log_probs.size() != n) {
      throw ShapeError("RolloutBuffer::append", "per-agent entry count");
    }
    if (rewards.size() != w || values.size() != w || dones.size() != w || states.rows() != w) {
      throw ShapeError("RolloutBuffer::append", "per-worker entry count");
    }
    const std::size_t base = filled_ * w;
    for (std::size_t i = 0; i < n; ++i) {
      copy_rows(obs[i], obs_[i], base);
      copy_rows(noise[i], noise_[i], base);
      copy_rows(log_probs[i], log_probs_[i], base);
      if (spaces_[i].is_discrete()) {
        if (actions[i].indices.size() != w) throw ShapeError("RolloutBuffer::append", "action rows");
        for (std::size_t r = 0; r < w; ++r) actions_[i].indices[base + r] = actions[i].indices[r];
      } else {
        copy_rows(actions[i].values, actions_[i].values, base);
      }
    }
    copy_rows(states, states_, base);
    for (std::size_t r = 0; r < w; ++r) {
      rewards_[base + r] = rewards[r];
      values_[base + r] = values[r];
      dones_[base + r] = dones[r];
    }
    ++filled_;
  }

  // Records V(s_T) per worker (0 for finished episodes) and freezes the buffer.
  void seal(std::vector<double> bootstrap) {
    if (filled_ != steps_) throw InternalError("RolloutBuffer::seal", "buffer incomplete");
    if (bootstrap.size() != workers_) throw ShapeError("RolloutBuffer::seal", "bootstrap count");
    bootstrap_ = std::move(bootstrap);
    sealed_ = true;
  }

  const std::vector<Matrix>& obs() const noexcept { return obs_; }
  const std::vector<ActionBatch>& actions() const noexcept { return actions_; }
  const std::vector<Matrix>& noise() const noexcept { return noise_; }
  const std::vector<Matrix>& log_probs() const noexcept { return log_probs_; }
  const Matrix& states() const noexcept { return states_; }
  const std::vector<double>& rewards() const noexcept { return rewards_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<bool>& dones() const noexcept { return dones_; }
  const std::vector<double>& bootstrap() const noexcept { return bootstrap_; }

  double mean_reward() const {
    double s = 0.0;
    for (double r : rewards_) s += r;
    return rewards_.empty() ? 0.0 : s / static_cast<double>(rewards_.size());
  }

  // Number of completed episodes across workers.
  std::size_t episodes() const {
    std::size_t k = 0;
    for (bool d : dones_) k += d ? 1 : 0;
    return k;
  }

  friend bool operator==(const RolloutBuffer& a, const RolloutBuffer& b) {
    if (a.steps_ != b.steps_ || a.workers_ != b.workers_ || a.num_agents() != b.num_agents()) return false;
    for (std::size_t i = 0; i < a.num_agents(); ++i) {
      if (!(a.obs_[i] == b.obs_[i]) || !(a.noise_[i] == b.noise_[i]) || !(a.log_probs_[i] == b.log_probs_[i]))
        return false;
      if (a.actions_[i].indices != b.actions_[i].indices || !(a.actions_[i].values == b.actions_[i].values))
        return false;
    }
    return a.states_ == b.states_ && a.rewards_ == b.rewards_ && a.values_ == b.values_ && a.dones_ == b.dones_ &&
           a.bootstrap_ == b.bootstrap_;
  }

 private:
  static void copy_rows(const Matrix& src, Matrix& dst, std::size_t base) {
    if (src.cols() != dst.cols() || base + src.rows() > dst.rows()) {
      throw ShapeError("RolloutBuffer::append", "got " + src.shape().str() + " for buffer " + dst.shape().str());
    }
    for (std::size_t r = 0; r < src.rows(); ++r)
      for (std::size_t c = 0; c < src.cols(); ++c) dst(base + r, c) = src(r, c);
  }

  std::size_t steps_ = 0, workers_ = 0, filled_ = 0;
  bool sealed_ = false;
  std::vector<ActionSpace> spaces_;
  std::vector<Matrix> obs_, noise_, log_probs_;
  std::vector<ActionBatch> actions_;
  Matrix states_;
  std::vector<double> rewards_, values_;
  std::vector<bool> dones_;
  std::vector<double> bootstrap_;
};

}  // namespace bpta::trainer
