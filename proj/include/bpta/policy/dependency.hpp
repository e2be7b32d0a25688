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

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "bpta/error.hpp"
#include "bpta/random.hpp"

namespace bpta::policy {

enum class OrderMode { kSequential, kReverse, kRandom };

inline OrderMode parse_order_mode(const std::string& s) {
  if (s == "sequential") return OrderMode::kSequential;
  if (s == "reverse") return OrderMode::kReverse;
  if (s == "random") return OrderMode::kRandom;
  throw ConfigError("execution_order", "unknown mode '" + s + "'");
}

inline std::string to_string(OrderMode m) {
  switch (m) {
    case OrderMode::kSequential: return "sequential";
    case OrderMode::kReverse: return "reverse";
    case OrderMode::kRandom: return "random";
  }
  return "?";
}

// Permutation of agent ids giving the order in which agents act. Position p
// holds the agent that acts p-th. Fixed for a whole training run.
class ExecutionOrder {
 public:
  ExecutionOrder() = default;
  ExecutionOrder(std::vector<std::size_t> agents, OrderMode mode) : agents_(std::move(agents)), mode_(mode) {
    validate();
  }

  static ExecutionOrder make(OrderMode mode, std::size_t n, Rng& rng) {
    std::vector<std::size_t> p(n);
    std::iota(p.begin(), p.end(), 0);
    if (mode == OrderMode::kReverse) std::reverse(p.begin(), p.end());
    if (mode == OrderMode::kRandom) {
      for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[rng.index(i)]);
    }
    return ExecutionOrder(std::move(p), mode);
  }

  static ExecutionOrder sequential(std::size_t n) {
    Rng unused;
    return make(OrderMode::kSequential, n, unused);
  }

  std::size_t size() const noexcept { return agents_.size(); }
  std::size_t agent_at(std::size_t position) const { return agents_.at(position); }
  std::size_t position_of(std::size_t agent) const {
    auto it = std::find(agents_.begin(), agents_.end(), agent);
    if (it == agents_.end()) throw InternalError("ExecutionOrder", "unknown agent");
    return static_cast<std::size_t>(it - agents_.begin());
  }
  const std::vector<std::size_t>& agents() const noexcept { return agents_; }
  OrderMode mode() const noexcept { return mode_; }

 private:
  void validate() const {
    std::vector<std::size_t> sorted = agents_;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
      if (sorted[i] != i) throw ConfigError("ExecutionOrder", "not a permutation of 0..n-1");
  }

  std::vector<std::size_t> agents_;
  OrderMode mode_ = OrderMode::kSequential;
};

// Forward sets F_i (agents whose actions feed agent i) and their dual
// backward sets B_i. Sets are kept sorted by execution position.
class DependencySets {
 public:
  DependencySets() = default;

  // F_i from explicit lists; checked against `order` for acyclicity.
  DependencySets(std::vector<std::vector<std::size_t>> forward, const ExecutionOrder& order)
      : forward_(std::move(forward)), backward_(forward_.size()) {
    const std::size_t n = forward_.size();
    if (n != order.size()) throw ConfigError("DependencySets", "agent count does not match order");
    for (std::size_t i = 0; i < n; ++i) {
      auto& f = forward_[i];
      std::sort(f.begin(), f.end(), [&](std::size_t a, std::size_t b) {
        return order.position_of(a) < order.position_of(b);
      });
      if (std::adjacent_find(f.begin(), f.end()) != f.end()) {
        throw ConfigError("DependencySets", "duplicate entry in forward set");
      }
      for (std::size_t j : f) {
        if (j >= n) throw ConfigError("DependencySets", "unknown agent in forward set");
        // An edge j -> i must point forward in execution order; this also
        // rules out cycles.
        if (order.position_of(j) >= order.position_of(i)) {
          throw ConfigError("DependencySets", "agent " + std::to_string(i) + " depends on agent " +
                                                  std::to_string(j) + " which does not act before it");
        }
        backward_[j].push_back(i);
      }
    }
    for (auto& b : backward_) {
      std::sort(b.begin(), b.end(), [&](std::size_t a, std::size_t c) {
        return order.position_of(a) < order.position_of(c);
      });
    }
  }

  // Every agent conditions on all agents that act before it.
  static DependencySets full(const ExecutionOrder& order) {
    std::vector<std::vector<std::size_t>> f(order.size());
    for (std::size_t p = 0; p < order.size(); ++p)
      for (std::size_t q = 0; q < p; ++q) f[order.agent_at(p)].push_back(order.agent_at(q));
    return DependencySets(std::move(f), order);
  }

  // Fully independent agents.
  static DependencySets none(const ExecutionOrder& order) {
    return DependencySets(std::vector<std::vector<std::size_t>>(order.size()), order);
  }

  std::size_t size() const noexcept { return forward_.size(); }
  const std::vector<std::size_t>& forward(std::size_t agent) const { return forward_.at(agent); }
  const std::vector<std::size_t>& backward(std::size_t agent) const { return backward_.at(agent); }

 private:
  std::vector<std::vector<std::size_t>> forward_;
  std::vector<std::vector<std::size_t>> backward_;
};

}  // namespace bpta::policy
