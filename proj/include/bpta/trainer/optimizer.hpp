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

#include "bpta/autodiff/matrix.hpp"
#include "bpta/error.hpp"

namespace bpta::trainer {

using ad::Matrix;

struct AdamConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-5;
  double weight_decay = 0.0;
  double max_grad_norm = 10.0;  // <= 0 disables clipping
};

inline double global_norm(const std::vector<Matrix>& grads) {
  double s = 0.0;
  for (const auto& g : grads)
    for (double x : g.data()) s += x * x;
  return std::sqrt(s);
}

// Adam with L2 weight decay added to the gradient and global-norm clipping.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  const AdamConfig& config() const noexcept { return cfg_; }
  void set_lr(double lr) { cfg_.lr = lr; }
  std::size_t steps() const noexcept { return t_; }
  const std::vector<Matrix>& first_moments() const noexcept { return m_; }
  const std::vector<Matrix>& second_moments() const noexcept { return v_; }

  void restore(std::size_t t, std::vector<Matrix> m, std::vector<Matrix> v) {
    if (m.size() != v.size()) throw FormatError("Adam::restore", "moment count mismatch");
    t_ = t;
    m_ = std::move(m);
    v_ = std::move(v);
  }

  // Returns the gradient norm before clipping. Nothing is modified when a
  // gradient is non-finite.
  double step(const std::vector<Matrix*>& params, std::vector<Matrix> grads) {
    if (params.size() != grads.size()) throw ShapeError("Adam::step", "parameter / gradient count mismatch");
    for (std::size_t k = 0; k < params.size(); ++k) {
      if (params[k]->shape() != grads[k].shape()) {
        throw ShapeError("Adam::step", "gradient " + std::to_string(k) + " has shape " + grads[k].shape().str() +
                                           ", parameter " + params[k]->shape().str());
      }
      if (!grads[k].all_finite()) {
        throw DomainError("Adam::step", "non-finite gradient for parameter " + std::to_string(k));
      }
    }
    if (m_.empty()) {
      for (auto* p : params) {
        m_.emplace_back(p->rows(), p->cols());
        v_.emplace_back(p->rows(), p->cols());
      }
    } else if (m_.size() != params.size()) {
      throw ShapeError("Adam::step", "parameter set changed between steps");
    }
    const double norm = global_norm(grads);
    if (cfg_.max_grad_norm > 0.0 && norm > cfg_.max_grad_norm) {
      const double scale = cfg_.max_grad_norm / norm;
      for (auto& g : grads) g *= scale;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      auto p = params[k]->data();
      auto g = grads[k].data();
      auto m = m_[k].data();
      auto v = v_[k].data();
      for (std::size_t e = 0; e < p.size(); ++e) {
        const double ge = g[e] + cfg_.weight_decay * p[e];
        m[e] = cfg_.beta1 * m[e] + (1.0 - cfg_.beta1) * ge;
        v[e] = cfg_.beta2 * v[e] + (1.0 - cfg_.beta2) * ge * ge;
        const double mh = m[e] / bc1;
        const double vh = v[e] / bc2;
        p[e] -= cfg_.lr * mh / (std::sqrt(vh) + cfg_.eps);
      }
    }
    return norm;
  }

 private:
  AdamConfig cfg_;
  std::vector<Matrix> m_, v_;
  std::size_t t_ = 0;
};

}  // namespace bpta::trainer
