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

#include <optional>
#include <span>
#include <vector>

#include "bpta/autodiff/ops.hpp"
#include "bpta/policy/mlp.hpp"
#include "bpta/spaces.hpp"

namespace bpta::policy {

// How one predecessor's action is presented to a successor: one-hot or raw
// vector, optionally multiplied by a projection (k x proj_dim) first.
struct ActionEncoding {
  ActionSpace space;
  std::optional<Matrix> projection;
  bool learned = false;

  std::size_t output_dim() const { return projection ? projection->cols() : space.encoded_dim(); }
};

// Fixed projection for the high-dimensional encoding ablation: a random
// Gaussian matrix with orthonormalised rows.
inline Matrix random_projection(std::size_t in_dim, std::size_t out_dim, Rng& rng) {
  return orthogonal(in_dim, out_dim, 1.0, rng);
}

// Concatenates encoded predecessor actions. `actions[k]` is the one-hot,
// relaxed, or raw action of the k-th predecessor. Learned projections are
// placed on the tape as variables and appended to `learned_params`.
// Returns an invalid Tensor when there are no predecessors.
inline Tensor encode_preceding(Tape& tape, std::span<const Tensor> actions,
                               std::span<const ActionEncoding> encodings,
                               std::vector<Tensor>* learned_params = nullptr) {
  if (actions.size() != encodings.size()) {
    throw ShapeError("encode_preceding", "action count does not match encodings");
  }
  if (actions.empty()) return {};
  std::vector<Tensor> parts;
  parts.reserve(actions.size());
  for (std::size_t k = 0; k < actions.size(); ++k) {
    const auto& enc = encodings[k];
    if (actions[k].shape().cols != enc.space.encoded_dim()) {
      throw ShapeError("encode_preceding", "action width " + std::to_string(actions[k].shape().cols) +
                                               " vs space " + std::to_string(enc.space.encoded_dim()));
    }
    if (enc.projection) {
      Tensor p = enc.learned ? tape.variable(*enc.projection) : tape.constant(*enc.projection);
      if (enc.learned && learned_params) learned_params->push_back(p);
      parts.push_back(ad::matmul(actions[k], p));
    } else {
      parts.push_back(actions[k]);
    }
  }
  return parts.size() == 1 ? parts.front() : ad::concat_cols(parts);
}

}  // namespace bpta::policy
